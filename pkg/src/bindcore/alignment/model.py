"""Joint model: four encoders, four projection heads and their optimiser states."""
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .. import numerics as nx
from ..chemdata import MODALITIES, Vocabulary
from ..encoders import GraphBatch, GraphEncoder, ProjectionHead, StructBatch, TextBatch, TextEncoder, UniMolEncoder
from ..errors import CheckpointError, ConfigError, ContractError
from ..numerics import AdamState

FORMAT_VERSION = 1


@dataclass
class ModelConfig:
    embed_dim: int = 64
    text_width: int = 64
    text_layers: int = 2
    max_text_len: int = 128
    graph_width: int = 64
    graph_layers: int = 2
    unimol_width: int = 64
    unimol_layers: int = 2
    unimol_heads: int = 4
    unimol_ffn_ratio: int = 2

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**d)


class JointModel:
    def __init__(self, vocab, config=None, seed=0, lr=0.001, learn_temperature=False, temperature=1.0):
        self.vocab = vocab if isinstance(vocab, Vocabulary) else Vocabulary(vocab)
        self.config = config or ModelConfig()
        self.seed = seed
        c = self.config
        self.encoders = {
            "language": TextEncoder(len(self.vocab), c.text_width, c.text_layers, c.max_text_len, seed=seed),
            "graph": GraphEncoder(c.graph_width, c.graph_layers, seed=seed),
            "conformation": UniMolEncoder(c.unimol_width, c.unimol_layers, c.unimol_heads,
                                          ffn_ratio=c.unimol_ffn_ratio, modality="conformation", seed=seed),
            "protein": UniMolEncoder(c.unimol_width, c.unimol_layers, c.unimol_heads,
                                     ffn_ratio=c.unimol_ffn_ratio, modality="protein", seed=seed),
        }
        self.heads = {m: ProjectionHead(self.encoders[m].width, c.embed_dim, m, seed=seed) for m in MODALITIES}
        self.optim = {m: AdamState(lr=lr) for m in MODALITIES}
        self.log_temperature = None
        if learn_temperature:
            self.log_temperature = nx.Tensor(np.array([np.log(temperature)]), requires_grad=True, name="log_tau")
            self.optim["temperature"] = AdamState(lr=lr)

    @property
    def embed_dim(self):
        return self.config.embed_dim

    # -- parameters -----------------------------------------------------------------------

    def parameters(self, modality):
        out = {f"{modality}.{k}": p for k, p in self.encoders[modality].params.items()}
        out[f"head.{modality}.w"] = self.heads[modality]["w"]
        return out

    def all_parameters(self):
        out = {}
        for m in MODALITIES:
            out.update(self.parameters(m))
        if self.log_temperature is not None:
            out["log_temperature"] = self.log_temperature
        return out

    def state_dict(self):
        return {k: p.data.copy() for k, p in self.all_parameters().items()}

    def load_state_dict(self, state):
        params = self.all_parameters()
        missing = sorted(set(params) - set(state))
        extra = sorted(set(state) - set(params))
        if missing or extra:
            raise CheckpointError(f"parameter mismatch: missing {missing[:5]}, unexpected {extra[:5]}")
        for k, p in params.items():
            arr = np.asarray(state[k], dtype=np.float64)
            if arr.shape != p.data.shape:
                raise CheckpointError(f"parameter {k}: shape {arr.shape} != expected {p.data.shape}")
            p.data = arr.copy()
            p.grad = None

    def step(self, modality):
        """Adam update for one modality's encoder and head."""
        nx.adam_step(self.parameters(modality), self.optim[modality])

    # -- encoding -------------------------------------------------------------------------

    def featurize(self, modality, records):
        if modality == "language":
            seqs = [r if not isinstance(r, str) else self.vocab.encode(r) for r in records]
            return TextBatch.from_sequences(seqs, self.config.max_text_len)
        if modality == "graph":
            return GraphBatch.from_graphs(records)
        if modality in ("conformation", "protein"):
            return StructBatch.from_structures(records)
        raise ContractError(f"unknown modality {modality!r}")

    def embed_batch(self, modality, batch):
        """Normalised embeddings [B, D] as a Tensor (recorded if a tape is active)."""
        return self.heads[modality](self.encoders[modality].forward(batch))

    def embed(self, modality, records, chunk=128):
        """Normalised embeddings as a plain array, without recording gradients."""
        out = []
        for i in range(0, len(records), chunk):
            out.append(self.embed_batch(modality, self.featurize(modality, records[i:i + chunk])).data)
        return np.concatenate(out, axis=0) if out else np.zeros((0, self.embed_dim))

    def temperature(self, default):
        return float(np.exp(self.log_temperature.data[0])) if self.log_temperature is not None else default

    # -- checkpoints ----------------------------------------------------------------------

    def checkpoint(self, extra_config=None):
        params = {k: {"shape": list(v.shape), "data": v.reshape(-1).tolist()} for k, v in self.state_dict().items()}
        return {
            "format_version": FORMAT_VERSION,
            "seed": self.seed,
            "config": {
                "model": asdict(self.config),
                "vocabulary": self.vocab.tokens,
                "learn_temperature": self.log_temperature is not None,
                **(extra_config or {}),
            },
            "params": params,
            "optimizer": {m: s.to_dict() for m, s in self.optim.items()},
        }

    def save(self, path, extra_config=None):
        text = json.dumps(self.checkpoint(extra_config), separators=(",", ":"))
        Path(path).write_text(text, encoding="utf-8")

    @classmethod
    def from_checkpoint(cls, ck):
        if not isinstance(ck, dict) or "format_version" not in ck:
            raise CheckpointError("not a checkpoint: missing format_version")
        if ck["format_version"] != FORMAT_VERSION:
            raise CheckpointError(f"unsupported checkpoint format_version {ck['format_version']!r}"
                                  f" (this build reads {FORMAT_VERSION})")
        try:
            cfg = ck["config"]
            model = cls(cfg["vocabulary"], ModelConfig.from_dict(cfg["model"]), seed=ck["seed"],
                        learn_temperature=cfg.get("learn_temperature", False))
            state = {k: np.asarray(v["data"], dtype=np.float64).reshape(v["shape"]) for k, v in ck["params"].items()}
            model.load_state_dict(state)
            shapes = {k: tuple(v["shape"]) for k, v in ck["params"].items()}
            for m, st in ck.get("optimizer", {}).items():
                model.optim[m] = AdamState.from_dict(st, shapes)
        except (KeyError, TypeError, ValueError) as exc:
            raise CheckpointError(f"corrupt checkpoint: {exc.__class__.__name__}: {exc}") from None
        return model

    @classmethod
    def load(cls, path):
        try:
            ck = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise CheckpointError(f"checkpoint not found: {path}") from None
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise CheckpointError(f"corrupt checkpoint {path}: {exc}") from None
        return cls.from_checkpoint(ck)
