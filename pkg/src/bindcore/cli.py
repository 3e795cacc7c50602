"""Command-line entry point: ``bindcore {synth,train,eval,ablate,embed}``.

Settings resolve as flags > TOML config file > defaults. Exit codes: 0 ok,
2 usage or configuration error, 3 data, parse or checkpoint error, 4 internal
contract violation.
"""
import argparse
import datetime
import json
import logging
import os
import shutil
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .alignment import AlignmentConfig, JointModel, ModelConfig, train
from .chemdata import (
    MODALITIES,
    PAIR_KINDS,
    Vocabulary,
    generate_synthetic_m4,
    load_dataset,
    pretrain_texts,
    write_dataset,
)
from .chemdata.store import EXTENSIONS, PARSERS
from .errors import BindcoreError, ConfigError, DataError, ParseError
from .evaluation import DIRECTIONS, STANDARD_GRID, ablation_run, evaluate_retrieval, rows_to_csv

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger("bindcore")

MODE_NAMES = {"batch": "in_batch", "full": "full_set"}


def run_root():
    return Path(os.environ.get("BINDCORE_RUN_ROOT", "runs"))


def load_toml(path):
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from None


def parse_pairs(text):
    pairs = tuple(p.strip() for p in text.split(",") if p.strip())
    bad = [p for p in pairs if p not in PAIR_KINDS]
    if bad or not pairs:
        raise ConfigError(f"--pairs must list pair kinds from {', '.join(PAIR_KINDS)}; got {text!r}")
    return pairs


def resolve_train_config(args):
    """Merge defaults, the TOML file's [model] and [alignment] tables, and flags."""
    file_cfg = load_toml(args.config)
    unknown = set(file_cfg) - {"model", "alignment"}
    if unknown:
        raise ConfigError(f"unknown config tables {sorted(unknown)}; expected [model] and [alignment]")
    align = dict(file_cfg.get("alignment", {}))
    flags = {"seed": args.seed, "max_epochs": args.epochs, "batch_size": args.batch_size, "lr": args.lr,
             "temperature": args.temperature, "patience": args.patience}
    align.update({k: v for k, v in flags.items() if v is not None})
    if args.pairs is not None:
        align["active_pairs"] = parse_pairs(args.pairs)
    try:
        return ModelConfig.from_dict(dict(file_cfg.get("model", {}))), AlignmentConfig.from_dict(align)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# -- commands -------------------------------------------------------------------------------


def cmd_synth(args):
    syn = generate_synthetic_m4(args.n, latent_dim=args.latent_dim, noise_sigma=args.noise, seed=args.seed,
                                levels=args.levels)
    prov = write_dataset(syn, args.out)
    print(json.dumps({"out": str(args.out), "counts": prov["counts"]}, sort_keys=True))
    return 0


def cmd_train(args):
    model_cfg, cfg = resolve_train_config(args)
    run_dir = Path(args.run_dir) if args.run_dir else run_root() / f"train-seed{cfg.seed}"
    # every manifest must be present and valid before any training starts
    dataset = load_dataset(args.data, cfg.active_pairs)
    if run_dir.exists() and any(run_dir.iterdir()):
        if not args.overwrite:
            raise ConfigError(f"run directory {run_dir} already exists; pass --overwrite to replace it")
        shutil.rmtree(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    vocab = Vocabulary.build(pretrain_texts(dataset))
    resolved = {"data": str(args.data), "model": asdict(model_cfg), "alignment": cfg.to_dict()}
    write_json(run_dir / "config.json", resolved)
    vocab.save(run_dir / "vocab.txt")
    write_json(run_dir / "run_meta.json", {
        "started": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "version": __version__,
        "argv": sys.argv[1:],
    })
    model = JointModel(vocab, model_cfg, seed=cfg.seed, lr=cfg.lr, learn_temperature=cfg.learn_temperature,
                       temperature=cfg.temperature)
    model, metrics = train(model, dataset, cfg, run_dir=run_dir)
    if not metrics:
        model.save(run_dir / "best.ckpt", {"alignment": cfg.to_dict(), "epoch": 0})
        model.save(run_dir / "last.ckpt", {"alignment": cfg.to_dict(), "epoch": 0})
        (run_dir / "metrics.jsonl").write_text("", encoding="utf-8")
    print(json.dumps({"run_dir": str(run_dir), "epochs": len({m["epoch"] for m in metrics})}))
    return 0


def cmd_eval(args):
    model = JointModel.load(args.ckpt)
    ck_align = json.loads(Path(args.ckpt).read_text(encoding="utf-8"))["config"].get("alignment", {})
    seed = args.seed if args.seed is not None else ck_align.get("seed", 0)
    kind = DIRECTIONS[args.direction][0]
    dataset = load_dataset(args.data, [kind])
    report = evaluate_retrieval(model, dataset, args.direction, MODE_NAMES[args.mode], args.split,
                                batch_size=args.batch_size, seed=seed)
    text = report.to_json()
    out_dir = Path(args.run_dir) if args.run_dir else Path(args.ckpt).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"eval-{args.direction}-{args.mode}-{args.split}.json").write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def load_grid(path):
    if path == "standard":
        return [list(p) for p in STANDARD_GRID]
    grid = load_toml(path).get("configurations")
    if not isinstance(grid, list) or not grid:
        raise ConfigError(f"{path}: 'configurations' must be a non-empty list of pair-kind lists")
    out = []
    for row in grid:
        if not isinstance(row, list) or not row:
            raise ConfigError(f"{path}: every configuration must be a non-empty list of pair kinds")
        out.append(list(parse_pairs(",".join(row))))
    return out


def cmd_ablate(args):
    grid = load_grid(args.grid)
    model_cfg, cfg = resolve_train_config(args)
    needed = sorted({k for row in grid for k in row} | {"language-graph", "language-conformation"})
    dataset = load_dataset(args.data, needed)

    def factory(vocab, seed):
        return JointModel(vocab, model_cfg, seed=seed, lr=cfg.lr)

    rows = ablation_run(dataset, grid, cfg, factory)
    text = rows_to_csv(rows)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def cmd_embed(args):
    model = JointModel.load(args.ckpt)
    path = Path(args.input)
    if path.suffix != EXTENSIONS[args.modality]:
        raise ParseError(f"{path}: a {args.modality} record must be a {EXTENSIONS[args.modality]} file")
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"input file not found: {path}") from None
    try:
        record = PARSERS[args.modality](text)
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None
    vec = model.embed(args.modality, [record])[0]
    print(json.dumps({"modality": args.modality, "dim": int(vec.shape[0]), "embedding": vec.tolist()}))
    return 0


# -- parser ---------------------------------------------------------------------------------


def add_train_flags(p):
    p.add_argument("--config", help="TOML file with [model] and [alignment] tables")
    p.add_argument("--pairs", help="comma-separated pair kinds (default: all four)")
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int, help="maximum epochs")
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--temperature", type=float)
    p.add_argument("--patience", type=int)


def build_parser():
    parser = argparse.ArgumentParser(prog="bindcore", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"bindcore {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic four-modality corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--latent-dim", type=int, default=8)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--levels", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train encoders on the active pair kinds")
    p.add_argument("--data", required=True)
    p.add_argument("--run-dir", help="output directory (default: $BINDCORE_RUN_ROOT/train-seed<seed>)")
    p.add_argument("--overwrite", action="store_true")
    add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="cross-modal retrieval report")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--direction", required=True, choices=sorted(DIRECTIONS))
    p.add_argument("--mode", default="full", choices=sorted(MODE_NAMES))
    p.add_argument("--split", default="test", choices=("pretrain", "validation", "test"))
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--seed", type=int, help="batching seed (default: the checkpoint's training seed)")
    p.add_argument("--run-dir", help="where to write the report (default: the checkpoint's directory)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="train one model per pair-kind configuration")
    p.add_argument("--data", required=True)
    p.add_argument("--grid", required=True, help="TOML file with 'configurations', or 'standard'")
    p.add_argument("--out", help="CSV output path")
    add_train_flags(p)
    p.set_defaults(func=cmd_ablate, pairs=None)

    p = sub.add_parser("embed", help="embed one record file")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--modality", required=True, choices=MODALITIES)
    p.set_defaults(func=cmd_embed)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except BindcoreError as exc:
        print(f"bindcore {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"bindcore {args.command}: error: {exc}", file=sys.stderr)
        return DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())
