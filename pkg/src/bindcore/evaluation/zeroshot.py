"""Zero-shot classification by ranking templated class names against a graph embedding."""
import numpy as np

from ..chemdata import TEXT_TEMPLATE
from ..errors import ContractError


def softmax(logits):
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def name_embeddings(model, names, template=TEXT_TEMPLATE):
    if not names:
        raise ContractError("zero-shot classification needs at least one class name")
    return model.embed("language", [template.format(n) for n in names])


def zero_shot_classify(model, graph, names, temperature=1.0, template=TEXT_TEMPLATE):
    """Probability of each name for ``graph``: softmax over g . t_i / tau."""
    if not temperature > 0:
        raise ContractError("temperature must be positive")
    names = list(names)
    # each distinct name is scored once, so duplicates get bit-identical logits
    distinct = sorted(set(names))
    t = name_embeddings(model, distinct, template)
    g = model.embed("graph", [graph])[0]
    logits = t @ g / temperature
    pos = {n: i for i, n in enumerate(distinct)}
    return softmax(logits[[pos[n] for n in names]])


def zero_shot_accuracy(model, graphs, true_names, candidate_names=None, temperature=1.0):
    """Top-1 accuracy (percent) and the candidate pool size.

    The pool defaults to the distinct names among ``true_names``. Ties go to
    the lower pool index.
    """
    pool = sorted(set(true_names)) if candidate_names is None else list(candidate_names)
    index = {n: i for i, n in enumerate(pool)}
    missing = [n for n in true_names if n not in index]
    if missing:
        raise ContractError(f"true name {missing[0]!r} is not in the candidate pool")
    t = name_embeddings(model, pool)
    g = model.embed("graph", list(graphs))
    pred = np.argmax(g @ t.T / temperature, axis=1)
    hits = pred == np.array([index[n] for n in true_names])
    return 100.0 * float(np.mean(hits)), len(pool)
