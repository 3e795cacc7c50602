import math

import numpy as np
import pytest

from bindcore import numerics as nx
from bindcore.chemdata import Conformation, MoleculeGraph, PocketStructure, TokenSequence, random_rotation
from bindcore.chemdata.elements import N_PAIR_TYPES
from bindcore.encoders import (
    GraphBatch,
    GraphEncoder,
    ProjectionHead,
    StructBatch,
    TextBatch,
    TextEncoder,
    UniMolEncoder,
    encode_conformation,
    encode_graph,
    encode_pocket,
    encode_text,
    gaussian_pair_features,
    project,
    unimol_layer,
)
from bindcore.errors import ContractError, DegenerateInputError, DimensionError
from bindcore.numerics.gradcheck import check_gradients

from oracles import (
    distance_blind_unimol,
    gaussian_scalar,
    module_gradcheck,
    np_layer_norm,
    plain_attention,
    random_graph,
    random_structure,
)

VOCAB = 12


def seq(*ids, vocab=VOCAB):
    return TokenSequence(ids, "", vocab)


# -- text ------------------------------------------------------------------------------------


def test_text_single_token_is_pooled_state_of_that_token():
    enc = TextEncoder(VOCAB, width=16, seed=1)
    out = encode_text(enc, seq(5)).data
    assert out.shape == (16,)
    assert np.all(np.isfinite(out))


def test_text_order_matters():
    enc = TextEncoder(VOCAB, width=16, seed=1)
    a = encode_text(enc, seq(3, 4, 5)).data
    b = encode_text(enc, seq(5, 4, 3)).data
    assert np.abs(a - b).max() > 1e-6


def test_text_is_deterministic():
    enc = TextEncoder(VOCAB, width=16, seed=1)
    np.testing.assert_array_equal(encode_text(enc, seq(1, 2, 3)).data, encode_text(enc, seq(1, 2, 3)).data)


def test_text_rejects_out_of_range_ids():
    enc = TextEncoder(VOCAB, width=16)
    with pytest.raises(ContractError, match="out of range"):
        encode_text(enc, seq(1, VOCAB + 3, vocab=VOCAB + 10))


def test_text_truncates_at_max_len():
    enc = TextEncoder(VOCAB, width=8, max_len=4)
    long = encode_text(enc, seq(1, 2, 3, 4, 5, 6, 7)).data
    np.testing.assert_array_equal(long, encode_text(enc, seq(1, 2, 3, 4)).data)


def test_text_padding_does_not_leak_into_shorter_sequences():
    enc = TextEncoder(VOCAB, width=16, seed=2)
    batch = TextBatch.from_sequences([seq(1, 2), seq(3, 4, 5, 6, 7)])
    both = enc.forward(batch).data
    np.testing.assert_allclose(both[0], encode_text(enc, seq(1, 2)).data, atol=1e-12)


# -- graph -----------------------------------------------------------------------------------


def test_graph_single_atom_is_mlp_stack_on_its_embedding():
    enc = GraphEncoder(width=8, seed=3)
    P = {k: p.data for k, p in enc.params.items()}
    h = P["atom_emb"][4]
    for l in range(enc.n_layers):
        p = f"gin{l}."
        z = np.maximum((1 + P[p + "eps"][0]) * h @ P[p + "w1"] + P[p + "b1"], 0)
        h = z @ P[p + "w2"] + P[p + "b2"]
        if l < enc.n_layers - 1:
            h = np.maximum(h, 0)
    np.testing.assert_allclose(encode_graph(enc, MoleculeGraph([4], [])).data, h, atol=1e-12)


def test_graph_permutation_invariance():
    enc = GraphEncoder(width=16, seed=0)
    rng = np.random.default_rng(0)
    for n in range(1, 9):
        g = random_graph(rng, n_atoms=n)
        ref = encode_graph(enc, g).data
        for _ in range(50):
            out = encode_graph(enc, g.permuted(rng.permutation(n))).data
            assert np.abs(out - ref).max() < 1e-9


def test_graph_separates_path_from_triangle():
    enc = GraphEncoder(width=16, seed=0)
    path = MoleculeGraph([2, 2, 2], [(0, 1, 1), (1, 2, 1)])
    tri = MoleculeGraph([2, 2, 2], [(0, 1, 1), (1, 2, 1), (0, 2, 1)])
    assert np.linalg.norm(encode_graph(enc, path).data - encode_graph(enc, tri).data) > 1e-6


def test_graph_batch_matches_single_encodes():
    enc = GraphEncoder(width=16, seed=0)
    rng = np.random.default_rng(1)
    graphs = [random_graph(rng) for _ in range(5)]
    out = enc.forward(GraphBatch.from_graphs(graphs)).data
    for g, row in zip(graphs, out):
        np.testing.assert_allclose(row, encode_graph(enc, g).data, atol=1e-12)


# -- gaussian pair features ------------------------------------------------------------------


def kernel_params(a=1.0, b=0.0, mu=(0.0, 1.5, 3.0), sigma=(1.0, 1.0, 1.0)):
    return np.full(N_PAIR_TYPES, a), np.full(N_PAIR_TYPES, b), np.array(mu, float), np.array(sigma, float)


def test_gaussian_peak_value():
    a, b, mu, sigma = kernel_params()
    out = gaussian_pair_features(1.5, 0, a, b, mu, sigma).data
    assert abs(out[1] - 1 / math.sqrt(2 * math.pi)) < 1e-15
    assert abs(out[1] - 0.39894) < 1e-5


def test_gaussian_tail_vanishes():
    a, b, mu, sigma = kernel_params(mu=np.linspace(0, 20, 5), sigma=np.ones(5))
    assert np.all(gaussian_pair_features(1e6, 3, a, b, mu, sigma).data < 1e-300)


def test_gaussian_affine_composition():
    _, _, mu, sigma = kernel_params()
    lhs = gaussian_pair_features(3.0, 7, np.full(N_PAIR_TYPES, 2.0), np.full(N_PAIR_TYPES, 1.0), mu, sigma).data
    rhs = gaussian_pair_features(7.0, 7, *kernel_params()[:2], mu, sigma).data
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-15)


def test_gaussian_rejects_bad_sigma_and_negative_distance():
    a, b, mu, _ = kernel_params()
    with pytest.raises(ContractError):
        gaussian_pair_features(1.0, 0, a, b, mu, np.array([1.0, 0.0, 1.0]))
    with pytest.raises(ContractError):
        gaussian_pair_features(-0.1, 0, a, b, mu, np.ones(3))


def test_gaussian_matches_scalar_reference():
    rng = np.random.default_rng(7)
    K = 16
    a, b = rng.uniform(0.5, 2.0, N_PAIR_TYPES), rng.normal(size=N_PAIR_TYPES)
    mu, sigma = np.linspace(0, 12, K), rng.uniform(0.3, 2.0, K)
    d = rng.uniform(0, 15, 1000)
    t = rng.integers(0, N_PAIR_TYPES, 1000)
    out = gaussian_pair_features(d, t, a, b, mu, sigma).data
    for i in range(1000):
        x = a[t[i]] * d[i] + b[t[i]]
        ref = [gaussian_scalar(x, mu[k], sigma[k]) for k in range(K)]
        assert np.abs(out[i] - ref).max() < 1e-12


def test_unimol_kernel_width_equals_embedding_width():
    enc = UniMolEncoder(width=16, n_heads=4)
    assert enc["kernel_mu"].shape == (16,)
    assert np.all(enc.kernel_sigma().data > 0)


# -- unimol layer ----------------------------------------------------------------------------


def small_unimol(seed=0, ffn_ratio=2, width=8, n_heads=2):
    return UniMolEncoder(width=width, n_layers=2, n_heads=n_heads, ffn_ratio=ffn_ratio, seed=seed)


def test_layer_single_atom():
    enc = small_unimol()
    rng = np.random.default_rng(0)
    h = rng.normal(size=(1, 1, 8))
    q = rng.normal(size=(1, 2, 1, 1))
    h2, q2 = unimol_layer(enc, nx.Tensor(h), nx.Tensor(q), 0, norm=False, residual=False)
    wq, wk, wv = (enc["layer0." + w].data for w in ("wq", "wk", "wv"))
    np.testing.assert_allclose(h2.data[0, 0], h[0, 0] @ wv, atol=1e-12)
    Q, K = (h[0, 0] @ wq).reshape(2, 4), (h[0, 0] @ wk).reshape(2, 4)
    np.testing.assert_allclose(q2.data[0, :, 0, 0], q[0, :, 0, 0] + (Q * K).sum(axis=1) / math.sqrt(8), atol=1e-12)


def test_layer_with_zero_bias_is_plain_attention():
    enc = small_unimol(seed=4)
    rng = np.random.default_rng(1)
    h = rng.normal(size=(1, 5, 8))
    out, _ = unimol_layer(enc, nx.Tensor(h), nx.Tensor(np.zeros((1, 2, 5, 5))), 1, residual=False)
    y = np_layer_norm(h[0], enc["layer1.ln1_g"].data, enc["layer1.ln1_b"].data)
    ref = plain_attention(y, enc["layer1.wq"].data, enc["layer1.wk"].data, enc["layer1.wv"].data, 2)
    np.testing.assert_allclose(out.data[0], ref, atol=1e-12)


def test_layer_rejects_head_mismatch():
    enc = small_unimol()
    with pytest.raises(ContractError, match="heads"):
        unimol_layer(enc, nx.Tensor(np.zeros((1, 3, 8))), nx.Tensor(np.zeros((1, 3, 3, 3))), 0)


@pytest.mark.parametrize("seed", range(3))
def test_layer_gradients(seed):
    enc = small_unimol(seed=seed)
    rng = np.random.default_rng(seed)
    w1, w2 = rng.normal(size=(1, 4, 8)), rng.normal(size=(1, 2, 4, 4))
    names = [f"layer0.{k}" for k in ("ln1_g", "ln1_b", "wq", "wk", "wv")]
    saved = {n: enc.params[n] for n in names}

    def fn(h, q, *ps):
        enc.params.update(zip(names, ps))
        h2, q2 = unimol_layer(enc, h, q, 0)
        return nx.add(nx.sum_(nx.mul(h2, w1)), nx.sum_(nx.mul(q2, w2)))

    try:
        err = check_gradients(fn, [rng.normal(size=(1, 4, 8)), rng.normal(size=(1, 2, 4, 4))] + [saved[n].data for n in names])
    finally:
        enc.params.update(saved)
    assert err < 1e-5


# -- 3D encoders -----------------------------------------------------------------------------


@pytest.mark.parametrize("pocket", [False, True])
def test_3d_rigid_motion_invariance(pocket):
    enc = UniMolEncoder(width=16, n_heads=4, modality="protein" if pocket else "conformation")
    fn = encode_pocket if pocket else encode_conformation
    rng = np.random.default_rng(2)
    c = random_structure(rng, n_atoms=7, pocket=pocket)
    ref = fn(enc, c).data
    for _ in range(50):
        moved = c.moved(random_rotation(rng, proper=bool(rng.integers(2))), rng.uniform(-10, 10, 3))
        assert np.abs(fn(enc, moved).data - ref).max() < 1e-8


@pytest.mark.parametrize("pocket", [False, True])
def test_3d_mirror_image_is_indistinguishable(pocket):
    enc = UniMolEncoder(width=16, n_heads=4)
    fn = encode_pocket if pocket else encode_conformation
    c = random_structure(np.random.default_rng(3), n_atoms=6, pocket=pocket)
    mirrored = c.moved(np.diag([-1.0, 1.0, 1.0]))
    assert np.abs(fn(enc, mirrored).data - fn(enc, c).data).max() < 1e-8


@pytest.mark.parametrize("pocket", [False, True])
def test_3d_atom_permutation_invariance(pocket):
    enc = UniMolEncoder(width=16, n_heads=4)
    fn = encode_pocket if pocket else encode_conformation
    rng = np.random.default_rng(4)
    c = random_structure(rng, n_atoms=8, pocket=pocket)
    ref = fn(enc, c).data
    for _ in range(50):
        assert np.abs(fn(enc, c.permuted(rng.permutation(8))).data - ref).max() < 1e-9


def test_3d_geometry_changes_the_embedding():
    enc = UniMolEncoder(width=16, n_heads=4)
    c = Conformation([2, 3, 4], [[0, 0, 0], [1.2, 0, 0], [0, 1.4, 0]])
    stretched = Conformation([2, 3, 4], [[0, 0, 0], [2.4, 0, 0], [0, 1.4, 0]])
    assert np.abs(encode_conformation(enc, c).data - encode_conformation(enc, stretched).data).max() > 1e-6


def test_zero_pair_bias_equals_distance_blind_transformer():
    enc = UniMolEncoder(width=16, n_heads=4, seed=5)
    rng = np.random.default_rng(5)
    for _ in range(5):
        c = random_structure(rng, n_atoms=6)
        out = enc.forward(StructBatch.from_structures([c]), zero_pair_bias=True).data[0]
        np.testing.assert_allclose(out, distance_blind_unimol(enc, c.atom_types), atol=1e-10)
        # the same atoms at a different geometry give the same output
        other = Conformation(c.atom_types, rng.normal(size=(6, 3)))
        again = enc.forward(StructBatch.from_structures([other]), zero_pair_bias=True).data[0]
        np.testing.assert_allclose(again, out, atol=1e-12)


def test_padded_batch_matches_single_encodes():
    enc = UniMolEncoder(width=16, n_heads=4)
    rng = np.random.default_rng(6)
    structs = [random_structure(rng, n_atoms=n) for n in (2, 5, 9)]
    out = enc.forward(StructBatch.from_structures(structs)).data
    for s, row in zip(structs, out):
        np.testing.assert_allclose(row, encode_conformation(enc, s).data, atol=1e-10)


def test_pocket_and_conformation_weights_are_independent():
    a = UniMolEncoder(width=16, n_heads=4, modality="conformation")
    b = UniMolEncoder(width=16, n_heads=4, modality="protein")
    assert not np.allclose(a["layer0.wq"].data, b["layer0.wq"].data)
    c = random_structure(np.random.default_rng(0), n_atoms=4)
    assert isinstance(PocketStructure(c.atom_types, c.coords), Conformation)


def test_unimol_rejects_width_not_divisible_by_heads():
    with pytest.raises(ContractError):
        UniMolEncoder(width=10, n_heads=4)


# -- projection head -------------------------------------------------------------------------


def test_identity_head_example():
    head = ProjectionHead(8, 8, weight=np.eye(8))
    x = np.zeros(8)
    x[:2] = [3.0, 4.0]
    expected = np.zeros(8)
    expected[:2] = [0.6, 0.8]
    np.testing.assert_allclose(project(head, x).data, expected, atol=1e-15)


def test_head_absorbs_positive_scale():
    head = ProjectionHead(8, 4, seed=1)
    x = np.random.default_rng(0).normal(size=8)
    np.testing.assert_allclose(project(head, 5 * x).data, project(head, x).data, atol=1e-15)


def test_head_output_has_unit_norm():
    head = ProjectionHead(16, 8, seed=2)
    rng = np.random.default_rng(1)
    for _ in range(100):
        assert abs(np.linalg.norm(project(head, rng.normal(size=16)).data) - 1.0) < 1e-6


def test_head_errors():
    head = ProjectionHead(4, 4, seed=0)
    with pytest.raises(DegenerateInputError):
        project(head, np.zeros(4))
    with pytest.raises(DimensionError):
        project(head, np.ones(5))


# -- end-to-end gradients --------------------------------------------------------------------


def test_text_end_to_end_gradient():
    enc = TextEncoder(VOCAB, width=8, max_len=6, seed=0)
    head = ProjectionHead(8, 4, seed=0)
    batch = TextBatch.from_sequences([seq(1, 2, 3), seq(4, 5)])
    assert module_gradcheck(enc, head, lambda: enc.forward(batch)) < 1e-4


def test_graph_end_to_end_gradient():
    enc = GraphEncoder(width=8, seed=0)
    head = ProjectionHead(8, 4, seed=0)
    rng = np.random.default_rng(0)
    batch = GraphBatch.from_graphs([random_graph(rng, n_atoms=5), random_graph(rng, n_atoms=3)])
    enc.params["gin0.eps"].data = np.array([0.3])
    assert module_gradcheck(enc, head, lambda: enc.forward(batch)) < 1e-4


@pytest.mark.parametrize("modality", ["conformation", "protein"])
def test_unimol_end_to_end_gradient(modality):
    enc = UniMolEncoder(width=8, n_heads=2, n_kernels=8, modality=modality, seed=0)
    head = ProjectionHead(8, 4, seed=0)
    rng = np.random.default_rng(1)
    batch = StructBatch.from_structures([random_structure(rng, n_atoms=4, pocket=modality == "protein"),
                                         random_structure(rng, n_atoms=3, pocket=modality == "protein")])
    assert module_gradcheck(enc, head, lambda: enc.forward(batch)) < 1e-4
