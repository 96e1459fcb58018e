import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fdgen
from netgen import SELF_DX, SELF_OUT, countable_spec
from puredmm import fd_matrix as fd
from puredmm import index_language as il
from puredmm import neurons as nl
from puredmm.engine import NeuronSpec, build_network, run, states
from puredmm.fd_matrix import NotAMask, NotLifted, lift_col, lift_row, lift_scalar

seeds = st.integers(0, 2**32 - 1)
eq = fd.semantically_equal


def test_identity_and_const():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(3, 4))
    assert nl.identity_step(X) is X
    assert eq(nl.identity_step(lift_scalar(7)), lift_scalar(7))
    Y1 = np.array([[0.0, 0.0], [0.0, -2.0]])
    assert nl.constant_step(Y1) is Y1


def test_const_neuron_is_constant_over_time():
    k = il.output_key("const", 1, "k")
    K = fd.from_triplets([(il.input_key("identity", 1, "a"), k, 2.0)])
    spec = countable_spec([NeuronSpec("k", "const", {"matrix": K})],
                          [(il.input_key("identity", 1, "a"), k, 1.0)])
    outs = [s.outputs[k] for s in states(build_network(spec), 6)]
    assert outs[0] == outs[5] and eq(outs[0], K)
    zero = NeuronSpec("z", "const")
    s = build_network(countable_spec([zero]))
    assert eq(s.outputs[il.output_key("const", 1, "z")], fd.ZERO)


def test_accumulator():
    Y0, Y1 = np.eye(2), np.array([[0.0, 0.0], [0.0, -2.0]])
    assert (nl.accumulator_step_matrix(Y0, Y1) == np.array([[1, 0], [0, -1]])).all()
    assert (nl.accumulator_step_matrix(Y0, np.zeros((2, 2))) == Y0).all()
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=(4, 4)), rng.normal(size=(4, 4))
    assert (nl.accumulator_step_matrix(a, b) == a + b).all()


def test_hadamard_gate():
    rng = np.random.default_rng(2)
    B = fdgen.matrix(rng)
    assert eq(nl.hadamard_step(lift_scalar(0), B), fd.ZERO)
    assert eq(nl.hadamard_step(lift_scalar(1), B), B)
    b = rng.normal(size=(3, 5))
    assert (nl.hadamard_step(np.full((3, 5), 0.5), b) == b / 2).all()


@settings(max_examples=50)
@given(seeds, st.sampled_from([-2.0, 0.0, 0.5, 3.0]))
def test_hadamard_gate_scales(seed, g):
    B = fdgen.matrix(np.random.default_rng(seed))
    assert np.array_equal(fdgen.dense(nl.hadamard_step(lift_scalar(g), B)), g * fdgen.dense(B))


def test_pointwise():
    assert eq(nl.pointwise_step("relu", lift_scalar(-2)), lift_scalar(0))
    assert eq(nl.pointwise_step("sigmoid", lift_scalar(0)), lift_scalar(0.5))
    rng = np.random.default_rng(3)
    x = rng.normal(size=(4, 5))
    want = np.vectorize(math.tanh)(x)
    assert np.allclose(nl.pointwise_step("tanh", x), want, rtol=0, atol=1e-15)
    assert (nl.pointwise_step("relu", x) == np.maximum(x, 0)).all()
    A = fdgen.matrix(rng)
    got = fdgen.dense(nl.pointwise_step("sigmoid", A))
    assert np.allclose(got, 1 / (1 + np.exp(-fdgen.dense(A))), rtol=0, atol=1e-15)


def _dense_update_oracle(alpha, beta, gamma, A):
    out = np.zeros_like(A)
    M, N = A.shape
    for i in range(M):
        for j in range(N):
            out[i, j] = gamma[i] * alpha[j] * sum(beta[k] * A[k, j] for k in range(M))
    return out


def test_update_neuron_dense():
    rng = np.random.default_rng(4)
    M, N = 5, 6
    A = rng.normal(size=(M, N))
    alpha, beta, gamma = rng.normal(size=N), rng.normal(size=M), rng.normal(size=M)
    lift_r = np.tile(alpha, (M, 1))
    lift_b, lift_g = np.tile(beta[:, None], (1, N)), np.tile(gamma[:, None], (1, N))
    got = nl.update_neuron_step(lift_r, lift_b, lift_g, A)
    assert np.allclose(got, _dense_update_oracle(alpha, beta, gamma, A), rtol=0, atol=1e-12)
    assert not nl.update_neuron_step(lift_r, lift_b, np.zeros((M, N)), A).any()
    with pytest.raises(NotLifted):
        nl.update_neuron_step(A, lift_b, lift_g, A)
    with pytest.raises(NotLifted):
        nl.update_neuron_step(lift_r, A, lift_g, A)


def test_update_neuron_fd_errors():
    A = fd.from_triplets([(0, 0, 1.0)])
    with pytest.raises(NotLifted):
        nl.update_neuron_step(lift_col(fd.FDVector(0, {1: 1})), lift_col(fd.ONES), lift_col(fd.ONES), A)
    with pytest.raises(fd.InfiniteSupport):
        nl.update_neuron_step(lift_row(fd.ONES), lift_col(fd.ONES), lift_col(fd.FDVector(0, {0: 1})), A)


def test_subgraph_neuron_dense():
    rng = np.random.default_rng(5)
    A = rng.normal(size=(6, 6))
    a, b = rng.integers(0, 2, 6).astype(float), rng.integers(0, 2, 6).astype(float)
    la, lb = np.tile(a, (6, 1)), np.tile(b[:, None], (1, 6))
    over = nl.subgraph_mask_step(nl.OVERALL, la, lb, A)
    inner = nl.subgraph_mask_step(nl.INTERNAL, la, lb, A)
    for i in range(6):
        for j in range(6):
            assert over[i, j] == (A[i, j] if b[i] == 1 or a[j] == 1 else 0)
            assert inner[i, j] == (A[i, j] if b[i] == 1 and a[j] == 1 else 0)
    ones, zeros = np.ones((6, 6)), np.zeros((6, 6))
    assert (nl.subgraph_mask_step(nl.OVERALL, ones, ones, A) == A).all()
    assert not nl.subgraph_mask_step(nl.INTERNAL, zeros, zeros, A).any()
    with pytest.raises(NotAMask):
        nl.subgraph_mask_step(nl.OVERALL, ones * 0.5, ones, A)


def test_input_port():
    A1, A2 = np.ones((2, 2)), 2 * np.ones((2, 2))
    z = np.zeros((2, 2))
    assert nl.input_port_step([A1, A2], 1, z) is A1
    assert nl.input_port_step([A1, A2], 2, z) is A2
    assert nl.input_port_step([A1, A2], 3, z) is z


def test_one_of_n():
    m = nl.one_of_n(2, 3, (2, 4))
    assert m[0, 2] == 1 and m.sum() == 1
    m = nl.one_of_n(1, 3, (3, 3), cell_of=lambda k: (2, k))
    assert m[2, 1] == 1 and m.sum() == 1
    with pytest.raises(ValueError):
        nl.one_of_n(3, 3, (2, 4))


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_update_neuron_with_self_equals_matrix_update(seed):
    rng = np.random.default_rng(seed)
    rows = [il.input_key("identity", 1, f"r{k}") for k in range(4)]
    cols = [il.output_key("const", 1, f"c{k}") for k in range(4)]

    def fdvec(keys, p_default):
        d = float(rng.choice([0.0, 1.0, -0.5])) if rng.random() < p_default else 0.0
        return fd.FDVector(d, {k: float(rng.normal()) for k in keys if rng.random() < 0.6})

    alpha, beta, gamma = fdvec(cols, 0.5), fdvec(rows, 0.0), fdvec(rows, 0.0)
    upd = [il.input_key("update4", k, "u") for k in range(1, 5)]
    lifts = {"al": lift_row(alpha), "be": lift_col(beta), "ga": lift_col(gamma)}
    neurons = [NeuronSpec(n, "const", {"matrix": m}) for n, m in lifts.items()]
    neurons.append(NeuronSpec("u", "update4"))
    wiring = [(upd[0], il.output_key("const", 1, "al"), 1.0),
              (upd[1], il.output_key("const", 1, "be"), 1.0),
              (upd[2], il.output_key("const", 1, "ga"), 1.0),
              (upd[3], SELF_OUT, 1.0),
              (SELF_DX, il.output_key("update4", 1, "u"), 1.0)]
    extra = [(r, c, float(rng.normal())) for r in rows for c in cols if rng.random() < 0.4]
    spec = countable_spec(neurons, wiring + extra, enforce_x=False)
    s0 = build_network(spec)
    # the delta computed from W0 reaches Self one step later; W1 == W0
    s2 = states(s0, 2)[-1]
    want = fd.matrix_update(s0.W, alpha, beta, gamma)
    assert fd.semantically_equal(s2.W, want, tol=1e-12)


def test_inport_drives_network():
    k = il.output_key("inport", 1, "in")
    row = il.input_key("identity", 1, "a")
    seq = [fd.from_triplets([(row, k, float(t))]) for t in (1, 2, 3)]
    spec = countable_spec([NeuronSpec("in", "inport")], [(row, k, 1.0)], inputs={"in": seq})
    tr = run(build_network(spec), 5, [f"out:{il.output_key('identity', 1, 'a')}"])
    got = [fd.FDMatrix.from_literal(v) for v in tr.values(f"out:{il.output_key('identity', 1, 'a')}")]
    # identity sees the port's previous output; the port's initial output is zero
    assert [fd.fd_value(m, row, k) for m in got] == [0.0, 1.0, 2.0, 3.0, 0.0]
