import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from puredmm.warmus import (ZERO, AccumulatorPolicy, Variant, Warmus, WarmusAccumulatorState,
                            accumulate, accumulator_step, anti_approximates_zero, crelu,
                            monotone_clamp, quasi_metrics, relu, w_add, w_dual, w_leq, w_neg,
                            w_scale)

# Integers keep every sum exact, so the predicates below are checked without rounding slack.
ints = st.integers(min_value=-10**6, max_value=10**6).map(float)
warmus = st.builds(Warmus, ints, ints)
policies = st.builds(AccumulatorPolicy, st.sampled_from(list(Variant)), st.booleans())


def W(l, u):
    return Warmus(float(l), float(u))


@pytest.mark.parametrize("a,b,want", [
    (W(2, 3), W(1, 1), W(3, 4)),
    (W(3, 2), W(-3, -2), W(0, 0)),
    (W(1, 2), W(1, -1), W(2, 1)),
])
def test_add_examples(a, b, want):
    assert w_add(a, b) == want
    assert a + b == want


@pytest.mark.parametrize("a,want", [(W(3, 2), W(-3, -2)), (W(0, 0), W(0, 0)), (W(-1, 4), W(1, -4))])
def test_neg_examples(a, want):
    assert w_neg(a) == want
    assert -a == want


@pytest.mark.parametrize("c,a,want", [(2, W(1, 3), W(2, 6)), (0, W(5, -7), W(0, 0)), (-1, W(3, 2), W(-3, -2))])
def test_scale_examples(c, a, want):
    assert w_scale(c, a) == want
    assert c * a == want


@pytest.mark.parametrize("a,b,want", [
    (W(0, 0), W(1, -1), True),
    (W(0, 0), W(1, 1), False),
    (W(1, 3), W(2, 2), True),
])
def test_leq_examples(a, b, want):
    assert w_leq(a, b) is want


@pytest.mark.parametrize("a,want", [(W(3, 2), W(2, 3)), (W(0, 0), W(0, 0)), (W(1, 4), W(4, 1))])
def test_dual_examples(a, want):
    assert w_dual(a) == want


@pytest.mark.parametrize("a,want", [(W(1, -1), True), (W(0, 0), True), (W(1, 2), False)])
def test_anti_approximates_zero_examples(a, want):
    assert anti_approximates_zero(a) is want


@pytest.mark.parametrize("a,want", [(W(2, -3), W(2, -3)), (W(-1, 5), W(0, 0)), (W(3, 1), W(3, 0))])
def test_monotone_clamp_examples(a, want):
    assert monotone_clamp(a) == want


def test_scalar_helpers():
    assert [relu(3), relu(-2), relu(0)] == [3, 0, 0]
    assert crelu(3) == (3, 0) and crelu(-2) == (0, 2) and crelu(0) == (0, 0)
    assert quasi_metrics(5, 3) == (2, 0)
    assert quasi_metrics(3, 5) == (0, 2)
    assert quasi_metrics(4, 4) == (0, 0)


def test_pseudosegment_flags():
    assert W(3, 2).is_pseudosegment and not W(3, 2).is_proper
    assert W(2, 3).is_proper and not W(2, 3).is_pseudosegment
    assert W(1, 1).is_proper


@pytest.mark.parametrize("variant", list(Variant))
def test_accumulator_accepts_monotone_delta(variant):
    s = WarmusAccumulatorState(W(1, 2), AccumulatorPolicy(variant))
    assert accumulator_step(s, W(1, -1)).v == W(2, 1)


def test_accumulator_ignores_non_monotone():
    s = WarmusAccumulatorState(W(1, 2), AccumulatorPolicy(Variant.IGNORE_NON_MONOTONIC))
    assert accumulator_step(s, W(0, 3)).v == W(1, 2)


def test_accumulator_clamps():
    s = WarmusAccumulatorState(W(1, 2), AccumulatorPolicy(Variant.CLAMP_TO_MONOTONIC))
    assert accumulator_step(s, W(-1, 3)).v == W(1, 2)
    assert accumulator_step(s, W(2, 3)).v == W(3, 2)


def test_accumulator_involutes_on_non_monotone():
    pol = AccumulatorPolicy(Variant.INVOLUTE_ON_NON_MONOTONIC)
    assert accumulator_step(WarmusAccumulatorState(W(3, 1), pol), W(0, 3)).v == W(1, 3)
    # a proper interval is left alone unless the guard is switched off
    assert accumulator_step(WarmusAccumulatorState(W(1, 3), pol), W(0, 3)).v == W(1, 3)
    pol = AccumulatorPolicy(Variant.INVOLUTE_ON_NON_MONOTONIC, involute_only_if_pseudosegment=False)
    assert accumulator_step(WarmusAccumulatorState(W(1, 3), pol), W(0, 3)).v == W(3, 1)


def test_trigger_involution():
    s = WarmusAccumulatorState(W(3, 1))
    assert accumulator_step(s, W(0, 0), trigger_involution=True).v == W(1, 3)
    # guarded trigger on a proper interval falls through to the ordinary update
    s = WarmusAccumulatorState(W(1, 3))
    assert accumulator_step(s, W(1, -1), trigger_involution=True).v == W(2, 2)


def test_accumulate_stream():
    s = WarmusAccumulatorState(ZERO)
    vals = list(accumulate(s, [W(1, -1), W(0, 5), W(2, 0)]))
    assert vals == [W(1, -1), W(1, -1), W(3, -1)]


@given(warmus, warmus, warmus)
def test_group_axioms(a, b, c):
    assert w_add(a, b) == w_add(b, a)
    assert w_add(w_add(a, b), c) == w_add(a, w_add(b, c))
    assert w_add(a, ZERO) == a
    assert w_add(a, w_neg(a)) == ZERO


@given(st.integers(-1000, 1000).map(float), st.integers(-1000, 1000).map(float), warmus, warmus)
def test_scale_distributes(c, d, a, b):
    assert w_scale(c, w_add(a, b)) == w_add(w_scale(c, a), w_scale(c, b))
    assert w_scale(c + d, a) == w_add(w_scale(c, a), w_scale(d, a))
    assert w_scale(-1.0, a) == w_neg(a)


@given(warmus, warmus, warmus)
def test_leq_partial_order(a, b, c):
    assert w_leq(a, a)
    if w_leq(a, b) and w_leq(b, a):
        assert a == b
    if w_leq(a, b) and w_leq(b, c):
        assert w_leq(a, c)


@given(warmus, warmus)
def test_dual_reverses_order(a, b):
    assert w_dual(w_dual(a)) == a
    assert w_leq(a, b) == w_leq(w_dual(b), w_dual(a))


@given(warmus, warmus)
def test_monotone_summand_characterization(x, d):
    assert w_leq(x, w_add(x, d)) == anti_approximates_zero(d)
    if d.l <= d.u and w_leq(x, w_add(x, d)):
        assert d == ZERO


@given(warmus, st.lists(warmus, max_size=20))
def test_clamped_chain_nondecreasing(x, ds):
    for d in ds:
        nxt = w_add(x, monotone_clamp(d))
        assert anti_approximates_zero(monotone_clamp(d))
        assert w_leq(x, nxt)
        x = nxt


@given(ints, ints, ints)
def test_crelu_and_triangle(x, y, z):
    p, n = crelu(x)
    assert p - n == x and min(p, n) == 0
    q1, q2 = quasi_metrics(x, y)
    assert q1 + q2 == abs(x - y)
    assert quasi_metrics(x, z)[0] <= quasi_metrics(x, y)[0] + quasi_metrics(y, z)[0]


@settings(max_examples=200)
@given(warmus, policies, st.lists(st.tuples(warmus, st.booleans()), max_size=15))
def test_accumulator_monotone_except_involutions(v, policy, steps):
    s = WarmusAccumulatorState(v, policy)
    for delta, trig in steps:
        nxt = accumulator_step(s, delta, trig)
        involutive = nxt.v == w_dual(s.v) and nxt.v != s.v and not w_leq(s.v, nxt.v)
        assert w_leq(s.v, nxt.v) or involutive
        s = nxt
