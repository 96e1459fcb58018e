"""Warmus numbers: directed intervals closed under addition and scaling.

A Warmus number ``[l, u]`` carries two constraints, ``x >= l`` and
``x <= u``.  Nothing forces ``l <= u``; when ``l > u`` the number is a
pseudosegment.  With componentwise addition the set forms an abelian group
and a 2D real vector space.

The information order ``a <= b`` holds when ``b`` is at least as constrained
as ``a``: ``a.l <= b.l`` and ``b.u <= a.u``.  Swapping endpoints is an
order-reversing involution.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Warmus:
    l: float
    u: float

    def __add__(self, other: Warmus) -> Warmus:
        return w_add(self, other)

    def __neg__(self) -> Warmus:
        return w_neg(self)

    def __sub__(self, other: Warmus) -> Warmus:
        return w_add(self, w_neg(other))

    def __rmul__(self, c: float) -> Warmus:
        return w_scale(c, self)

    @property
    def is_pseudosegment(self) -> bool:
        return self.l > self.u

    @property
    def is_proper(self) -> bool:
        return self.l <= self.u


ZERO = Warmus(0.0, 0.0)


def w_add(a: Warmus, b: Warmus) -> Warmus:
    return Warmus(a.l + b.l, a.u + b.u)


def w_neg(a: Warmus) -> Warmus:
    return Warmus(-a.l, -a.u)


def w_scale(c: float, a: Warmus) -> Warmus:
    """Vector-space scalar action; negative ``c`` does not swap endpoints."""
    return Warmus(c * a.l, c * a.u)


def w_leq(a: Warmus, b: Warmus) -> bool:
    """Information order: ``b`` refines ``a``."""
    return a.l <= b.l and b.u <= a.u


def w_dual(a: Warmus) -> Warmus:
    return Warmus(a.u, a.l)


def anti_approximates_zero(a: Warmus) -> bool:
    """True iff ``[0, 0] <= a``, i.e. ``a`` is an admissible monotone increment."""
    return w_leq(ZERO, a)


def relu(x: float) -> float:
    return x if x > 0 else 0.0


def crelu(x: float) -> tuple[float, float]:
    return relu(x), relu(-x)


def quasi_metrics(x: float, y: float) -> tuple[float, float]:
    """The upper and lower quasi-metrics on the reals, ``(relu(x-y), relu(y-x))``."""
    return relu(x - y), relu(y - x)


def monotone_clamp(a: Warmus) -> Warmus:
    # The inner and outer negations around relu on the upper endpoint are the
    # two applications of the anti-monotone involution; they cancel in order.
    return Warmus(relu(a.l), -relu(-a.u))


class Variant(enum.Enum):
    IGNORE_NON_MONOTONIC = "ignore"
    CLAMP_TO_MONOTONIC = "clamp"
    INVOLUTE_ON_NON_MONOTONIC = "involute"


@dataclass(frozen=True)
class AccumulatorPolicy:
    variant: Variant = Variant.IGNORE_NON_MONOTONIC
    involute_only_if_pseudosegment: bool = True


@dataclass(frozen=True)
class WarmusAccumulatorState:
    v: Warmus
    policy: AccumulatorPolicy = AccumulatorPolicy()


def _involute(v: Warmus, policy: AccumulatorPolicy) -> Warmus:
    if policy.involute_only_if_pseudosegment and not v.is_pseudosegment:
        return v
    return w_dual(v)


def accumulator_step(
    state: WarmusAccumulatorState, delta: Warmus, trigger_involution: bool = False
) -> WarmusAccumulatorState:
    """One up-movement of a Warmus accumulator with separate ``v`` and ``dv`` inputs.

    An involution trigger takes precedence over ``delta`` for the step.
    Otherwise increments anti-approximating zero are added as is, and the
    rest are handled according to ``state.policy``.
    """
    v, policy = state.v, state.policy
    if trigger_involution and (not policy.involute_only_if_pseudosegment or v.is_pseudosegment):
        return replace(state, v=w_dual(v))
    if anti_approximates_zero(delta):
        return replace(state, v=w_add(v, delta))
    if policy.variant is Variant.IGNORE_NON_MONOTONIC:
        return state
    if policy.variant is Variant.CLAMP_TO_MONOTONIC:
        return replace(state, v=w_add(v, monotone_clamp(delta)))
    return replace(state, v=_involute(v, policy))


def accumulate(state, deltas, triggers=None):
    """Run the accumulator over a stream of increments, yielding each new value."""
    if triggers is None:
        triggers = [False] * len(deltas)
    for delta, trig in zip(deltas, triggers):
        state = accumulator_step(state, delta, trig)
        yield state.v
