"""Built-in neuron types.

Every transform works on both stream representations: numpy arrays
(lightweight mode) and :class:`~puredmm.fd_matrix.FDMatrix` (countable mode).

Catalog names: ``identity``, ``const``, ``acc2``, ``self2``, ``hadamard``,
``relu``, ``sigmoid``, ``tanh``, ``update4``, ``subsel_overall``,
``subsel_internal``, ``inport``.
"""
from __future__ import annotations

import math
from functools import partial

import numpy as np
from scipy.special import expit

from puredmm import fd_matrix as fd
from puredmm.engine import NeuronType, TypeRegistry
from puredmm.fd_matrix import NotAMask, NotLifted

OVERALL, INTERNAL = "overall", "internal"


def _is_fd(m) -> bool:
    return isinstance(m, fd.FDMatrix)


def identity_step(x):
    return x


def constant_step(K):
    return K


def accumulator_step_matrix(x, dx):
    return x + dx


def hadamard_step(a, b):
    if _is_fd(a):
        return fd.hadamard(a, b)
    return a * b


def _relu_scalar(x: float) -> float:
    return x if x > 0 else 0.0


POINTWISE = {
    "relu": (lambda a: np.maximum(a, 0.0), _relu_scalar),
    "sigmoid": (expit, lambda x: float(expit(x))),
    "tanh": (np.tanh, math.tanh),
}


def pointwise_step(f: str, x):
    dense_f, scalar_f = POINTWISE[f]
    if _is_fd(x):
        return fd.fd_map(scalar_f, x)
    return dense_f(x)


def _row_vector(alpha, what: str):
    """``alpha`` from ``lift_row(alpha)``; every column must be constant."""
    if _is_fd(alpha):
        if not fd.is_row_lift(alpha):
            raise NotLifted(f"{what} is not a lifted row")
        return fd.extract_row(alpha, fd.DEFAULT)
    if not np.all(alpha == alpha[:1, :]):
        raise NotLifted(f"{what} is not a lifted row")
    return alpha[0]


def _col_vector(beta, what: str):
    """``beta`` from ``lift_col(beta)``; every row must be constant."""
    if _is_fd(beta):
        if not fd.is_col_lift(beta):
            raise NotLifted(f"{what} is not a lifted column")
        return fd.extract_col(beta, fd.DEFAULT)
    if not np.all(beta == beta[:, :1]):
        raise NotLifted(f"{what} is not a lifted column")
    return beta[:, 0]


def update_neuron_step(alpha, beta, gamma, A):
    """Delta ``(gamma->) .* (^alpha) .* ^(beta^T A)`` for the standard matrix update.

    Fed into Self's ``dx`` it realizes ``a_ij += gamma_i alpha_j sum_k beta_k a_kj``.
    """
    a = _row_vector(alpha, "alpha")
    b = _col_vector(beta, "beta")
    g = _col_vector(gamma, "gamma")
    if _is_fd(A):
        return fd.update_delta(A, a, b, g)
    return g[:, None] * (a[None, :] * (b @ A)[None, :])


def subgraph_mask_step(variant: str, alpha, beta, A):
    a = _row_vector(alpha, "alpha")
    b = _col_vector(beta, "beta")
    if _is_fd(A):
        if variant == OVERALL:
            return fd.subgraph_overall(A, a, b)
        return fd.subgraph_internal(A, a, b)
    if not (np.isin(a, (0.0, 1.0)).all() and np.isin(b, (0.0, 1.0)).all()):
        raise NotAMask("subgraph masks must be 0/1 valued")
    if variant == OVERALL:
        return np.maximum(a[None, :], b[:, None]) * A
    return a[None, :] * b[:, None] * A


def input_port_step(sequence, t: int, zero):
    """Element ``t`` (1-based) of an externally supplied sequence, zero once exhausted."""
    if 1 <= t <= len(sequence):
        return sequence[t - 1]
    return zero


# -- catalog ------------------------------------------------------------------


def _stateless(fn):
    def transform(inputs, state, params, ctx):
        return [fn(*inputs)], state
    return transform


def _const_transform(inputs, state, params, ctx):
    return [constant_step(params.get("matrix", ctx.zero))], state


def _const_initial(params, zero):
    return [params.get("matrix", zero)]


def _inport_transform(inputs, state, params, ctx):
    return [input_port_step(params.get("sequence", ()), ctx.t, ctx.zero)], state


def catalog() -> list[NeuronType]:
    types = [
        NeuronType("identity", 1, 1, _stateless(identity_step)),
        NeuronType("const", 0, 1, _const_transform, _const_initial),
        NeuronType("acc2", 2, 1, _stateless(accumulator_step_matrix)),
        NeuronType("self2", 2, 1, _stateless(accumulator_step_matrix)),
        NeuronType("hadamard", 2, 1, _stateless(hadamard_step)),
        NeuronType("update4", 4, 1, _stateless(update_neuron_step)),
        NeuronType("subsel_overall", 3, 1, _stateless(partial(subgraph_mask_step, OVERALL))),
        NeuronType("subsel_internal", 3, 1, _stateless(partial(subgraph_mask_step, INTERNAL))),
        NeuronType("inport", 0, 1, _inport_transform),
    ]
    types += [NeuronType(f, 1, 1, _stateless(partial(pointwise_step, f))) for f in POINTWISE]
    return types


def default_registry() -> TypeRegistry:
    return TypeRegistry(catalog())


def one_of_n(k: int, n: int, shape: tuple[int, int], cell_of=None) -> np.ndarray:
    """Symbol ``k`` of ``n`` as a matrix with a single 1 in its reserved cell.

    By default symbol ``k`` owns cell ``(0, k)``; ``cell_of`` overrides the layout.
    """
    if not 0 <= k < n:
        raise ValueError(f"symbol {k} outside alphabet of size {n}")
    m = np.zeros(shape)
    m[cell_of(k) if cell_of else (0, k)] = 1.0
    return m
