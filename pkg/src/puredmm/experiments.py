"""Reconstructions of the prototype networks: weight oscillation, connectivity
wave, DFA embedding and a GRU cell assembled from generic neurons.

All demos run in lightweight mode.  Self always occupies rows 0 (``x``) and
1 (``dx``) and column 0, and row 0 is clamped to the unit vector at column 0,
so ``x`` is always a copy of the network matrix.  Row 1 then chooses which
outputs are added into the network matrix, which is how every demo here
rewrites itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from puredmm.engine import LIGHTWEIGHT, NetworkSpec, NeuronSpec, build_network, run


class BadColumns(ValueError):
    pass


class CapacityExceeded(ValueError):
    pass


def _self_neuron() -> NeuronSpec:
    return NeuronSpec("self", "self2", rows=(0, 1), cols=(0,))


def _row0(N: int) -> dict:
    e = np.zeros(N)
    e[0] = 1.0
    return {0: e}


# -- oscillation ----------------------------------------------------------------


def build_oscillation() -> NetworkSpec:
    """Self plus one constant update matrix; ``Y0[1][1]`` flips sign every step."""
    Y0 = np.array([[1.0, 0.0], [0.0, 1.0]])
    Y1 = np.array([[0.0, 0.0], [0.0, -2.0]])
    return NetworkSpec(
        mode=LIGHTWEIGHT,
        shape=(2, 2),
        neurons=[_self_neuron(), NeuronSpec("y1", "const", {"matrix": Y1}, cols=(1,))],
        self_neuron="self",
        initial_matrix=Y0,
        enforced_rows=_row0(2),
        meta={"demo": "oscillation", "watch": ["Y0[1][1]"]},
    )


# -- wave -----------------------------------------------------------------------------


def build_wave(n: int = 5, columns: list[int] | None = None) -> NetworkSpec:
    """``n`` constant update matrices that walk the single 1 of row 1 around a cycle.

    Update matrix ``k`` lives at column ``j_k`` and moves the 1 from ``j_k``
    to ``j_{k+1}`` (cyclically).  Columns default to ``j_k = k + 1``.
    """
    if n < 2:
        raise BadColumns("wave needs n >= 2")
    cols = list(columns) if columns is not None else [k + 1 for k in range(1, n + 1)]
    if len(cols) != n:
        raise BadColumns(f"expected {n} columns, got {len(cols)}")
    if len(set(cols)) != n or any(not isinstance(c, (int, np.integer)) or c <= 0 for c in cols):
        raise BadColumns("wave columns must be distinct positive integers")
    N = max(cols) + 1
    neurons = [_self_neuron()]
    for k, j in enumerate(cols):
        U = np.zeros((2, N))
        U[1, j] = -1.0
        U[1, cols[(k + 1) % n]] = 1.0
        neurons.append(NeuronSpec(f"y{j}", "const", {"matrix": U}, cols=(j,)))
    Y0 = np.zeros((2, N))
    Y0[0, 0] = 1.0
    Y0[1, cols[0]] = 1.0
    return NetworkSpec(
        mode=LIGHTWEIGHT,
        shape=(2, N),
        neurons=neurons,
        self_neuron="self",
        initial_matrix=Y0,
        enforced_rows=_row0(N),
        meta={"demo": "wave", "columns": cols, "watch": ["Y0[1]"]},
    )


def wave_positions(trace_rows: list[list[float]]) -> list[int]:
    """Column of the unique nonzero in each watched row (``-1`` if not unique)."""
    out = []
    for row in trace_rows:
        nz = [j for j, x in enumerate(row) if x != 0.0]
        out.append(nz[0] if len(nz) == 1 else -1)
    return out


# -- DFA ------------------------------------------------------------------------------


@dataclass
class DfaSpec:
    states: tuple
    alphabet: tuple
    transition: dict  # (state, symbol) -> state
    start: object

    def __post_init__(self):
        self.states, self.alphabet = tuple(self.states), tuple(self.alphabet)
        if self.start not in self.states:
            raise ValueError("start state not among states")
        for s in self.states:
            for a in self.alphabet:
                if self.transition.get((s, a)) not in self.states:
                    raise ValueError(f"transition not total at ({s!r}, {a!r})")

    @classmethod
    def random(cls, rng: np.random.Generator, max_states: int = 4, max_symbols: int = 3) -> DfaSpec:
        nq = int(rng.integers(1, max_states + 1))
        na = int(rng.integers(1, max_symbols + 1))
        states = tuple(f"q{i}" for i in range(nq))
        alphabet = tuple("abcdefgh"[:na])
        trans = {(s, a): states[int(rng.integers(nq))] for s in states for a in alphabet}
        return cls(states, alphabet, trans, states[int(rng.integers(nq))])


def dfa_simulate(d: DfaSpec, symbols) -> list:
    """Direct simulation: the start state followed by the state after each symbol."""
    out = [d.start]
    for a in symbols:
        out.append(d.transition[(out[-1], a)])
    return out


DFA_LATENCY = 3  # inport -> gate -> state selector -> Self


def dfa_layout(d: DfaSpec) -> dict:
    """Reserved rows and columns of the DFA network.

    Rows: 0, 1 Self; two per (state, symbol) gate; one per state selector.
    Columns: 0 Self; one inport per symbol (the 1-of-N symbol encoding over
    reserved neurons); one constant update matrix, one gate per
    (state, symbol); one selector per state.
    """
    nq, na = len(d.states), len(d.alphabet)
    pairs = [(s, a) for s in d.states for a in d.alphabet]
    col = 1
    port_col = {a: col + k for k, a in enumerate(d.alphabet)}
    col += na
    upd_col = {p: col + k for k, p in enumerate(pairs)}
    col += len(pairs)
    gate_col = {p: col + k for k, p in enumerate(pairs)}
    col += len(pairs)
    sel_col = {s: col + k for k, s in enumerate(d.states)}
    col += nq
    row = 2
    gate_rows = {p: (row + 2 * k, row + 2 * k + 1) for k, p in enumerate(pairs)}
    row += 2 * len(pairs)
    sel_row = {s: row + k for k, s in enumerate(d.states)}
    row += nq
    return dict(M=row, N=col, port_col=port_col, upd_col=upd_col, gate_col=gate_col,
                sel_col=sel_col, gate_rows=gate_rows, sel_row=sel_row)


def build_dfa(d: DfaSpec, shape: tuple[int, int] | None = None) -> NetworkSpec:
    """Embed ``d``: the current state is the column of the 1 in row 1 of the network matrix.

    For each (state ``s``, symbol ``a``) a constant matrix moves that 1 from
    the selector column of ``s`` to the one of ``delta(s, a)``.  A hadamard
    gate multiplies it by the indicator stream of ``a``; the selector of ``s``
    sums its gates, so only the update of the current state and the read
    symbol reaches Self.
    """
    lay = dfa_layout(d)
    M, N = lay["M"], lay["N"]
    if shape is not None:
        if shape[0] < M or shape[1] < N:
            raise CapacityExceeded(f"DFA needs at least {M}x{N} matrices, got {shape[0]}x{shape[1]}")
        M, N = shape
    si = {s: k for k, s in enumerate(d.states)}
    ai = {a: k for k, a in enumerate(d.alphabet)}
    neurons = [_self_neuron()]
    W = np.zeros((M, N))
    W[0, 0] = 1.0
    W[1, lay["sel_col"][d.start]] = 1.0
    for a in d.alphabet:
        neurons.append(NeuronSpec(f"sym{ai[a]}", "inport", cols=(lay["port_col"][a],)))
    for (s, a), (ra, rb) in lay["gate_rows"].items():
        U = np.zeros((M, N))
        U[1, lay["sel_col"][s]] -= 1.0
        U[1, lay["sel_col"][d.transition[(s, a)]]] += 1.0
        tag = f"{si[s]}_{ai[a]}"
        neurons.append(NeuronSpec(f"u{tag}", "const", {"matrix": U}, cols=(lay["upd_col"][(s, a)],)))
        neurons.append(NeuronSpec(f"g{tag}", "hadamard", rows=(ra, rb), cols=(lay["gate_col"][(s, a)],)))
        W[ra, lay["port_col"][a]] = 1.0
        W[rb, lay["upd_col"][(s, a)]] = 1.0
    for s in d.states:
        r = lay["sel_row"][s]
        neurons.append(NeuronSpec(f"sel{si[s]}", "identity", rows=(r,), cols=(lay["sel_col"][s],)))
        for a in d.alphabet:
            W[r, lay["gate_col"][(s, a)]] = 1.0
    return NetworkSpec(
        mode=LIGHTWEIGHT,
        shape=(M, N),
        neurons=neurons,
        self_neuron="self",
        initial_matrix=W,
        enforced_rows=_row0(N),
        meta={
            "demo": "dfa",
            "states": list(d.states),
            "alphabet": list(d.alphabet),
            "state_columns": {str(s): lay["sel_col"][s] for s in d.states},
            "symbol_ports": {str(a): f"sym{ai[a]}" for a in d.alphabet},
            "latency": DFA_LATENCY,
            "watch": ["Y0[1]"],
        },
    )


def dfa_inputs(spec: NetworkSpec, symbols) -> dict:
    """Inport sequences: the port of the read symbol emits all ones, the others zero."""
    M, N = spec.shape
    ports = spec.meta["symbol_ports"]
    seqs = {name: [] for name in ports.values()}
    for a in symbols:
        for sym, name in ports.items():
            seqs[name].append(np.ones((M, N)) if sym == str(a) else np.zeros((M, N)))
    return seqs


def decode_dfa_state(spec: NetworkSpec, row) -> object:
    by_col = {c: s for s, c in spec.meta["state_columns"].items()}
    nz = [j for j, x in enumerate(row) if x != 0.0]
    if len(nz) != 1 or row[nz[0]] != 1.0 or nz[0] not in by_col:
        raise ValueError(f"row 1 does not encode a state: {list(row)}")
    return by_col[nz[0]]


def run_dfa(spec: NetworkSpec, symbols) -> list:
    """State sequence (start state first) decoded from the running network."""
    symbols = list(symbols)
    spec = NetworkSpec(**{**spec.__dict__, "inputs": dfa_inputs(spec, symbols)})
    names = {str(s): s for s in spec.meta["states"]}
    lat = spec.meta["latency"]
    trace = run(build_network(spec), len(symbols) + lat, ["Y0[1]"])
    rows = trace.values("Y0[1]")[lat - 1:]
    return [names[decode_dfa_state(spec, r)] for r in rows]


# -- GRU ------------------------------------------------------------------------------


@dataclass
class GruParams:
    w_z: float = 0.0
    u_z: float = 0.0
    b_z: float = 0.0
    w_r: float = 0.0
    u_r: float = 0.0
    b_r: float = 0.0
    w_h: float = 0.0
    u_h: float = 0.0
    b_h: float = 0.0
    h0: float = 0.0

    @classmethod
    def random(cls, rng: np.random.Generator, scale: float = 1.5) -> GruParams:
        return cls(*(float(x) for x in rng.uniform(-scale, scale, size=10)))


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


def gru_reference(p: GruParams, xs) -> list[float]:
    h, out = p.h0, []
    for x in xs:
        z = _sigmoid(p.w_z * x + p.u_z * h + p.b_z)
        r = _sigmoid(p.w_r * x + p.u_r * h + p.b_r)
        h_cand = math.tanh(p.w_h * x + p.u_h * (r * h) + p.b_h)
        h = (1.0 - z) * h + z * h_cand
        out.append(h)
    return out


GRU_PERIOD = 5

# (name, type, input count); column order follows this list after Self.
_GRU_NEURONS = [
    ("one", "const", 0), ("x", "inport", 0),
    ("z", "sigmoid", 1), ("r", "sigmoid", 1), ("h1", "identity", 1), ("x1", "identity", 1),
    ("rh", "hadamard", 2), ("z2", "identity", 1), ("h2", "identity", 1), ("x2", "identity", 1),
    ("hc", "tanh", 1), ("z3", "identity", 1), ("h3", "identity", 1),
    ("g", "hadamard", 2), ("h4", "identity", 1),
    ("h", "identity", 1),
]


def build_gru(p: GruParams, xs=()) -> NetworkSpec:
    """A scalar GRU cell as a fixed-topology DMM of sigmoid, tanh, identity and hadamard neurons.

    Scalars ride as constant matrices.  The cell is a 5-stage pipeline::

        t+1  z, r = sigmoid(...)        copies of h, x
        t+2  rh = r .* h                copies of z, h, x
        t+3  hc = tanh(w_h x + u_h rh + b_h)   copies of z, h
        t+4  g = z .* (hc - h)          copy of h
        t+5  h = h + g

    so ``h_t`` is emitted at time ``1 + 5 t`` and ``x_t`` is fed at time
    ``1 + 5 (t - 1)``.  Weights are 0/1 topology except the nine parameters.
    """
    cols = {"self": 0}
    rows = {}
    r = 2
    neurons = [_self_neuron()]
    for c, (name, _typ, m) in enumerate(_GRU_NEURONS, start=1):
        cols[name] = c
        rows[name] = tuple(range(r, r + m))
        r += m
    M, N = r, len(cols)
    one = np.ones((M, N))
    seq = []
    for x in xs:
        seq.append(float(x) * one)
        seq.extend([np.zeros((M, N))] * (GRU_PERIOD - 1))
    for name, typ, _m in _GRU_NEURONS:
        params = {"matrix": one} if name == "one" else {}
        if name == "x":
            params = {"sequence": seq}
        neurons.append(NeuronSpec(name, typ, params, rows=rows[name], cols=(cols[name],)))

    W = np.zeros((M, N))
    W[0, 0] = 1.0

    def wire(dst: str, src: str, w: float = 1.0, k: int = 0):
        W[rows[dst][k], cols[src]] += w

    wire("z", "x", p.w_z), wire("z", "h", p.u_z), wire("z", "one", p.b_z)
    wire("r", "x", p.w_r), wire("r", "h", p.u_r), wire("r", "one", p.b_r)
    wire("h1", "h"), wire("x1", "x")
    wire("rh", "r", k=0), wire("rh", "h1", k=1)
    wire("z2", "z"), wire("h2", "h1"), wire("x2", "x1")
    wire("hc", "x2", p.w_h), wire("hc", "rh", p.u_h), wire("hc", "one", p.b_h)
    wire("z3", "z2"), wire("h3", "h2")
    wire("g", "z3", k=0), wire("g", "hc", k=1), wire("g", "h3", -1.0, k=1)
    wire("h4", "h3")
    wire("h", "h4"), wire("h", "g")

    h0 = p.h0 * one
    return NetworkSpec(
        mode=LIGHTWEIGHT,
        shape=(M, N),
        neurons=neurons,
        self_neuron="self",
        initial_matrix=W,
        # h4 starts out holding h0 so that h = h0 at t = 1
        initial_outputs={cols["h4"]: h0},
        steps=1 + GRU_PERIOD * len(xs),
        meta={"demo": "gru", "h_column": cols["h"], "period": GRU_PERIOD,
              "watch": [f"out:{cols['h']}"]},
    )


def gru_hidden_from_trace(spec: NetworkSpec, trace_values: list) -> list[float]:
    """Pick ``h_t`` (entry [0][0] of the watched output) at times ``1 + 5 t``."""
    per = spec.meta["period"]
    # record k holds time k + 1
    return [float(trace_values[per * t][0][0]) for t in range(1, (len(trace_values) - 1) // per + 1)]


def run_gru(p: GruParams, xs) -> list[float]:
    spec = build_gru(p, xs)
    key = f"out:{spec.meta['h_column']}"
    trace = run(build_network(spec), spec.steps, [key])
    return gru_hidden_from_trace(spec, trace.values(key))


# -- random networks --------------------------------------------------------------------

_RANDOM_TYPES = ("const", "identity", "acc2", "hadamard", "tanh", "relu", "inport")
_BOUNDED = ("const", "tanh", "inport")
_WEIGHTS = (-1.0, -0.5, -0.25, 0.25, 0.5, 1.0)


def random_network(rng: np.random.Generator, n_neurons: int = 6, density: float = 0.4) -> NetworkSpec:
    """A random lightweight network over the built-in types.

    Self sits at rows 0/1 and column 0 with row 0 clamped to the unit vector,
    so the network is valid in both Self modes.  Neuron ``k`` only reads the
    outputs of neurons before it, and Self only adds bounded outputs.  Every
    type used maps zero to zero and the constant and input matrices respect
    the same pattern, so self-modification never creates a cycle and the
    trace stays finite.  Weights are small dyadic numbers.
    """
    from puredmm.neurons import default_registry

    reg = default_registry()
    picks = [_RANDOM_TYPES[int(i)] for i in rng.integers(len(_RANDOM_TYPES), size=n_neurons)]
    M = 2 + sum(reg.arity(t)[0] for t in picks)
    N = 1 + n_neurons
    shape = (M, N)

    allowed = np.zeros(shape, dtype=bool)
    neurons = [_self_neuron()]
    row = 2
    for k, t in enumerate(picks):
        n_in = reg.arity(t)[0]
        col = k + 1
        allowed[row:row + n_in, 1:col] = True
        allowed[1, col] = t in _BOUNDED  # Self only adds outputs of size <= 1
        neurons.append(NeuronSpec(f"n{k}_{t}", t, rows=tuple(range(row, row + n_in)), cols=(col,)))
        row += n_in

    def mat():
        return np.where(allowed, rng.uniform(-1.0, 1.0, size=shape).round(3), 0.0)

    inputs = {}
    for ns in neurons[1:]:
        if ns.type == "const":
            ns.params["matrix"] = mat()
        elif ns.type == "inport":
            inputs[ns.name] = [mat() for _ in range(int(rng.integers(1, 8)))]
    W = np.zeros(shape)
    pick = allowed & (rng.random(shape) < density)
    W[pick] = rng.choice(_WEIGHTS, size=int(pick.sum()))
    W[1] *= 0.25  # keep the self-modification gentle
    W[0, 0] = 1.0
    return NetworkSpec(
        mode=LIGHTWEIGHT,
        shape=shape,
        neurons=neurons,
        self_neuron="self",
        initial_matrix=W,
        enforced_rows=_row0(N),
        inputs=inputs,
        meta={"demo": "random", "watch": ["Y0"]},
    )


# -- operator space ---------------------------------------------------------------------


def operator_space_dims(M: int, N: int) -> tuple[int, int]:
    """Dimension of all linear maps outputs -> inputs versus the ``M x N`` ones used."""
    if M < 1 or N < 1:
        raise ValueError("M and N must be positive")
    return M**3 * N**3, M * N
