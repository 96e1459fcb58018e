"""Two-stroke executor for self-modifying dataflow matrix machines.

Every stream carries matrices of one shape: dense ``M x N`` arrays in
lightweight mode, :class:`~puredmm.fd_matrix.FDMatrix` values indexed by
structured names in countable mode.  Rows of the network matrix ``W`` are
neuron inputs and columns are neuron outputs.

One step is a down movement (every active input row receives
``sum_j W[i, j] * outputs[j]``) followed by an up movement (every active
neuron maps its inputs to new outputs).  The designated ``Self`` neuron has
two inputs, ``x`` and ``dx``, and emits ``x + dx``; its latest output is
``W``.  In ``"literal"`` mode ``x`` is computed by the down movement like any
other input.  In ``"optimized"`` mode ``x`` is taken to be ``W`` directly,
which is valid as long as Self's ``x`` row of ``W`` is the unit vector at
Self's own output.
"""
from __future__ import annotations

import enum
import logging
import re
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from puredmm import fd_matrix as fd
from puredmm import index_language as il

log = logging.getLogger(__name__)

LIGHTWEIGHT, COUNTABLE = "lightweight", "countable"
RESET, HALT = "reset", "halt"
LITERAL, OPTIMIZED = "literal", "optimized"


class EngineError(Exception):
    pass


class DuplicateType(EngineError):
    pass


class ValidationError(EngineError, ValueError):
    pass


class PhaseError(EngineError):
    pass


class Overflow(EngineError):
    pass


class ConstraintViolated(EngineError):
    pass


# ---------------------------------------------------------------------------
# neuron types and registry


@dataclass(frozen=True)
class StepContext:
    t: int  # time stamp of the outputs being produced
    zero: Any
    mode: str


@dataclass(frozen=True)
class NeuronType:
    """A neuron type: arities plus a deterministic state-machine transform.

    ``transform(inputs, state, params, ctx) -> (outputs, new_state)`` receives
    the latest ``input_arity`` input matrices.  Accumulating history is only
    possible through ``state``, which keeps the prefix condition automatic.
    """

    name: str
    input_arity: int
    output_arity: int
    transform: Callable
    initial_outputs: Callable | None = None  # (params, zero) -> list of matrices
    initial_state: Callable | None = None  # params -> state

    def __post_init__(self):
        if self.input_arity < 0 or self.output_arity < 1:
            raise ValueError(f"{self.name}: need M >= 0 and N >= 1")


class TypeRegistry(Mapping):
    def __init__(self, types: Iterable[NeuronType] = ()):
        self._types: dict[str, NeuronType] = {}
        for t in types:
            self.register(t)

    def register(self, t: NeuronType) -> TypeRegistry:
        if t.name in self._types:
            raise DuplicateType(t.name)
        self._types[t.name] = t
        return self

    def arity(self, name: str) -> tuple[int, int]:
        t = self[name]
        return t.input_arity, t.output_arity

    def __getitem__(self, name: str) -> NeuronType:
        try:
            return self._types[name]
        except KeyError:
            raise il.UnknownType(name) from None

    def __iter__(self):
        return iter(self._types)

    def __len__(self) -> int:
        return len(self._types)


def register_type(t: NeuronType, registry: TypeRegistry) -> TypeRegistry:
    return registry.register(t)


def _default_registry() -> TypeRegistry:
    from puredmm.neurons import default_registry

    return default_registry()


# ---------------------------------------------------------------------------
# network description


@dataclass
class NeuronSpec:
    name: str
    type: str
    params: dict = field(default_factory=dict)
    rows: tuple = ()  # lightweight only; countable rows derive from the name
    cols: tuple = ()


@dataclass
class NetworkSpec:
    mode: str
    neurons: list[NeuronSpec]
    self_neuron: str | None
    initial_matrix: Any
    shape: tuple[int, int] | None = None
    initial_outputs: dict = field(default_factory=dict)
    enforced_rows: dict = field(default_factory=dict)
    overflow_policy: str = RESET
    inputs: dict = field(default_factory=dict)
    steps: int | None = None
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Neuron:
    id: str
    name: str
    type: NeuronType
    params: dict
    rows: tuple
    cols: tuple


class Network:
    """A validated, compiled :class:`NetworkSpec`."""

    def __init__(self, spec: NetworkSpec, registry: TypeRegistry | None = None,
                 self_mode: str = LITERAL):
        self.spec = spec
        self.registry = registry if registry is not None else _default_registry()
        if self_mode not in (LITERAL, OPTIMIZED):
            raise ValueError(f"unknown self mode {self_mode!r}")
        self.self_mode = self_mode
        self.mode = spec.mode
        self.neurons: dict[str, Neuron] = {}
        self.row_owner: dict = {}
        self.col_owner: dict = {}
        self._validate_and_compile()

    # -- construction -----------------------------------------------------

    def _validate_and_compile(self):
        spec = self.spec
        if spec.mode == LIGHTWEIGHT:
            if spec.shape is None or len(spec.shape) != 2 or min(spec.shape) < 1:
                raise ValidationError("lightweight mode needs a positive shape (M, N)")
            self.M, self.N = int(spec.shape[0]), int(spec.shape[1])
            self.zero = _readonly(np.zeros((self.M, self.N)))
        elif spec.mode == COUNTABLE:
            self.zero = fd.ZERO
        else:
            raise ValidationError(f"unknown mode {spec.mode!r}")
        if spec.overflow_policy not in (RESET, HALT):
            raise ValidationError(f"unknown overflow policy {spec.overflow_policy!r}")

        for t in spec.meta.get("types", ()):
            if t not in self.registry:
                raise ValidationError(f"unknown neuron type {t!r} in declared types")
        names = set()
        for ns in spec.neurons:
            if ns.name in names:
                raise ValidationError(f"duplicate neuron name {ns.name!r}")
            names.add(ns.name)
            if ns.type not in self.registry:
                raise ValidationError(f"unknown neuron type {ns.type!r} for neuron {ns.name!r}")
            self._add_neuron(ns)

        for name, seq in spec.inputs.items():
            n = self._by_name(name)
            if n is None:
                raise ValidationError(f"inputs given for unknown neuron {name!r}")
            if n.type.input_arity != 0:
                raise ValidationError(f"inputs given for non-source neuron {name!r}")
            n.params["sequence"] = list(seq)
        for n in self.neurons.values():
            if "matrix" in n.params:
                n.params["matrix"] = self._check_matrix(n.params["matrix"], f"{n.id} matrix")
            if "sequence" in n.params:
                n.params["sequence"] = [
                    self._check_matrix(m, f"{n.id} sequence element") for m in n.params["sequence"]
                ]

        if spec.self_neuron is None or self._by_name(spec.self_neuron) is None:
            raise ValidationError("missing Self: spec names no existing Self neuron")
        s = self._by_name(spec.self_neuron)
        if (s.type.input_arity, s.type.output_arity) != (2, 1):
            raise ValidationError("Self must have input arity 2 (x, dx) and output arity 1")
        self.self_id = s.id
        self.self_x_row, self.self_dx_row = s.rows
        self.self_col = s.cols[0]

        W0 = spec.initial_matrix
        if self.mode == LIGHTWEIGHT:
            W0 = np.asarray(W0, dtype=float)
            if W0.shape != (self.M, self.N):
                raise ValidationError(f"initial matrix has shape {W0.shape}, expected {(self.M, self.N)}")
        else:
            if not isinstance(W0, fd.FDMatrix):
                raise ValidationError("countable initial matrix must be an FDMatrix")
            if not fd.finite_support(W0):
                raise ValidationError("initial matrix has infinite support")
            for i, j, _ in fd.to_triplets(W0):
                self._check_key(i, "row")
                self._check_key(j, "col")
        self.initial_matrix = self._check_matrix(W0, "initial matrix")

        self.initial_outputs = {}
        for k, m in spec.initial_outputs.items():
            self._check_key(k, "col")
            self.initial_outputs[k] = self._check_matrix(m, f"initial output {k!r}")

        self.enforced_rows = {}
        for r, vals in spec.enforced_rows.items():
            self._check_key(r, "row")
            if self.mode == LIGHTWEIGHT:
                vals = np.asarray(vals, dtype=float)
                if vals.shape != (self.N,):
                    raise ValidationError(f"enforced row {r} must have {self.N} values")
            elif not isinstance(vals, fd.FDVector) or not vals.has_finite_support:
                raise ValidationError(f"enforced row {r!r} must be a finite-support FDVector")
            self.enforced_rows[r] = vals

    def _add_neuron(self, ns: NeuronSpec) -> Neuron:
        t = self.registry[ns.type]
        if self.mode == LIGHTWEIGHT:
            rows, cols = tuple(int(r) for r in ns.rows), tuple(int(c) for c in ns.cols)
            if len(rows) != t.input_arity or len(cols) != t.output_arity:
                raise ValidationError(
                    f"neuron {ns.name!r}: type {t.name} needs {t.input_arity} rows and "
                    f"{t.output_arity} cols, got {len(rows)} and {len(cols)}")
            for r in rows:
                if not 0 <= r < self.M:
                    raise ValidationError(f"neuron {ns.name!r}: row {r} out of range")
            for c in cols:
                if not 0 <= c < self.N:
                    raise ValidationError(f"neuron {ns.name!r}: col {c} out of range")
            nid = ns.name
        else:
            try:
                nid = il.format_index(il.IndexName.neuron(t.name, ns.name))
            except il.IndexNameError as e:
                raise ValidationError(f"neuron {ns.name!r}: {e}") from None
            rows = tuple(il.input_key(t.name, k, ns.name) for k in range(1, t.input_arity + 1))
            cols = tuple(il.output_key(t.name, k, ns.name) for k in range(1, t.output_arity + 1))
        for r in rows:
            if r in self.row_owner:
                raise ValidationError(f"row {r!r} owned by two neurons")
            self.row_owner[r] = nid
        for c in cols:
            if c in self.col_owner:
                raise ValidationError(f"col {c!r} owned by two neurons")
            self.col_owner[c] = nid
        n = Neuron(nid, ns.name, t, dict(ns.params), rows, cols)
        self.neurons[nid] = n
        return n

    def _by_name(self, name: str) -> Neuron | None:
        if name in self.neurons:
            return self.neurons[name]
        for n in self.neurons.values():
            if n.name == name:
                return n
        return None

    def _check_key(self, key, kind: str):
        if self.mode == LIGHTWEIGHT:
            bound = self.M if kind == "row" else self.N
            if not isinstance(key, (int, np.integer)) or not 0 <= key < bound:
                raise ValidationError(f"bad {kind} index {key!r}")
            return
        try:
            n = il.parse_index(key) if isinstance(key, str) else None
        except il.ParseError as e:
            raise ValidationError(f"bad {kind} key: {e}") from None
        expected = il.INPUT if kind == "row" else il.OUTPUT
        if n is None or n.kind != expected:
            raise ValidationError(f"bad {kind} key {key!r}: expected a neuron {expected} name")
        try:
            ok = il.validate_against_registry(n, self.registry)
        except il.UnknownType:
            raise ValidationError(f"bad {kind} key {key!r}: unknown type {n.type_name!r}") from None
        if not ok:
            raise ValidationError(f"bad {kind} key {key!r}: field index beyond type arity")

    def _check_matrix(self, m, what: str):
        if self.mode == LIGHTWEIGHT:
            m = np.asarray(m, dtype=float)
            if m.shape != (self.M, self.N):
                raise ValidationError(f"{what} has shape {m.shape}, expected {(self.M, self.N)}")
            return _readonly(m)
        if not isinstance(m, fd.FDMatrix):
            raise ValidationError(f"{what} must be an FDMatrix in countable mode")
        return m

    # -- lookup ---------------------------------------------------------------

    def neuron(self, nid: str) -> Neuron:
        return self.neurons[nid]

    def owner(self, key, kind: str) -> str | None:
        """Neuron owning a row or column key.

        In countable mode every well-formed key names a neuron: undeclared
        ones are instantiated on demand with empty parameters.
        """
        table = self.row_owner if kind == "row" else self.col_owner
        if key in table:
            return table[key]
        if self.mode == LIGHTWEIGHT:
            return None
        try:
            n = il.parse_index(key)
        except il.ParseError:
            return None
        if n.type_name not in self.registry:
            return None
        if n.neuron_name not in self.neurons:
            t = self.registry[n.type_name]
            rows = tuple(il.input_key(t.name, k, n.simple_name) for k in range(1, t.input_arity + 1))
            cols = tuple(il.output_key(t.name, k, n.simple_name) for k in range(1, t.output_arity + 1))
            neuron = Neuron(n.neuron_name, n.simple_name, t, {}, rows, cols)
            self.neurons[neuron.id] = neuron
            self.row_owner.update(dict.fromkeys(rows, neuron.id))
            self.col_owner.update(dict.fromkeys(cols, neuron.id))
        return table.get(key)

    def initial_outputs_of(self, n: Neuron) -> list:
        if n.type.initial_outputs is not None:
            outs = list(n.type.initial_outputs(n.params, self.zero))
        else:
            outs = [self.zero] * n.type.output_arity
        return [self.initial_outputs.get(c, o) for c, o in zip(n.cols, outs)]

    def initial_state_of(self, n: Neuron):
        return n.type.initial_state(n.params) if n.type.initial_state is not None else None

    # -- matrix helpers ---------------------------------------------------------

    def entries(self, W) -> list[tuple[Hashable, Hashable, float]]:
        if self.mode == LIGHTWEIGHT:
            rows, cols = np.nonzero(W)
            return [(int(i), int(j), float(W[i, j])) for i, j in zip(rows, cols)]
        return fd.to_triplets(W)

    def row_of(self, W, r):
        if self.mode == LIGHTWEIGHT:
            return W[r]
        return fd.extract_row(W, r)

    def enforce(self, W):
        if not self.enforced_rows:
            return W
        if self.mode == LIGHTWEIGHT:
            W = W.copy()
            for r, vals in self.enforced_rows.items():
                W[r] = vals
            return _readonly(W)
        keep = fd.lift_col(fd.FDVector(1.0, dict.fromkeys(self.enforced_rows, 0.0)))
        W = fd.hadamard(keep, W)
        for r, vals in self.enforced_rows.items():
            W = W + fd.outer(fd.FDVector.unit(r), vals)
        return W

    def x_row_ok(self, W) -> bool:
        row = self.row_of(W, self.self_x_row)
        if self.mode == LIGHTWEIGHT:
            e = np.zeros(self.N)
            e[self.self_col] = 1.0
            return bool(np.array_equal(row, e))
        return row == fd.FDVector.unit(self.self_col)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


# ---------------------------------------------------------------------------
# state and the two movements


class Phase(enum.Enum):
    BEFORE_DOWN = "before_down"
    AFTER_DOWN = "after_down"


@dataclass(frozen=True)
class NetworkState:
    net: Network
    t: int
    phase: Phase
    W: Any
    inputs: Mapping
    outputs: Mapping
    neuron_states: Mapping
    active: tuple = ()


def build_network(spec: NetworkSpec, registry: TypeRegistry | None = None,
                  self_mode: str = LITERAL) -> NetworkState:
    net = Network(spec, registry, self_mode)
    outputs, states = {}, {}
    for n in list(net.neurons.values()):
        outputs.update(zip(n.cols, net.initial_outputs_of(n)))
        states[n.id] = net.initial_state_of(n)
    W = net.initial_matrix
    outputs[net.self_col] = W
    return NetworkState(net, 0, Phase.BEFORE_DOWN, W, {}, outputs, states)


def active_set(W, net: Network) -> set[str]:
    """Self plus every neuron with a nonzero weight on one of its rows or columns."""
    active = {net.self_id}
    for i, j, _ in net.entries(W):
        for key, kind in ((i, "row"), (j, "col")):
            nid = net.owner(key, kind)
            if nid is not None:
                active.add(nid)
    return active


def down_movement(s: NetworkState) -> NetworkState:
    if s.phase is not Phase.BEFORE_DOWN:
        raise PhaseError(f"down movement requested in phase {s.phase.value}")
    net = s.net
    if net.self_mode == OPTIMIZED and not net.x_row_ok(s.W):
        raise ConstraintViolated(f"t={s.t}: Self x-row is not the unit vector at Self's output")
    active = active_set(s.W, net)
    by_row: dict = {}
    for i, j, w in net.entries(s.W):
        by_row.setdefault(i, []).append((j, w))
    inputs = {}
    for i, terms in by_row.items():
        if net.owner(i, "row") not in active:
            continue
        if net.self_mode == OPTIMIZED and i == net.self_x_row:
            continue
        acc = None
        for j, w in terms:
            term = w * s.outputs.get(j, net.zero)
            acc = term if acc is None else acc + term
        inputs[i] = acc
    order = [nid for nid in net.neurons if nid in active]
    return replace(s, phase=Phase.AFTER_DOWN, inputs=inputs, active=tuple(order))


def up_movement(s: NetworkState) -> NetworkState:
    if s.phase is not Phase.AFTER_DOWN:
        raise PhaseError(f"up movement requested in phase {s.phase.value}")
    net = s.net
    ctx = StepContext(s.t + 1, net.zero, net.mode)
    outputs, states = dict(s.outputs), dict(s.neuron_states)
    for nid in s.active:
        n = net.neuron(nid)
        ins = [s.inputs.get(r, net.zero) for r in n.rows]
        if nid == net.self_id and net.self_mode == OPTIMIZED:
            ins[0] = s.W
        state = states[nid] if nid in states else net.initial_state_of(n)
        outs, states[nid] = n.type.transform(ins, state, n.params, ctx)
        if len(outs) != len(n.cols):
            raise EngineError(f"neuron {nid} produced {len(outs)} outputs, expected {len(n.cols)}")
        if net.mode == COUNTABLE:
            outs = [fd.compact(o) for o in outs]
        outputs.update(zip(n.cols, outs))

    W = net.enforce(outputs[net.self_col])
    if net.mode == COUNTABLE:
        if not fd.finite_support(W):
            if net.spec.overflow_policy == HALT:
                raise Overflow(f"t={ctx.t}: network matrix has infinite support")
            log.info("t=%d: network matrix has infinite support, resetting to zero", ctx.t)
            W = fd.ZERO
        W = fd.compact(W)
    outputs[net.self_col] = W
    return replace(s, t=ctx.t, phase=Phase.BEFORE_DOWN, W=W, outputs=outputs,
                   neuron_states=states)


def step(s: NetworkState) -> NetworkState:
    return up_movement(down_movement(s))


# ---------------------------------------------------------------------------
# watching and running


@dataclass(frozen=True)
class TraceRecord:
    t: int
    watched: dict


@dataclass
class Trace:
    records: list[TraceRecord]
    final_state: NetworkState

    def values(self, key: str) -> list:
        return [r.watched[key] for r in self.records]

    def __len__(self) -> int:
        return len(self.records)


_Y0_CELL = re.compile(r"Y0\[(\d+)\]\[(\d+)\]")
_Y0_ROW = re.compile(r"Y0\[(\d+)\]")


def matrix_literal(m):
    if isinstance(m, fd.FDMatrix):
        return m.to_literal()
    return np.asarray(m).tolist()


def _split_cell(net: Network, body: str):
    if net.mode == LIGHTWEIGHT:
        a, b = body.split(",")
        return int(a), int(b)
    # row keys may contain commas; pick the split that yields an input and an output key
    for pos in [m.start() for m in re.finditer(",", body)]:
        r, c = body[:pos], body[pos + 1:]
        try:
            if il.parse_index(r).kind == il.INPUT and il.parse_index(c).kind == il.OUTPUT:
                return r, c
        except il.ParseError:
            continue
    raise ValueError(f"cannot split cell key {body!r}")


def watch_getter(key: str, net: Network) -> Callable[[NetworkState], Any]:
    """Compile a watch key into a function of the state.

    Keys: ``Y0`` (whole network matrix), ``Y0[i][j]`` and ``Y0[i]`` (cell and
    row, lightweight), ``cell:<row>,<col>`` and ``out:<col>``.
    """
    if key == "Y0":
        return lambda s: matrix_literal(s.W)
    if m := _Y0_CELL.fullmatch(key):
        if net.mode != LIGHTWEIGHT:
            raise ValueError("Y0[i][j] watch keys need lightweight mode, use cell:<row>,<col>")
        i, j = int(m.group(1)), int(m.group(2))
        return lambda s: float(s.W[i, j])
    if m := _Y0_ROW.fullmatch(key):
        i = int(m.group(1))
        if net.mode == LIGHTWEIGHT:
            return lambda s: [float(x) for x in s.W[i]]
        raise ValueError("Y0[i] watch keys need lightweight mode")
    if key.startswith("cell:"):
        i, j = _split_cell(net, key[5:])
        if net.mode == LIGHTWEIGHT:
            return lambda s: float(s.W[i, j])
        return lambda s: fd.fd_value(s.W, i, j)
    if key.startswith("out:"):
        c = key[4:]
        c = int(c) if net.mode == LIGHTWEIGHT else c
        return lambda s: matrix_literal(s.outputs.get(c, net.zero))
    raise ValueError(f"unknown watch key {key!r}")


def run(s: NetworkState, T: int, watch: Sequence[str] = ()) -> Trace:
    if s.phase is not Phase.BEFORE_DOWN:
        raise PhaseError("run must start before a down movement")
    getters = {k: watch_getter(k, s.net) for k in watch}
    records = []
    for _ in range(T):
        try:
            s = up_movement(down_movement(s))
        except EngineError as e:
            e.trace = Trace(records, s)  # the records up to the failing step
            raise
        records.append(TraceRecord(s.t, {k: g(s) for k, g in getters.items()}))
    return Trace(records, s)


def states(s: NetworkState, T: int) -> list[NetworkState]:
    """The states after each of ``T`` steps (``t = 1..T``)."""
    out = []
    for _ in range(T):
        s = step(s)
        out.append(s)
    return out


def _same_matrix(a, b) -> bool:
    if isinstance(a, fd.FDMatrix):
        return fd.semantically_equal(a, b)
    return bool(np.array_equal(a, b, equal_nan=True))


def self_equivalence_check(spec: NetworkSpec, steps: int = 20, registry: TypeRegistry | None = None,
                           watch: Sequence[str] | None = None) -> bool:
    """Run literal and optimized Self side by side and compare.

    With ``watch`` given the watched traces are compared, otherwise the full
    network matrix and every output after each step.
    """
    lit = build_network(spec, registry, LITERAL)
    opt = build_network(spec, registry, OPTIMIZED)
    if watch is not None:
        return run(lit, steps, watch).records == run(opt, steps, watch).records
    for a, b in zip(states(lit, steps), states(opt, steps)):
        if not _same_matrix(a.W, b.W):
            return False
        keys = set(a.outputs) | set(b.outputs)
        zero = a.net.zero
        if not all(_same_matrix(a.outputs.get(k, zero), b.outputs.get(k, zero)) for k in keys):
            return False
    return True
