"""JSON network spec files and JSONL traces.

Spec document::

    {
      "mode": {"kind": "lightweight", "M": 2, "N": 2} | "countable",
      "types": ["const", ...],                      # optional, checked
      "neurons": [{"name": "self", "type": "self2", "rows": [0, 1], "cols": [0]},
                  {"name": "y1", "type": "const", "cols": [1], "params": {"matrix": ...}}],
      "self": {"neuron": "self", "enforce_rows": {"0": [1, 0]}, "overflow_policy": "reset"},
      "initial_matrix": [[row, col, w], ...],
      "initial_outputs": {"<col>": <matrix>},      # optional
      "inputs": {"<inport name>": [<matrix>, ...]}, # optional
      "steps": 100,                                 # optional
      "meta": {...}                                 # optional, passed through
    }

Matrices are dense row lists in lightweight mode and
``{"terms": [{"u": {"default": d, "except": {...}}, "v": {...}}]}`` in
countable mode.  Countable row and column keys are index-language strings;
lightweight ones are integers (strings of digits where JSON forces object keys).
"""
from __future__ import annotations

import json
from typing import IO, Any

import numpy as np

from puredmm import fd_matrix as fd
from puredmm import index_language as il
from puredmm.engine import (COUNTABLE, LIGHTWEIGHT, RESET, NetworkSpec, NeuronSpec, Trace,
                            ValidationError)


def _encode(obj: Any) -> Any:
    if isinstance(obj, fd.FDMatrix):
        return obj.to_literal()
    if isinstance(obj, fd.FDVector):
        return obj.to_literal()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    return obj


def decode_matrix(lit: Any, mode: str):
    if mode == COUNTABLE:
        if isinstance(lit, dict) and "terms" in lit:
            return fd.FDMatrix.from_literal(lit)
        if isinstance(lit, list):
            return fd.from_triplets(lit)
        raise ValidationError(f"bad countable matrix literal: {str(lit)[:60]}")
    arr = np.asarray(lit, dtype=float)
    if arr.ndim != 2:
        raise ValidationError("lightweight matrix literal must be a list of rows")
    return arr


def _key(k, mode: str):
    if mode == LIGHTWEIGHT:
        try:
            return int(k)
        except (TypeError, ValueError):
            raise ValidationError(f"bad integer index {k!r}") from None
    return k


def spec_to_dict(spec: NetworkSpec) -> dict:
    if spec.mode == LIGHTWEIGHT:
        mode = {"kind": LIGHTWEIGHT, "M": int(spec.shape[0]), "N": int(spec.shape[1])}
        W = np.asarray(spec.initial_matrix)
        triplets = [[int(i), int(j), float(W[i, j])] for i, j in zip(*np.nonzero(W))]
    else:
        mode = COUNTABLE
        triplets = [[i, j, w] for i, j, w in fd.to_triplets(spec.initial_matrix)]
    neurons = []
    for n in spec.neurons:
        d = {"name": n.name, "type": n.type}
        if n.params:
            d["params"] = _encode(n.params)
        if spec.mode == LIGHTWEIGHT:
            d["rows"] = [int(r) for r in n.rows]
            d["cols"] = [int(c) for c in n.cols]
        neurons.append(d)
    doc = {
        "mode": mode,
        "neurons": neurons,
        "self": {"neuron": spec.self_neuron, "overflow_policy": spec.overflow_policy},
        "initial_matrix": triplets,
    }
    if spec.enforced_rows:
        doc["self"]["enforce_rows"] = _encode(spec.enforced_rows)
    if spec.initial_outputs:
        doc["initial_outputs"] = _encode(spec.initial_outputs)
    if spec.inputs:
        doc["inputs"] = _encode(spec.inputs)
    if spec.steps is not None:
        doc["steps"] = spec.steps
    if spec.meta:
        doc["meta"] = _encode(spec.meta)
    return doc


def spec_from_dict(doc: dict) -> NetworkSpec:
    if not isinstance(doc, dict):
        raise ValidationError("spec must be a JSON object")
    raw_mode = doc.get("mode")
    if raw_mode == COUNTABLE:
        mode, shape = COUNTABLE, None
    elif isinstance(raw_mode, dict) and raw_mode.get("kind") == LIGHTWEIGHT:
        mode, shape = LIGHTWEIGHT, (int(raw_mode["M"]), int(raw_mode["N"]))
    else:
        raise ValidationError(f"bad mode {raw_mode!r}")
    if "self" not in doc or not isinstance(doc["self"], dict) or "neuron" not in doc["self"]:
        raise ValidationError("missing Self: no \"self\" section naming a neuron")
    if "neurons" not in doc:
        raise ValidationError("missing \"neurons\"")

    neurons = []
    for d in doc["neurons"]:
        params = dict(d.get("params", {}))
        if "matrix" in params:
            params["matrix"] = decode_matrix(params["matrix"], mode)
        if "sequence" in params:
            params["sequence"] = [decode_matrix(m, mode) for m in params["sequence"]]
        neurons.append(NeuronSpec(d["name"], d["type"], params,
                                  tuple(d.get("rows", ())), tuple(d.get("cols", ()))))

    self_doc = doc["self"]
    enforced = {}
    for k, v in self_doc.get("enforce_rows", {}).items():
        enforced[_key(k, mode)] = fd.FDVector.from_literal(v) if mode == COUNTABLE else np.asarray(v, float)

    im = doc.get("initial_matrix", [])
    if mode == LIGHTWEIGHT:
        W = np.zeros(shape)
        for entry in im:
            if len(entry) != 3:
                raise ValidationError("initial_matrix entries must be [row, col, weight]")
            i, j, w = entry
            i, j = _key(i, mode), _key(j, mode)
            if not (0 <= i < shape[0] and 0 <= j < shape[1]):
                raise ValidationError(f"initial_matrix entry ({i}, {j}) outside {shape}")
            W[i, j] += float(w)
    else:
        W = decode_matrix(im, mode)
        if isinstance(im, list):
            for entry in im:
                for key in entry[:2]:
                    try:
                        il.parse_index(key)
                    except (il.ParseError, TypeError, AttributeError) as e:
                        raise ValidationError(f"initial_matrix key {key!r}: {e}") from None

    spec = NetworkSpec(
        mode=mode,
        shape=shape,
        neurons=neurons,
        self_neuron=self_doc["neuron"],
        initial_matrix=W,
        initial_outputs={_key(k, mode): decode_matrix(v, mode)
                         for k, v in doc.get("initial_outputs", {}).items()},
        enforced_rows=enforced,
        overflow_policy=self_doc.get("overflow_policy", RESET),
        inputs={name: [decode_matrix(m, mode) for m in seq]
                for name, seq in doc.get("inputs", {}).items()},
        steps=doc.get("steps"),
        meta=doc.get("meta", {}),
    )
    if "types" in doc:
        spec.meta["types"] = list(doc["types"])
    return spec


def dumps_spec(spec: NetworkSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=1)


def dump_spec(spec: NetworkSpec, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_spec(spec))
        fh.write("\n")


def load_spec(path) -> NetworkSpec:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValidationError(f"not valid JSON: {e}") from None
    try:
        return spec_from_dict(doc)
    except (KeyError, TypeError) as e:
        raise ValidationError(f"malformed spec: {e!r}") from None


def trace_lines(trace: Trace):
    for rec in trace.records:
        yield json.dumps({"t": rec.t, "watched": rec.watched})


def write_trace(trace: Trace, fh: IO[str]) -> None:
    for line in trace_lines(trace):
        fh.write(line)
        fh.write("\n")
