"""Structured names for neurons, neuron inputs and neuron outputs.

Grammar (``t`` a type name, ``s`` a simple name, ``k >= 1`` in decimal)::

    t@s          neuron
    t@ik\\s       k-th input of neuron t@s
    t@ok%s       k-th output of neuron t@s

Type names use ``[A-Za-z0-9_()+,.]``, simple names ``[A-Za-z0-9_-]``; the
separators ``\\ % @`` belong to neither.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

SEPARATORS = frozenset("\\%@")
_TYPE_RE = re.compile(r"[A-Za-z0-9_()+,.]+")
_SIMPLE_RE = re.compile(r"[A-Za-z0-9_\-]+")
_FIELD_RE = re.compile(r"([io])([1-9][0-9]*)")

NEURON, INPUT, OUTPUT = "neuron", "input", "output"


class IndexNameError(ValueError):
    pass


class ParseError(IndexNameError):
    pass


class InvalidAlphabet(IndexNameError):
    pass


class UnknownType(KeyError):
    pass


@dataclass(frozen=True)
class IndexName:
    type_name: str
    kind: str = NEURON
    simple_name: str = ""
    k: int = 0

    @classmethod
    def neuron(cls, type_name: str, simple_name: str) -> IndexName:
        return cls(type_name, NEURON, simple_name)

    @classmethod
    def input(cls, type_name: str, k: int, simple_name: str) -> IndexName:
        return cls(type_name, INPUT, simple_name, k)

    @classmethod
    def output(cls, type_name: str, k: int, simple_name: str) -> IndexName:
        return cls(type_name, OUTPUT, simple_name, k)

    @property
    def neuron_name(self) -> str:
        return f"{self.type_name}@{self.simple_name}"

    def __str__(self) -> str:
        return format_index(self)


def field_name(kind: str, k: int) -> str:
    return ("i" if kind == INPUT else "o") + str(k)


def format_index(n: IndexName) -> str:
    if not _TYPE_RE.fullmatch(n.type_name or ""):
        raise InvalidAlphabet(f"bad type name {n.type_name!r}")
    if not _SIMPLE_RE.fullmatch(n.simple_name or ""):
        raise InvalidAlphabet(f"bad simple name {n.simple_name!r}")
    if n.kind == NEURON:
        return f"{n.type_name}@{n.simple_name}"
    if n.kind not in (INPUT, OUTPUT) or not isinstance(n.k, int) or n.k < 1:
        raise InvalidAlphabet(f"bad field ({n.kind}, {n.k!r})")
    sep = "\\" if n.kind == INPUT else "%"
    return f"{n.type_name}@{field_name(n.kind, n.k)}{sep}{n.simple_name}"


def parse_index(s: str) -> IndexName:
    if s.count("@") != 1:
        raise ParseError(f"{s!r}: expected exactly one '@'")
    type_name, rest = s.split("@")
    if not type_name:
        raise ParseError(f"{s!r}: empty type name")
    if not _TYPE_RE.fullmatch(type_name):
        raise ParseError(f"{s!r}: type name {type_name!r} outside its alphabet")
    n_in, n_out = rest.count("\\"), rest.count("%")
    if n_in + n_out > 1:
        raise ParseError(f"{s!r}: multiple field separators")
    if n_in + n_out == 0:
        kind, simple = NEURON, rest
        k = 0
    else:
        sep = "\\" if n_in else "%"
        field, simple = rest.split(sep)
        m = _FIELD_RE.fullmatch(field)
        expected = "i" if n_in else "o"
        if m is None or m.group(1) != expected:
            raise ParseError(f"{s!r}: bad field name {field!r}")
        kind, k = (INPUT if n_in else OUTPUT), int(m.group(2))
    if not simple:
        raise ParseError(f"{s!r}: empty simple name")
    if not _SIMPLE_RE.fullmatch(simple):
        raise ParseError(f"{s!r}: simple name {simple!r} outside its alphabet")
    return IndexName(type_name, kind, simple, k)


def validate_against_registry(n: IndexName, registry: Mapping) -> bool:
    """Check field arity bounds against ``registry[type_name]``.

    Registry values need ``input_arity`` and ``output_arity`` attributes.
    """
    if n.type_name not in registry:
        raise UnknownType(n.type_name)
    t = registry[n.type_name]
    if n.kind == INPUT:
        return 1 <= n.k <= t.input_arity
    if n.kind == OUTPUT:
        return 1 <= n.k <= t.output_arity
    return True


def input_key(type_name: str, k: int, simple_name: str) -> str:
    return format_index(IndexName.input(type_name, k, simple_name))


def output_key(type_name: str, k: int, simple_name: str) -> str:
    return format_index(IndexName.output(type_name, k, simple_name))
