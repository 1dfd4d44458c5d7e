"""Definitions and the world that holds them."""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterator, Mapping

from .prims import primitive_arity
from .sexpr import SExpr, Sym
from .terms import Term


class DefinitionError(ValueError):
    pass


@dataclass(frozen=True)
class Definition:
    name: Sym
    formals: tuple
    body: Term
    source_body: SExpr
    guard: Term | None = None
    measure: Term | None = None
    guard_source: SExpr | None = None
    measure_source: SExpr | None = None
    clique: tuple = ()

    def __post_init__(self):
        if not self.clique:
            object.__setattr__(self, "clique", (self.name,))


@dataclass(frozen=True)
class World:
    """Immutable, admission-ordered map from function names to definitions."""

    _defs: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "_defs", MappingProxyType(dict(self._defs)))

    def __contains__(self, name) -> bool:
        return name in self._defs

    def __getitem__(self, name) -> Definition:
        return self._defs[name]

    def __iter__(self) -> Iterator[Sym]:
        return iter(self._defs)

    def __len__(self) -> int:
        return len(self._defs)

    def get(self, name) -> Definition | None:
        return self._defs.get(name)

    def names(self) -> list:
        return list(self._defs)

    def index(self, name) -> int:
        return list(self._defs).index(name)

    def arity(self, fn) -> int | None:
        d = self._defs.get(fn)
        if d is not None:
            return len(d.formals)
        return primitive_arity(fn)

    def is_defined(self, name) -> bool:
        return name in self._defs or primitive_arity(name) is not None

    def extend(self, defs) -> "World":
        new = dict(self._defs)
        for d in defs:
            if d.name in new or primitive_arity(d.name) is not None:
                raise DefinitionError(f"name already defined: {d.name}")
            new[d.name] = d
        return World(new)

    def clique_of(self, name) -> tuple:
        return self._defs[name].clique
