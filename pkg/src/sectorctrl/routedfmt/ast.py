"""Syntax tree for ``.rqc`` routed-circuit files.

Positions are kept for diagnostics but excluded from equality, so a printed
and re-parsed tree compares equal to the original.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


# -- route expressions ---------------------------------------------------------

@dataclass(frozen=True)
class RouteId:
    pass


@dataclass(frozen=True)
class RouteFull:
    pass


@dataclass(frozen=True)
class RouteLiteral:
    rows: tuple  # tuple of tuples of 0/1


@dataclass(frozen=True)
class RouteRef:
    name: str
    transposed: bool = False
    pos: Pos = field(default=Pos(0, 0), compare=False)


@dataclass(frozen=True)
class RouteUnion:
    """Elementwise OR of two routes."""
    left: "RouteExpr"
    right: "RouteExpr"


RouteExpr = Union[RouteId, RouteFull, RouteLiteral, RouteRef, RouteUnion]


# -- statements ------------------------------------------------------------------

@dataclass(frozen=True)
class WireDecl:
    name: str
    sectors: tuple
    pos: Pos = field(default=Pos(0, 0), compare=False)


@dataclass(frozen=True)
class LetDecl:
    name: str
    value: RouteLiteral
    pos: Pos = field(default=Pos(0, 0), compare=False)


@dataclass(frozen=True)
class GateDecl:
    name: str
    ins: tuple
    outs: tuple
    route: RouteExpr
    payload: str
    pos: Pos = field(default=Pos(0, 0), compare=False)


@dataclass(frozen=True)
class SlotDecl:
    name: str
    ins: tuple
    outs: tuple
    route: RouteExpr
    pos: Pos = field(default=Pos(0, 0), compare=False)


@dataclass(frozen=True)
class Apply:
    name: str
    pos: Pos = field(default=Pos(0, 0), compare=False)


@dataclass(frozen=True)
class CircuitAST:
    wires: tuple          # WireDecl
    lets: tuple           # LetDecl
    gates: tuple          # GateDecl
    slots: tuple          # SlotDecl
    inputs: tuple         # wire names
    outputs: tuple        # wire names
    output_route: RouteExpr
    layers: tuple         # Apply, in order
    base_dir: str = field(default=".", compare=False)

    def wire(self, name: str) -> WireDecl:
        return next(w for w in self.wires if w.name == name)

    def node(self, name: str):
        for n in self.gates + self.slots:
            if n.name == name:
                return n
        raise KeyError(name)

    def let(self, name: str) -> LetDecl:
        return next(l for l in self.lets if l.name == name)
