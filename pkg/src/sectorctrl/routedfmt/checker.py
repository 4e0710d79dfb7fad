"""Route type-checking for parsed circuits.

The checker verifies every literal gate against its declared route, tracks
the relation between input sectors and the sectors of the live wires through
the layers by Boolean composition, and records the routes that slot bindings
must satisfy at evaluation time.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .. import channel as ch
from ..sectors import PartitionedSpace, ProductSpace, Route, bool_matmul, route_leakage
from ..tensor import EQ_TOL
from .ast import CircuitAST, RouteFull, RouteId, RouteLiteral, RouteRef, RouteUnion


class RouteShapeError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    node: str
    kind: str          # payload, dims, tp, shape, route, leak, wiring, end-to-end
    message: str
    in_sector: tuple | None = None
    out_sector: tuple | None = None
    norm: float = 0.0

    def coords(self):
        return (self.node, self.in_sector, self.out_sector)


@dataclass(frozen=True)
class Obligation:
    slot: str
    space_in: ProductSpace
    space_out: ProductSpace
    route: Route


@dataclass
class RouteCheckReport:
    status: dict = field(default_factory=dict)
    composed: np.ndarray | None = None
    violations: list = field(default_factory=list)
    obligations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def leaks(self) -> set:
        return {v.coords() for v in self.violations if v.kind == "leak"}

    def to_obj(self) -> dict:
        return {
            "ok": self.ok,
            "status": dict(self.status),
            "composed_route": None if self.composed is None else self.composed.astype(int).tolist(),
            "violations": [{"node": v.node, "kind": v.kind, "message": v.message,
                            "in_sector": None if v.in_sector is None else list(v.in_sector),
                            "out_sector": None if v.out_sector is None else list(v.out_sector),
                            "norm": v.norm} for v in self.violations],
            "obligations": [{"slot": o.slot, "route": o.route.to_obj()} for o in self.obligations],
        }


def wires_space(ast: CircuitAST, names) -> ProductSpace:
    return ProductSpace(tuple(PartitionedSpace(ast.wire(n).sectors) for n in names))


def eval_route(expr, ast: CircuitAST, n_out: int, n_in: int) -> np.ndarray:
    """Boolean matrix of a route expression for the given sector counts."""
    if isinstance(expr, RouteId):
        if n_out != n_in:
            raise RouteShapeError(f"'id' needs equal sector counts, got {n_out} and {n_in}")
        m = np.eye(n_in, dtype=bool)
    elif isinstance(expr, RouteFull):
        m = np.ones((n_out, n_in), dtype=bool)
    elif isinstance(expr, RouteLiteral):
        m = np.array(expr.rows, dtype=bool)
    elif isinstance(expr, RouteRef):
        m = np.array(ast.let(expr.name).value.rows, dtype=bool)
        if expr.transposed:
            m = m.T
    elif isinstance(expr, RouteUnion):
        a = eval_route(expr.left, ast, n_out, n_in)
        b = eval_route(expr.right, ast, n_out, n_in)
        return a | b
    else:
        raise TypeError(f"not a route expression: {expr!r}")
    if m.shape != (n_out, n_in):
        raise RouteShapeError(f"route is {m.shape[0]}x{m.shape[1]}, wires need {n_out}x{n_in}")
    return m


def load_payload(ast: CircuitAST, path: str, payloads: dict | None = None) -> ch.CPMap:
    if payloads is not None and path in payloads:
        obj = payloads[path]
    else:
        with open(os.path.join(ast.base_dir, path), encoding="utf-8") as fh:
            obj = json.load(fh)
    return ch.channel_from_obj(obj, trace_preserving=False)


def node_route(ast: CircuitAST, node) -> Route:
    sin, sout = wires_space(ast, node.ins), wires_space(ast, node.outs)
    return Route(eval_route(node.route, ast, sout.n_sectors, sin.n_sectors))


def _check_gate(ast, g, payloads, report) -> Route | None:
    sin, sout = wires_space(ast, g.ins), wires_space(ast, g.outs)
    bad = []
    route = None
    try:
        m = eval_route(g.route, ast, sout.n_sectors, sin.n_sectors)
        route = Route(m)
    except RouteShapeError as exc:
        bad.append(Violation(g.name, "shape", str(exc)))
    except ValueError as exc:
        bad.append(Violation(g.name, "route", str(exc)))
    try:
        c = load_payload(ast, g.payload, payloads)
    except (OSError, ValueError, KeyError) as exc:
        bad.append(Violation(g.name, "payload", f"cannot load {g.payload}: {exc}"))
        c = None
    if c is not None:
        if (c.dim_in, c.dim_out) != (sin.dim, sout.dim):
            bad.append(Violation(g.name, "dims", f"payload is {c.dim_in}->{c.dim_out}, "
                                                  f"wires are {sin.dim}->{sout.dim}"))
        else:
            tp = c.tp_defect()
            if tp > EQ_TOL:
                bad.append(Violation(g.name, "tp", f"payload is not trace preserving ({tp:.3e})", norm=tp))
            if route is not None:
                for k, l, norm in route_leakage(c, sin, sout, route):
                    if norm > EQ_TOL:
                        bad.append(Violation(g.name, "leak", "sector leaks outside its route",
                                             sin.sector_tuple(k), sout.sector_tuple(l), norm))
    report.violations.extend(bad)
    report.status[g.name] = "ok" if not bad else "violation"
    return route


def _check_slot(ast, s, report) -> Route | None:
    sin, sout = wires_space(ast, s.ins), wires_space(ast, s.outs)
    try:
        route = Route(eval_route(s.route, ast, sout.n_sectors, sin.n_sectors))
    except RouteShapeError as exc:
        report.violations.append(Violation(s.name, "shape", str(exc)))
        report.status[s.name] = "violation"
        return None
    except ValueError as exc:
        report.violations.append(Violation(s.name, "route", str(exc)))
        report.status[s.name] = "violation"
        return None
    report.obligations.append(Obligation(s.name, sin, sout, route))
    report.status[s.name] = "ok"
    return route


def _sectors(ast, name) -> int:
    return len(ast.wire(name).sectors)


def check(ast: CircuitAST, payloads: dict | None = None) -> RouteCheckReport:
    report = RouteCheckReport()
    routes = {}
    for g in ast.gates:
        routes[g.name] = _check_gate(ast, g, payloads, report)
    for s in ast.slots:
        routes[s.name] = _check_slot(ast, s, report)

    # relation tensor: one axis per live wire's sectors, last axis the input sectors
    live = list(ast.inputs)
    if len(set(live)) != len(live):
        report.violations.append(Violation("input", "wiring", "input wires repeat"))
        return report
    n_in = int(np.prod([_sectors(ast, w) for w in live]))
    rel = np.eye(n_in, dtype=bool).reshape([_sectors(ast, w) for w in live] + [n_in])
    tracking = True
    for a in ast.layers:
        node = ast.node(a.name)
        missing = [w for w in node.ins if w not in live]
        if missing:
            report.violations.append(Violation(a.name, "wiring", f"wires not live: {', '.join(missing)}"))
            report.status[a.name] = "violation"
            return report
        rest = [w for w in live if w not in node.ins]
        clash = [w for w in node.outs if w in rest]
        if clash or len(set(node.outs)) != len(node.outs):
            report.violations.append(Violation(a.name, "wiring", f"wires already live: {', '.join(clash)}"))
            report.status[a.name] = "violation"
            return report
        if tracking and routes[a.name] is not None:
            order = [live.index(w) for w in node.ins] + [live.index(w) for w in rest] + [len(live)]
            t = rel.transpose(order)
            ni = int(np.prod([_sectors(ast, w) for w in node.ins]))
            nr = int(np.prod([_sectors(ast, w) for w in rest])) if rest else 1
            t = t.reshape(ni, nr * n_in)
            t = bool_matmul(routes[a.name].matrix, t)
            rel = t.reshape([_sectors(ast, w) for w in node.outs]
                            + [_sectors(ast, w) for w in rest] + [n_in])
        else:
            tracking = False
        live = list(node.outs) + rest
    if sorted(live) != sorted(ast.outputs):
        report.violations.append(Violation("output", "wiring",
                                           f"live wires {live} do not match outputs {list(ast.outputs)}"))
        return report
    if not tracking:
        return report
    rel = rel.transpose([live.index(w) for w in ast.outputs] + [len(live)])
    out_space = wires_space(ast, ast.outputs)
    in_space = wires_space(ast, ast.inputs)
    composed = rel.reshape(out_space.n_sectors, n_in)
    report.composed = composed
    try:
        declared = eval_route(ast.output_route, ast, out_space.n_sectors, n_in)
    except RouteShapeError as exc:
        report.violations.append(Violation("output", "shape", str(exc)))
        return report
    for l, k in zip(*np.where(composed & ~declared)):
        report.violations.append(Violation("output", "end-to-end",
                                           "composed route exceeds the declared output route",
                                           in_space.sector_tuple(int(k)), out_space.sector_tuple(int(l))))
    return report
