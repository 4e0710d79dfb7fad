"""Render a CircuitAST back to ``.rqc`` text."""
from __future__ import annotations

from .ast import CircuitAST, RouteFull, RouteId, RouteLiteral, RouteRef, RouteUnion


def format_matrix(lit: RouteLiteral) -> str:
    return "[" + ", ".join("[" + ", ".join(str(v) for v in row) + "]" for row in lit.rows) + "]"


def format_route(expr) -> str:
    if isinstance(expr, RouteId):
        return "id"
    if isinstance(expr, RouteFull):
        return "full"
    if isinstance(expr, RouteLiteral):
        return format_matrix(expr)
    if isinstance(expr, RouteRef):
        return expr.name + ("^T" if expr.transposed else "")
    if isinstance(expr, RouteUnion):
        return f"{format_route(expr.left)} | {format_route(expr.right)}"
    raise TypeError(f"not a route expression: {expr!r}")


def to_text(ast: CircuitAST) -> str:
    lines = []
    for w in ast.wires:
        lines.append(f"wire {w.name} : [{', '.join(str(d) for d in w.sectors)}];")
    for l in ast.lets:
        lines.append(f"let {l.name} = {format_matrix(l.value)};")
    for g in ast.gates:
        lines.append(f"gate {g.name} : {', '.join(g.ins)} -> {', '.join(g.outs)} "
                     f"route {format_route(g.route)} kraus @{g.payload};")
    for s in ast.slots:
        lines.append(f"slot {s.name} : {', '.join(s.ins)} -> {', '.join(s.outs)} "
                     f"route {format_route(s.route)};")
    lines.append(f"input {', '.join(ast.inputs)};")
    for a in ast.layers:
        lines.append(f"apply {a.name};")
    lines.append(f"output {', '.join(ast.outputs)} route {format_route(ast.output_route)};")
    return "\n".join(lines) + "\n"
