"""Contract a routed circuit into a single Kraus family."""
from __future__ import annotations

import numpy as np

from .. import channel as ch
from ..sectors import max_leakage
from ..tensor import EQ_TOL, permutation_operator
from .ast import CircuitAST
from .checker import load_payload, node_route, wires_space


class EvalError(ValueError):
    pass


def _dims(ast, names) -> list:
    return [sum(ast.wire(n).sectors) for n in names]


def evaluate(ast: CircuitAST, bindings: dict, payloads: dict | None = None) -> ch.KrausChannel:
    """Channel from the input wires to the output wires with slots filled by ``bindings``.

    Each binding must act on its slot's wires and follow the slot's route.
    """
    slot_names = {s.name for s in ast.slots}
    extra = set(bindings) - slot_names
    if extra:
        raise EvalError(f"unknown slots bound: {', '.join(sorted(extra))}")
    ops = {}
    for s in ast.slots:
        if s.name not in bindings:
            raise EvalError(f"slot {s.name!r} is unbound")
        b = bindings[s.name]
        c = b if isinstance(b, ch.CPMap) else b.channel
        sin, sout = wires_space(ast, s.ins), wires_space(ast, s.outs)
        if (c.dim_in, c.dim_out) != (sin.dim, sout.dim):
            raise EvalError(f"binding for {s.name!r} is {c.dim_in}->{c.dim_out}, "
                            f"slot needs {sin.dim}->{sout.dim}")
        leak = max_leakage(c, sin, sout, node_route(ast, s))
        if leak > EQ_TOL:
            raise EvalError(f"binding for {s.name!r} violates the slot route (leakage {leak:.3e})")
        ops[s.name] = c.kraus
    for g in ast.gates:
        c = load_payload(ast, g.payload, payloads)
        if (c.dim_in, c.dim_out) != (int(np.prod(_dims(ast, g.ins))), int(np.prod(_dims(ast, g.outs)))):
            raise EvalError(f"payload of {g.name!r} does not match its wires")
        ops[g.name] = c.kraus

    live = list(ast.inputs)
    dim_in = int(np.prod(_dims(ast, live)))
    family = [np.eye(dim_in, dtype=complex)]
    for a in ast.layers:
        node = ast.node(a.name)
        if any(w not in live for w in node.ins):
            raise EvalError(f"{a.name!r} consumes wires that are not live")
        rest = [w for w in live if w not in node.ins]
        if any(w in rest for w in node.outs):
            raise EvalError(f"{a.name!r} produces wires that are already live")
        perm = permutation_operator(_dims(ast, live), [live.index(w) for w in node.ins + tuple(rest)])
        eye = np.eye(int(np.prod(_dims(ast, rest))) if rest else 1)
        step = [np.kron(k, eye) @ perm for k in ops[a.name]]
        nxt = []
        for f in family:
            for k in step:
                p = k @ f
                if np.max(np.abs(p)) > ch.PRUNE_TOL:
                    nxt.append(p)
        if not nxt:
            raise EvalError("circuit annihilates every input")
        family = nxt
        live = list(node.outs) + rest
    if sorted(live) != sorted(ast.outputs):
        raise EvalError(f"dangling wires: live {live}, outputs {list(ast.outputs)}")
    perm = permutation_operator(_dims(ast, live), [live.index(w) for w in ast.outputs])
    family = [perm @ f for f in family]
    dim_out = int(np.prod(_dims(ast, ast.outputs)))
    return ch.KrausChannel(dim_in, dim_out, tuple(family))
