"""The routed form of two-channel control, plus mutated variants for checker tests.

Wires: control ``C`` with sectors ``[1, 1]``; slot wires ``S1``, ``S2``
(inputs) and ``R1``, ``R2`` (outputs) of type ``(1, d)``; the external target
``Tin``/``Tout`` as a single sector. Joint sectors of ``(C, S1, S2)`` are
written ``(p, k, m)``.

* ``enter`` sends ``|0>|psi>`` to ``|0>|vac>|psi>`` and ``|1>|psi>`` to
  ``|1>|psi>|vac>``; its route allows ``p -> (p, k, m)`` only for
  ``(p, k, m)`` in ``{001, 110}``.
* slot ``B`` acts on ``S1 -> R1``, slot ``A`` on ``S2 -> R2``, both with the
  identity route; control 0 therefore runs ``A`` on the target.
* ``leave`` undoes ``enter`` on the two allowed sectors and sends everything
  else to the maximally mixed state on ``C ⊗ Tout``.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .. import channel as ch
from ..supermaps import decoder
from ..tensor import basis_vector, kron_all

ALLOWED = {(0, 0, 1), (1, 1, 0)}
SECTORS = [(p, k, m) for p in (0, 1) for k in (0, 1) for m in (0, 1)]


def _route_rows(allowed) -> list:
    """8x2 matrix: row (p, k, m), column p'."""
    return [[1 if (s in allowed and s[0] == q) else 0 for q in (0, 1)] for s in SECTORS]


def _spill_rows(allowed) -> list:
    """2x8 matrix letting every sector outside ``allowed`` go anywhere."""
    return [[0 if s in allowed else 1 for s in SECTORS] for _ in (0, 1)]


def _fmt(rows) -> str:
    return "[" + ", ".join("[" + ", ".join(str(v) for v in r) + "]" for r in rows) + "]"


def enter_isometry(d: int) -> np.ndarray:
    s = 1 + d
    v = np.zeros((s, d), dtype=complex)
    v[1:] = np.eye(d)
    vac = basis_vector(s, 0)
    p0, p1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    return kron_all([p0, vac, v]) + kron_all([p1, v, vac])


def leave_kraus(d: int) -> list:
    return decoder(enter_isometry(d).conj().T)


def two_ctrl_text(d: int = 2, enter_route: str = "lam", leave_route: str = "lam^T | spill",
              extra_lets: str = "") -> str:
    return f"""# two-channel control as a routed circuit
wire C : [1, 1];
wire Tin : [{d}];
wire Tout : [{d}];
wire S1 : [1, {d}];
wire S2 : [1, {d}];
wire R1 : [1, {d}];
wire R2 : [1, {d}];

# rows (p, k, m) in order 000..111, columns p
let lam = {_fmt(_route_rows(ALLOWED))};
let spill = {_fmt(_spill_rows(ALLOWED))};
{extra_lets}
gate enter : C, Tin -> C, S1, S2 route {enter_route} kraus @enter.json;
slot B : S1 -> R1 route id;
slot A : S2 -> R2 route id;
gate leave : C, R1, R2 -> C, Tout route {leave_route} kraus @leave.json;

input C, Tin;
apply enter (C, Tin);
apply B (S1);
apply A (S2);
apply leave (C, R1, R2);
output C, Tout route id;
"""


def two_ctrl_payloads(d: int = 2) -> dict:
    return {
        "enter.json": ch.channel_to_obj(ch.cp_map([enter_isometry(d)])),
        "leave.json": ch.channel_to_obj(ch.cp_map(leave_kraus(d))),
    }


def write_two_ctrl(directory: str, d: int = 2) -> str:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, "fig6_two_ctrl.rqc")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(two_ctrl_text(d))
    for name, obj in two_ctrl_payloads(d).items():
        with open(os.path.join(directory, name), "w", encoding="utf-8") as fh:
            json.dump(obj, fh)
    return path


def shipped_circuit_path() -> str:
    return str(resources.files("sectorctrl").joinpath("data", "two_ctrl", "fig6_two_ctrl.rqc"))


# -- mutations -------------------------------------------------------------------

@dataclass(frozen=True)
class Mutation:
    name: str
    text: str
    payloads: dict = field(default_factory=dict)


def _rotation(n: int, a: int, b: int, theta: float) -> np.ndarray:
    r = np.eye(n, dtype=complex)
    c, s = np.cos(theta), np.sin(theta)
    r[a, a], r[a, b], r[b, a], r[b, b] = c, -s, s, c
    return r


def _index(d: int, p: int, x: int, y: int) -> int:
    s = 1 + d
    return (p * s + x) * s + y


def mutations(d: int = 2) -> list:
    """Twenty broken variants, either with wrong routes or with leaking gates."""
    base = two_ctrl_payloads(d)
    out = [
        Mutation("enter-route-transposed", two_ctrl_text(d, enter_route="lam^T"), base),
        Mutation("leave-route-transposed", two_ctrl_text(d, leave_route="lam | spill^T"), base),
    ]
    swapped = {(0, 1, 0), (1, 0, 1)}
    lets = (f"let lam_swap = {_fmt(_route_rows(swapped))};\n"
            f"let spill_swap = {_fmt(_spill_rows(swapped))};\n")
    out.append(Mutation("enter-route-legs-swapped", two_ctrl_text(d, enter_route="lam_swap", extra_lets=lets), base))
    out.append(Mutation("leave-route-legs-swapped",
                        two_ctrl_text(d, leave_route="lam_swap^T | spill_swap", extra_lets=lets), base))

    # enter: rotate an allowed image state into a forbidden sector
    iso = enter_isometry(d)
    n = iso.shape[0]
    targets = [
        (_index(d, 0, 0, 1), _index(d, 0, 0, 0), 0.2),
        (_index(d, 0, 0, 1), _index(d, 0, 1, 0), 0.2),
        (_index(d, 0, 0, 1), _index(d, 0, 1, 1), 0.3),
        (_index(d, 0, 0, 1), _index(d, 1, 0, 0), 0.1),
        (_index(d, 0, 0, 2), _index(d, 1, 0, 1), 0.25),
        (_index(d, 1, 1, 0), _index(d, 1, 1, 1), 0.2),
        (_index(d, 1, 2, 0), _index(d, 0, 2, 2), 0.15),
        (_index(d, 1, 1, 0), _index(d, 0, 0, 1), 0.3),
    ]
    for i, (a, b, th) in enumerate(targets):
        k = _rotation(n, a, b, th) @ iso
        pay = dict(base, **{"enter.json": ch.channel_to_obj(ch.cp_map([k]))})
        out.append(Mutation(f"enter-leak-{i}", two_ctrl_text(d), pay))

    # leave: mix the two control branches on the output
    ks = leave_kraus(d)
    m = 2 * d
    for i, (t0, t1, th) in enumerate([(0, 0, 0.1), (0, 1, 0.1), (1, 0, 0.1), (0, d - 1, 0.4)]):
        r = _rotation(m, t0, d + t1, th)
        pay = dict(base, **{"leave.json": ch.channel_to_obj(ch.cp_map([r @ k for k in ks]))})
        out.append(Mutation(f"leave-leak-{i}", two_ctrl_text(d), pay))

    # leave: rotate one allowed input sector into a spill sector first, so
    # only that sector leaks
    for i, (a, b, th) in enumerate([
        (_index(d, 0, 0, 1), _index(d, 0, 0, 0), 0.2),
        (_index(d, 1, 1, 0), _index(d, 1, 1, 1), 0.3),
        (_index(d, 0, 0, d), _index(d, 0, 1, d), 0.25),
        (_index(d, 1, d, 0), _index(d, 1, 0, 0), 0.15),
    ], start=4):
        r = _rotation(n, a, b, th)
        pay = dict(base, **{"leave.json": ch.channel_to_obj(ch.cp_map([k @ r for k in ks]))})
        out.append(Mutation(f"leave-leak-{i}", two_ctrl_text(d), pay))
    return out
