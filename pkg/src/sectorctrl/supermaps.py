"""Control supermaps evaluated by contracting their circuits.

Every circuit is a list of ``Layer`` objects acting on the full multi-wire
space; contraction multiplies Kraus operators layer by layer. Input channels
may carry auxiliary wires, in which case the supermap acts as the identity on
them.

Conventions shared by all circuits:

* the embedding ``V`` maps the target into the working sector of a ``(1, d)``
  space, and ``s0`` is the vacuum vector (index 0);
* the decoder keeps ``W rho W^†`` for the coisometry ``W`` that undoes the
  preparation and sends everything else to a fixed state (maximally mixed on
  control ⊗ target by default).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import null_space

from . import channel as ch
from .channel import CPMap, KrausChannel
from .control import (CHANNEL_FIRST, IDENTITY_FIRST, ControlledChannel, coherence_block,
                      numerical_rank)
from .rng import as_stream
from .sectors import (PartitionedSpace, ProductSpace, Route, RoutedKrausChannel,
                      SectorPreserving1d, build_isometric_sp, max_leakage, random_route_follower)
from .tensor import (EQ_TOL, as_matrix, basis_vector, dag, embed_operator, is_isometry,
                     ketbra, kron_all, permutation_operator)

PRUNE_TOL = ch.PRUNE_TOL


@dataclass(frozen=True)
class Layer:
    name: str
    kraus: tuple


@dataclass(frozen=True)
class DecodeLayer:
    """``rho -> W rho W^† + rho0 Tr[(I - W^† W) rho]`` on the leading wires, identity on ``n_rest``.

    Contracted in factored form: the discarded part of the incoming family is
    gathered into one CP map and re-expanded with a minimal Kraus list, which
    avoids materialising one Kraus operator per kernel vector.
    """

    name: str
    w: np.ndarray
    rho0: np.ndarray | None = None
    n_rest: int = 1

    @property
    def kraus(self) -> tuple:
        return tuple(_lift(k, self.n_rest) for k in decoder(self.w, self.rho0))

    def absorb(self, family: list) -> list:
        w = as_matrix(self.w)
        n_out, n_in = w.shape
        x = self.n_rest
        kernel = null_space(w)
        kept = [p for p in (np.kron(w, np.eye(x)) @ f for f in family)
                if np.max(np.abs(p)) > PRUNE_TOL]
        if kernel.shape[1] == 0:
            return kept
        dim_in = family[0].shape[1]
        trash = []
        for f in family:
            t = np.einsum("nr,nxi->rxi", kernel.conj(), f.reshape(n_in, x, dim_in))
            trash.extend(t[b] for b in range(t.shape[0]) if np.max(np.abs(t[b])) > PRUNE_TOL)
        if not trash:
            return kept
        small = ch.minimal_kraus(CPMap(dim_in, x, tuple(trash))).kraus
        if self.rho0 is None:
            probs, vecs = np.full(n_out, 1.0 / n_out), np.eye(n_out, dtype=complex)
        else:
            probs, vecs = np.linalg.eigh(as_matrix(self.rho0))
        for a in range(n_out):
            if probs[a] > 1e-15:
                e = np.sqrt(probs[a]) * vecs[:, a].reshape(-1, 1)
                kept.extend(np.kron(e, m) for m in small)
        return kept


def contract(layers: Sequence) -> CPMap:
    """Kraus family of the sequential composition, first layer applied first."""
    family = [as_matrix(k) for k in layers[0].kraus]
    for layer in layers[1:]:
        if isinstance(layer, DecodeLayer):
            nxt = layer.absorb(family)
        else:
            nxt = []
            for f in family:
                for k in layer.kraus:
                    p = k @ f
                    if np.max(np.abs(p)) > PRUNE_TOL:
                        nxt.append(p)
        if not nxt:
            raise ValueError("circuit annihilates every input")
        family = nxt
    dout, din = family[0].shape
    return CPMap(din, dout, tuple(family))


def embedding(d: int) -> np.ndarray:
    """``V``: target of dim ``d`` into the working sector of a ``(1, d)`` space."""
    v = np.zeros((1 + d, d), dtype=complex)
    v[1:, :] = np.eye(d)
    return v


def decoder(w, rho0=None) -> list:
    """Kraus operators of ``rho -> W rho W^† + rho0 Tr[(I - W^† W) rho]``.

    ``w`` must be a coisometry. The trash part uses ``sqrt(p_a) |e_a><f_b|``
    over an eigenbasis of ``rho0`` and an orthonormal basis of ``ker W``.
    """
    w = as_matrix(w)
    n_out = w.shape[0]
    if not is_isometry(dag(w)):
        raise ValueError("decoder needs a coisometry")
    if rho0 is None:
        probs, vecs = np.full(n_out, 1.0 / n_out), np.eye(n_out, dtype=complex)
    else:
        probs, vecs = np.linalg.eigh(as_matrix(rho0))
    kernel = null_space(w)
    out = [w]
    for a in range(n_out):
        if probs[a] <= 1e-15:
            continue
        for b in range(kernel.shape[1]):
            out.append(np.sqrt(probs[a]) * np.outer(vecs[:, a], kernel[:, b].conj()))
    return out


def controlled_permutation(n_ctrl: int, wire_dims: Sequence[int], orders: Sequence) -> np.ndarray:
    """``sum_c |c><c| ⊗ Perm(orders[c])`` on control ⊗ wires."""
    total = int(np.prod(wire_dims))
    out = np.zeros((n_ctrl * total, n_ctrl * total), dtype=complex)
    for c, order in enumerate(orders):
        out += np.kron(ketbra(n_ctrl, c, c), permutation_operator(wire_dims, order))
    return out


def _lift(op, n_rest: int) -> np.ndarray:
    return np.kron(as_matrix(op), np.eye(n_rest))


def _input_layer(name, kraus, targets, dims_in, dims_out) -> Layer:
    return Layer(name, tuple(embed_operator(k, targets, dims_in, dims_out) for k in kraus))


# -- CTRL ------------------------------------------------------------------

def ctrl_layers(c: CPMap, d: int, x_in: int = 1, x_out: int = 1, rho0=None) -> list:
    """Circuit for standard control of a channel on ``(1, d) ⊗ X``.

    Wires after preparation: control, S1, S2, X. S1 carries the embedded
    target and S2 the vacuum; the controlled swap sends the target into the
    channel's slot (S2) only when the control is 1.
    """
    s = 1 + d
    if (c.dim_in, c.dim_out) != (s * x_in, s * x_out):
        raise ValueError(f"input channel must act on ({s}x{x_in}) -> ({s}x{x_out})")
    v, s0 = embedding(d), basis_vector(s, 0)
    prep = _lift(kron_all([np.eye(2), v, s0]), x_in)
    swap_in = _lift(controlled_permutation(2, [s, s], [[0, 1], [1, 0]]), x_in)
    swap_out = _lift(controlled_permutation(2, [s, s], [[0, 1], [1, 0]]), x_out)
    w = kron_all([np.eye(2), dag(v), dag(s0)])
    return [
        Layer("prepare", (prep,)),
        Layer("ctrl_swap_1", (swap_in,)),
        _input_layer("input", c.kraus, [2, 3], [2, s, s, x_in], [2, s, s, x_out]),
        Layer("ctrl_swap_2", (swap_out,)),
        DecodeLayer("decode", w, rho0, x_out),
    ]


def ctrl_extended(c: CPMap, d: int, x_in: int = 1, x_out: int = 1, drop: Sequence[str] = (),
                  rho0=None) -> CPMap:
    layers = [l for l in ctrl_layers(c, d, x_in, x_out, rho0) if l.name not in drop]
    return contract(layers)


def _as_channel(c: CPMap) -> KrausChannel:
    return KrausChannel(c.dim_in, c.dim_out, c.kraus)


def ctrl_apply(s: SectorPreserving1d, rho0=None) -> ControlledChannel:
    """Standard control of the working-sector channel, pinned by its vacuum coherence."""
    if not isinstance(s, SectorPreserving1d):
        raise TypeError("expected a sector-preserving channel of type (1, d)")
    if s.d_in != s.d_out:
        raise ValueError("control needs matching input and output sectors")
    out = ctrl_extended(s.channel, s.d_in, rho0=rho0)
    return ControlledChannel(2, s.d_in, s.d_in, _as_channel(out), IDENTITY_FIRST)


# -- CTRL inverse ------------------------------------------------------------------

def ctrl_inverse_layers(c: CPMap, d: int, sigma=None) -> list:
    """``W ∘ c ∘ V`` with ``V s0 = |0>|e0>`` and ``V (0 ⊕ psi) = |1> psi``."""
    s = 1 + d
    v = np.zeros((2 * d, s), dtype=complex)
    v[0, 0] = 1.0
    v[d:, 1:] = np.eye(d)
    return [
        Layer("encode", (v,)),
        Layer("input", tuple(c.kraus)),
        DecodeLayer("decode", dag(v), sigma),
    ]


def ctrl_inverse_apply(cc: ControlledChannel) -> SectorPreserving1d:
    if cc.control_dim != 2 or cc.target_in != cc.target_out or cc.convention != IDENTITY_FIRST:
        raise ValueError("expected a standard qubit-controlled channel")
    d = cc.target_in
    out = _as_channel(contract(ctrl_inverse_layers(cc.channel, d)))
    space = PartitionedSpace((1, d))
    try:
        routed = RoutedKrausChannel(space, space, Route.identity(2), out)
        return SectorPreserving1d(routed)
    except ValueError as exc:
        raise ValueError("input is not of controlled form") from exc


# -- 2-CTRL ----------------------------------------------------------------

def two_ctrl_layers(a: CPMap, b: CPMap, d_in: int, d_out: int,
                    x: tuple = (1, 1), y: tuple = (1, 1), rho0=None) -> list:
    """Circuit controlling between two channels on ``(1, d_in) -> (1, d_out)``.

    Wires: control, S1, S2, X, Y. The first channel acts on (S1, X) and the
    second on (S2, Y); with control 0 the target sits in S1.
    """
    si, so = 1 + d_in, 1 + d_out
    (xi, xo), (yi, yo) = x, y
    if (a.dim_in, a.dim_out) != (si * xi, so * xo) or (b.dim_in, b.dim_out) != (si * yi, so * yo):
        raise ValueError("input channel dims do not match the declared sectors and aux legs")
    vi, vo = embedding(d_in), embedding(d_out)
    prep = _lift(kron_all([np.eye(2), vi, basis_vector(si, 0)]), xi * yi)
    swap = [[0, 1], [1, 0]]
    w = kron_all([np.eye(2), dag(vo), dag(basis_vector(so, 0))])
    return [
        Layer("prepare", (prep,)),
        Layer("ctrl_swap_1", (_lift(controlled_permutation(2, [si, si], swap), xi * yi),)),
        _input_layer("input_a", a.kraus, [1, 3], [2, si, si, xi, yi], [2, so, si, xo, yi]),
        _input_layer("input_b", b.kraus, [2, 4], [2, so, si, xo, yi], [2, so, so, xo, yo]),
        Layer("ctrl_swap_2", (_lift(controlled_permutation(2, [so, so], swap), xo * yo),)),
        DecodeLayer("decode", w, rho0, xo * yo),
    ]


def _sector_dims(s) -> tuple[int, int]:
    r = s.routed if isinstance(s, SectorPreserving1d) else s
    if r.space_in.sector_dims[0] != 1 or r.space_out.sector_dims[0] != 1 \
            or r.space_in.n_sectors != 2 or r.space_out.n_sectors != 2:
        raise ValueError("expected a channel of type (1, d_in) -> (1, d_out)")
    if r.route != Route.identity(2):
        raise ValueError("input does not follow the identity route")
    return r.space_in.sector_dims[1], r.space_out.sector_dims[1]


def two_ctrl_apply(a, b) -> ControlledChannel:
    """Control between two sector-preserving channels; control 0 selects ``a``."""
    da, db = _sector_dims(a), _sector_dims(b)
    if da != db:
        raise ValueError(f"sector dims differ: {da} vs {db}")
    out = contract(two_ctrl_layers(a.channel, b.channel, *da))
    return ControlledChannel(2, da[0], da[1], _as_channel(out), IDENTITY_FIRST)


def two_ctrl_e_apply(a, b, d_env: int) -> ControlledChannel:
    """2-CTRL with an environment factor in the output sector, then discarded.

    Each input's working output sector is read as ``S_out ⊗ E`` with ``E`` the
    least significant factor of dimension ``d_env``.
    """
    (di, dbig), db = _sector_dims(a), _sector_dims(b)
    if (di, dbig) != db:
        raise ValueError("inputs must have the same type")
    if dbig % d_env:
        raise ValueError(f"output sector {dbig} is not divisible by d_E = {d_env}")
    cc = two_ctrl_apply(a, b)
    d_out = dbig // d_env
    ks = []
    for k in cc.channel.kraus:
        for e in range(d_env):
            bra = kron_all([np.eye(2 * d_out), dag(basis_vector(d_env, e))])
            ks.append(bra @ k)
    ks = [k for k in ks if np.max(np.abs(k)) > PRUNE_TOL]
    return ControlledChannel(2, di, d_out, KrausChannel(2 * di, 2 * d_out, tuple(ks)), IDENTITY_FIRST)


def purification_input(kraus: Sequence) -> RoutedKrausChannel:
    """``1 ⊕ sum_i K_i ⊗ |i>_E``: a sector-preserving isometry whose discarded E gives back the channel."""
    ks = [as_matrix(k) for k in kraus]
    n = len(ks)
    iso = sum(np.kron(k, basis_vector(n, i)) for i, k in enumerate(ks))
    return build_isometric_sp(iso)


def coherence_rank(cc: ControlledChannel, rel_tol: float = 1e-9) -> int:
    return numerical_rank(coherence_block(cc, 0, 1), rel_tol)


# -- CTRL_(2) -------------------------------------------------------------------

CPERM_ORDERS = ([0, 1, 2], [2, 0, 1], [1, 2, 0])
CPERM_INVERSE = ([0, 1, 2], [1, 2, 0], [2, 0, 1])


def ctrl2_layers(c: CPMap, d: int, x_in: int = 1, x_out: int = 1, rho0=None) -> list:
    """Circuit for control with two do-nothing branches of a channel on ``(d, 1, 1) ⊗ X``.

    Wires: control (3), a, b, c, X. Preparation puts the embedded target in a,
    the second unit-sector vector in b and the first in c. The controlled
    cyclic permutation feeds wire a to the channel: the target for control 0,
    the first unit vector for control 1, the second for control 2.
    """
    s = d + 2
    if (c.dim_in, c.dim_out) != (s * x_in, s * x_out):
        raise ValueError(f"input channel must act on ({s}x{x_in}) -> ({s}x{x_out})")
    v0 = np.zeros((s, d), dtype=complex)
    v0[:d, :] = np.eye(d)
    s1, s2 = basis_vector(s, d), basis_vector(s, d + 1)
    prep = _lift(kron_all([np.eye(3), v0, s2, s1]), x_in)
    perm = controlled_permutation(3, [s, s, s], CPERM_ORDERS)
    unperm = controlled_permutation(3, [s, s, s], CPERM_INVERSE)
    w = kron_all([np.eye(3), dag(v0), dag(s2), dag(s1)])
    return [
        Layer("prepare", (prep,)),
        Layer("cperm", (_lift(perm, x_in),)),
        _input_layer("input", c.kraus, [1, 4], [3, s, s, s, x_in], [3, s, s, s, x_out]),
        Layer("cperm_inverse", (_lift(unperm, x_out),)),
        DecodeLayer("decode", w, rho0, x_out),
    ]


def ctrl2_apply(s: RoutedKrausChannel) -> ControlledChannel:
    dims = s.space_in.sector_dims
    if len(dims) != 3 or dims[1:] != (1, 1) or s.space_out.sector_dims != dims:
        raise ValueError("expected a channel of type (d, 1, 1)")
    if s.route != Route.identity(3):
        raise ValueError("input does not follow the identity route")
    d = dims[0]
    out = contract(ctrl2_layers(s.channel, d))
    return ControlledChannel(3, d, d, _as_channel(out), CHANNEL_FIRST)


# -- sampling verifier -------------------------------------------------------------

@dataclass(frozen=True)
class Slot:
    space_in: PartitionedSpace
    space_out: PartitionedSpace
    route: Route


@dataclass(frozen=True)
class RoutedSupermap:
    """A supermap given by its input slots, output type and extended action.

    ``apply(channels, aux)`` receives one channel per slot, each on
    ``slot space ⊗ X_in -> slot space ⊗ X_out``, and ``aux`` as a list of
    ``(x_in, x_out)`` pairs. It returns the output channel on
    ``P ⊗ X1_in ⊗ X2_in ... -> F ⊗ X1_out ⊗ ...``.
    """

    name: str
    slots: tuple
    out_in: PartitionedSpace
    out_out: PartitionedSpace
    out_route: Route
    apply: Callable = field(compare=False)


def ctrl_supermap(d: int = 2, drop: Sequence[str] = ()) -> RoutedSupermap:
    s = PartitionedSpace((1, d))
    ctl = PartitionedSpace((d, d))

    def run(chs, aux):
        (xi, xo), = aux
        return ctrl_extended(chs[0], d, xi, xo, drop=drop)

    name = "CTRL" if not drop else "CTRL-broken"
    return RoutedSupermap(name, (Slot(s, s, Route.identity(2)),), ctl, ctl, Route.identity(2), run)


def broken_ctrl_supermap(d: int = 2) -> RoutedSupermap:
    """CTRL with the second controlled swap removed; it must fail verification."""
    return ctrl_supermap(d, drop=("ctrl_swap_2",))


def two_ctrl_supermap(d_in: int = 2, d_out: int = 2) -> RoutedSupermap:
    si, so = PartitionedSpace((1, d_in)), PartitionedSpace((1, d_out))

    def run(chs, aux):
        return contract(two_ctrl_layers(chs[0], chs[1], d_in, d_out, aux[0], aux[1]))

    slot = Slot(si, so, Route.identity(2))
    return RoutedSupermap("2-CTRL", (slot, slot), PartitionedSpace((d_in, d_in)),
                        PartitionedSpace((d_out, d_out)), Route.identity(2), run)


def ctrl2_supermap(d: int = 2) -> RoutedSupermap:
    s = PartitionedSpace((d, 1, 1))
    ctl = PartitionedSpace((d, d, d))

    def run(chs, aux):
        (xi, xo), = aux
        return contract(ctrl2_layers(chs[0], d, xi, xo))

    return RoutedSupermap("CTRL_2", (Slot(s, s, Route.identity(3)),), ctl, ctl, Route.identity(3), run)


SUPERMAPS = {"CTRL": ctrl_supermap, "2-CTRL": two_ctrl_supermap, "CTRL_2": ctrl2_supermap}


def _with_aux(space, dims: Sequence[int]):
    if all(x == 1 for x in dims):
        return space
    return ProductSpace((space,) + tuple(PartitionedSpace((x,)) for x in dims))


def verify_routed_supermap(sup: RoutedSupermap, aux_dims: Sequence[int] = (1, 2, 3),
                           trials: int = 50, seed=0, tol: float = EQ_TOL) -> dict:
    """Sample route-following inputs with auxiliary legs and check the output type.

    A falsifier, not a proof: each trial draws aux dimensions from
    ``aux_dims``, a random route follower per slot on the enlarged spaces,
    applies the supermap and records route leakage and trace-preservation
    defect of the result.
    """
    base = as_stream(seed)
    passes, worst_leak, worst_tp, failures = 0, 0.0, 0.0, []
    for t in range(trials):
        rng = base.spawn(t)
        aux, chans = [], []
        for slot in sup.slots:
            xi, xo = rng.choice(list(aux_dims)), rng.choice(list(aux_dims))
            aux.append((xi, xo))
            sin = _with_aux(slot.space_in, [xi])
            sout = _with_aux(slot.space_out, [xo])
            chans.append(random_route_follower(sin, sout, slot.route, rng.spawn(len(chans))))
        out = sup.apply(chans, aux)
        pin = _with_aux(sup.out_in, [a[0] for a in aux])
        pout = _with_aux(sup.out_out, [a[1] for a in aux])
        leak = max_leakage(out, pin, pout, sup.out_route)
        tp = out.tp_defect()
        worst_leak, worst_tp = max(worst_leak, leak), max(worst_tp, tp)
        if leak <= tol and tp <= tol:
            passes += 1
        else:
            failures.append({"trial": t, "aux": [list(a) for a in aux],
                             "leakage": leak, "tp_defect": tp})
    return {"trials": trials, "passes": passes, "worst_leakage": worst_leak,
            "worst_tp_defect": worst_tp, "failures": failures}
