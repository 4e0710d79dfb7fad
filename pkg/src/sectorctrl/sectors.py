"""Partitioned Hilbert spaces, routes and sector-preserving channels.

Two sector layouts are used:

* type ``(1, d)``: sector 0 is one-dimensional (the "vacuum"), sector 1 holds
  the ``d``-dimensional working space;
* type ``(d, 1, ..., 1)``: sector 0 is the ``d``-dimensional space and the
  remaining sectors are one-dimensional.

A route is a Boolean matrix with one row per output sector and one column per
input sector.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from . import channel as ch
from .channel import CPMap, KrausChannel, PinnedChannel
from .rng import as_stream
from .tensor import EQ_TOL, as_matrix, dag, direct_sum, is_isometry, qr_isometry


# -- spaces ----------------------------------------------------------------

@dataclass(frozen=True)
class PartitionedSpace:
    sector_dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.sector_dims)
        if not dims:
            raise ValueError("a partitioned space needs at least one sector")
        if any(d < 1 for d in dims):
            raise ValueError(f"sector dimensions must be positive, got {dims}")
        object.__setattr__(self, "sector_dims", dims)

    @property
    def dim(self) -> int:
        return sum(self.sector_dims)

    @property
    def n_sectors(self) -> int:
        return len(self.sector_dims)

    def offset(self, k: int) -> int:
        return sum(self.sector_dims[:k])

    def indices(self, k: int) -> np.ndarray:
        o = self.offset(k)
        return np.arange(o, o + self.sector_dims[k])

    def projector(self, k: int) -> np.ndarray:
        return _projector(self.dim, self.indices(k))

    def __str__(self):
        return "[" + ", ".join(str(d) for d in self.sector_dims) + "]"


@dataclass(frozen=True)
class ProductSpace:
    """Tensor product of partitioned spaces.

    Joint sectors are tuples of factor sectors, numbered row-major (first
    factor most significant). A joint sector is generally not a contiguous
    block of basis indices.
    """

    factors: tuple

    def __post_init__(self):
        fs = tuple(f if isinstance(f, (PartitionedSpace, ProductSpace)) else PartitionedSpace(f)
                   for f in self.factors)
        if not fs:
            raise ValueError("empty product")
        object.__setattr__(self, "factors", fs)

    @property
    def dim(self) -> int:
        return int(np.prod([f.dim for f in self.factors]))

    @property
    def n_sectors(self) -> int:
        return int(np.prod([f.n_sectors for f in self.factors]))

    @property
    def sector_dims(self) -> tuple:
        return tuple(len(self.indices(k)) for k in range(self.n_sectors))

    def sector_tuple(self, k: int) -> tuple:
        return tuple(int(i) for i in np.unravel_index(k, [f.n_sectors for f in self.factors]))

    def indices(self, k: int) -> np.ndarray:
        parts = [f.indices(s) for f, s in zip(self.factors, self.sector_tuple(k))]
        dims = [f.dim for f in self.factors]
        out = [int(np.ravel_multi_index(t, dims)) for t in product(*parts)]
        return np.array(sorted(out), dtype=int)

    def projector(self, k: int) -> np.ndarray:
        return _projector(self.dim, self.indices(k))


def _projector(dim: int, idx) -> np.ndarray:
    p = np.zeros((dim, dim), dtype=complex)
    p[idx, idx] = 1.0
    return p


def as_space(s) -> PartitionedSpace | ProductSpace:
    if isinstance(s, (PartitionedSpace, ProductSpace)):
        return s
    return PartitionedSpace(tuple(s))


# -- routes ----------------------------------------------------------------

@dataclass(frozen=True)
class Route:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=bool)
        if m.ndim != 2 or m.size == 0:
            raise ValueError("a route is a non-empty Boolean matrix")
        empty = np.where(~m.any(axis=0))[0]
        if empty.size:
            raise ValueError(f"input sector {int(empty[0])} has no allowed output sector")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_out(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_in(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def identity(cls, n: int) -> "Route":
        return cls(np.eye(n, dtype=bool))

    @classmethod
    def full(cls, n_out: int, n_in: int) -> "Route":
        return cls(np.ones((n_out, n_in), dtype=bool))

    def allows(self, k: int, l: int) -> bool:
        """Whether input sector ``k`` may reach output sector ``l``."""
        return bool(self.matrix[l, k])

    def transpose(self) -> "Route":
        return Route(self.matrix.T)

    def to_obj(self) -> list:
        return [[bool(x) for x in row] for row in self.matrix]

    def __eq__(self, other):
        return isinstance(other, Route) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes() + bytes(self.matrix.shape))


def bool_matmul(a, b) -> np.ndarray:
    return (np.asarray(a, dtype=int) @ np.asarray(b, dtype=int)) > 0


def route_compose(first: Route, second: Route) -> Route:
    """Relation of ``first`` followed by ``second`` (OR of ANDs)."""
    if first.n_out != second.n_in:
        raise ValueError(f"cannot compose routes: {first.n_out} outputs vs {second.n_in} inputs")
    return Route(bool_matmul(second.matrix, first.matrix))


def route_tensor(*routes: Route) -> Route:
    m = np.ones((1, 1), dtype=int)
    for r in routes:
        m = np.kron(m, r.matrix.astype(int))
    return Route(m > 0)


# -- follows-route -----------------------------------------------------------

def route_leakage(c: CPMap, space_in, space_out, route: Route) -> list:
    """Leakage into forbidden sector pairs.

    Returns ``(k, l, norm)`` for every input sector ``k`` and forbidden output
    sector ``l``, where ``norm`` is the operator norm of
    ``sqrt(sum_i (Q_l K_i P_k)^† (Q_l K_i P_k))``; this does not depend on the
    Kraus representation.
    """
    space_in, space_out = as_space(space_in), as_space(space_out)
    if (c.dim_in, c.dim_out) != (space_in.dim, space_out.dim):
        raise ValueError(f"channel {c.dim_in}->{c.dim_out} does not match spaces "
                         f"{space_in.dim}->{space_out.dim}")
    if (route.n_in, route.n_out) != (space_in.n_sectors, space_out.n_sectors):
        raise ValueError("route shape does not match sector counts")
    stack = np.stack(c.kraus)
    out = []
    for k in range(space_in.n_sectors):
        cols = space_in.indices(k)
        for l in range(space_out.n_sectors):
            if route.allows(k, l):
                continue
            rows = space_out.indices(l)
            blocks = stack[:, rows][:, :, cols]
            gram = np.einsum("iab,iac->bc", blocks.conj(), blocks)
            norm = float(np.sqrt(max(np.linalg.norm(gram, 2), 0.0))) if gram.size else 0.0
            out.append((k, l, norm))
    return out


def max_leakage(c: CPMap, space_in, space_out, route: Route) -> float:
    leaks = route_leakage(c, space_in, space_out, route)
    return max((n for _, _, n in leaks), default=0.0)


def follows_route(c: CPMap, space_in, space_out, route: Route, tol: float = EQ_TOL) -> bool:
    return max_leakage(c, space_in, space_out, route) <= tol


@dataclass(frozen=True)
class RoutedKrausChannel:
    space_in: PartitionedSpace
    space_out: PartitionedSpace
    route: Route
    channel: KrausChannel

    def __post_init__(self):
        object.__setattr__(self, "space_in", as_space(self.space_in))
        object.__setattr__(self, "space_out", as_space(self.space_out))
        leak = max_leakage(self.channel, self.space_in, self.space_out, self.route)
        if leak > EQ_TOL:
            raise ValueError(f"channel does not follow its route (leakage {leak:.3e})")

    def to_obj(self) -> dict:
        obj = ch.channel_to_obj(self.channel)
        obj["sectors_in"] = list(self.space_in.sector_dims)
        obj["sectors_out"] = list(self.space_out.sector_dims)
        obj["route"] = self.route.to_obj()
        return obj


def routed_from_obj(obj: dict) -> RoutedKrausChannel:
    return RoutedKrausChannel(PartitionedSpace(tuple(obj["sectors_in"])),
                              PartitionedSpace(tuple(obj["sectors_out"])),
                              Route(np.array(obj["route"], dtype=bool)),
                              ch.channel_from_obj(obj))


def _vacuum_amplitudes(c: CPMap) -> np.ndarray:
    return np.array([k[0, 0] for k in c.kraus], dtype=complex)


@dataclass(frozen=True)
class SectorPreserving1d:
    """Sector-preserving channel of type ``(1, d_in) -> (1, d_out)``."""

    routed: RoutedKrausChannel

    def __post_init__(self):
        r = self.routed
        if r.space_in.n_sectors != 2 or r.space_in.sector_dims[0] != 1 \
                or r.space_out.n_sectors != 2 or r.space_out.sector_dims[0] != 1:
            raise ValueError("expected spaces of type (1, d)")
        if r.route != Route.identity(2):
            raise ValueError("expected the identity route")
        vac = float(np.sum(np.abs(_vacuum_amplitudes(r.channel)) ** 2))
        if abs(vac - 1.0) > 1e-9:
            raise ValueError("channel does not act as the identity on the vacuum sector")

    @property
    def channel(self) -> KrausChannel:
        return self.routed.channel

    @property
    def d_in(self) -> int:
        return self.routed.space_in.sector_dims[1]

    @property
    def d_out(self) -> int:
        return self.routed.space_out.sector_dims[1]


def _wrap_1d(kraus: Sequence, d_in: int, d_out: int) -> SectorPreserving1d:
    c = KrausChannel(1 + d_in, 1 + d_out, tuple(kraus))
    return SectorPreserving1d(RoutedKrausChannel(
        PartitionedSpace((1, d_in)), PartitionedSpace((1, d_out)), Route.identity(2), c))


def sector_preserving_from_amplitudes(amplitudes: Sequence[complex], kraus: Sequence) -> SectorPreserving1d:
    """Channel with Kraus operators ``a_i ⊕ K_i``; requires ``sum |a_i|^2 = 1``."""
    ks = [as_matrix(k) for k in kraus]
    a = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if a.size != len(ks):
        raise ValueError("one amplitude per Kraus operator")
    if abs(np.sum(np.abs(a) ** 2) - 1.0) > 1e-9:
        raise ValueError("vacuum amplitudes must be normalised")
    d_out, d_in = ks[0].shape
    return _wrap_1d([direct_sum([ai, k]) for ai, k in zip(a, ks)], d_in, d_out)


def build_sector_preserving_1d(p: PinnedChannel) -> SectorPreserving1d:
    ks = p.channel.kraus
    if np.linalg.norm(ks[0] - p.pin) > 1e-10:
        raise ValueError("the pin must be the first Kraus operator; canonicalize first")
    return sector_preserving_from_amplitudes([1.0] + [0.0] * (len(ks) - 1), ks)


def build_isometric_sp(v) -> RoutedKrausChannel:
    v = as_matrix(v)
    if not is_isometry(v):
        raise ValueError("expected an isometry")
    return _wrap_1d([direct_sum([1.0, v])], v.shape[1], v.shape[0]).routed


def linear_extension(c: CPMap, x) -> np.ndarray:
    """``sum_i K_i x K_i^†`` for an arbitrary (not necessarily Hermitian) ``x``."""
    x = as_matrix(x)
    return sum(k @ x @ dag(k) for k in c.kraus)


def extract_pin(s: SectorPreserving1d) -> PinnedChannel:
    """Recover the working-sector channel and the operator coherent with the vacuum."""
    c = s.channel
    d_in, d_out = s.d_in, s.d_out
    alpha = _vacuum_amplitudes(c)
    vac = float(np.sum(np.abs(alpha) ** 2))
    if abs(vac - 1.0) > 1e-9:
        raise ValueError("channel does not act as the identity on the vacuum sector")
    pin = np.zeros((d_out, d_in), dtype=complex)
    for j in range(d_in):
        x = np.zeros((1 + d_in, 1 + d_in), dtype=complex)
        x[0, 1 + j] = 1.0
        # image is |vac><pin v_j|, read the row back
        pin[:, j] = linear_extension(c, x)[0, 1:].conj()
    inner = [k[1:, 1:] for k in c.kraus]
    out = ch.canonicalize_pinned(inner, alpha / np.sqrt(vac))
    if np.linalg.norm(out.pin - pin) > 1e-8:
        raise ValueError("vacuum coherence is inconsistent with the Kraus amplitudes")
    return out


# -- composite (d, 1, ..., 1) structure -----------------------------------------

def amplitude_matrix(gammas, m: int, tol: float = 1e-12) -> np.ndarray:
    """Upper-triangular ``R`` with ``R[j, k] = gamma_jk`` above the diagonal.

    The diagonal is ``R[j, j] = sqrt(1 - sum_{i<j} |gamma_ij|^2)`` so every
    column of ``R`` has unit norm. Indices are zero-based.
    """
    g = np.zeros((m, m), dtype=complex) if gammas is None else np.asarray(gammas, dtype=complex)
    if g.shape != (m, m):
        raise ValueError(f"gammas must be {m}x{m}")
    if np.any(np.abs(np.tril(g)) > 0):
        raise ValueError("gammas must be strictly upper triangular")
    if np.any(np.abs(g) > 1 + tol):
        raise ValueError("amplitudes must have modulus at most 1")
    r = np.triu(g, 1).astype(complex)
    for j in range(m):
        rest = 1.0 - float(np.sum(np.abs(g[:j, j]) ** 2))
        if rest < -tol:
            raise ValueError(f"infeasible amplitudes in column {j}: 1 - sum = {rest:.3e}")
        r[j, j] = np.sqrt(max(rest, 0.0))
    return r


def composite_kraus_parts(c: KrausChannel, pins: Sequence, gammas) -> tuple[list, np.ndarray]:
    """Working-sector operators and the matching amplitude rows.

    Returns ``(ops, amps)`` where ``ops`` is the pins followed by a Kraus list
    of the remainder channel and ``amps[i, k]`` is the amplitude of operator
    ``i`` on the ``k``-th one-dimensional sector.
    """
    m = len(pins)
    pins = [as_matrix(p) for p in pins]
    for p in pins:
        if p.shape != (c.dim_out, c.dim_in):
            raise ValueError("pin shape does not match channel")
    r = amplitude_matrix(gammas, m)
    try:
        rest = ch.remainder(c, pins)
    except ValueError as exc:
        raise ValueError("pins are not jointly valid for the channel") from exc
    ops = pins + ([] if rest is None else list(rest.kraus))
    amps = np.zeros((len(ops), m), dtype=complex)
    amps[:m] = r
    return ops, amps


def build_sector_preserving_composite(c: KrausChannel, pins: Sequence, gammas) -> RoutedKrausChannel:
    """Sector-preserving channel on ``(d, 1, ..., 1)`` with ``len(pins)`` unit sectors."""
    if c.dim_in != c.dim_out:
        raise ValueError("expected a channel on a single space")
    m = len(pins)
    ops, amps = composite_kraus_parts(c, pins, gammas)
    ks = [direct_sum([op] + list(a)) for op, a in zip(ops, amps)]
    d = c.dim_in
    space = PartitionedSpace((d,) + (1,) * m)
    return RoutedKrausChannel(space, space, Route.identity(m + 1), KrausChannel(d + m, d + m, tuple(ks)))


def build_sector_preserving_d11(c: KrausChannel, pin1, pin2, gamma12: complex) -> RoutedKrausChannel:
    if abs(gamma12) > 1 + 1e-12:
        raise ValueError("|gamma12| must be at most 1")
    g = np.zeros((2, 2), dtype=complex)
    g[0, 1] = gamma12
    return build_sector_preserving_composite(c, [pin1, pin2], g)


@dataclass(frozen=True)
class CompositeSolution:
    pins: tuple
    amplitudes: np.ndarray  # the upper-triangular R
    undetermined: tuple     # zero-based indices of pins not fixed by the data


def solve_composite(cross: Sequence, overlaps, tol: float = 1e-9) -> CompositeSolution:
    """Invert the composite parametrisation from representation-free data.

    ``cross[k] = sum_j conj(R[j, k]) P_j`` and ``overlaps = R^† R``. ``R`` is
    recovered by a Cholesky factorisation done column by column so that a
    vanishing diagonal (modulus-one amplitudes) is tolerated; the matching pin
    is then reported as undetermined and set to zero.
    """
    h = np.asarray(overlaps, dtype=complex)
    m = h.shape[0]
    if np.linalg.norm(np.diag(h) - 1.0) > tol:
        raise ValueError("unit sectors are not preserved")
    r = np.zeros((m, m), dtype=complex)
    dead = []
    for k in range(m):
        for j in range(k):
            if j in dead:
                continue
            r[j, k] = (h[j, k] - np.vdot(r[:j, j], r[:j, k])) / r[j, j]
        rest = float(np.real(h[k, k] - np.vdot(r[:k, k], r[:k, k])))
        if rest < -1e-7:
            raise ValueError("overlap matrix is not positive semidefinite")
        r[k, k] = np.sqrt(max(rest, 0.0))
        if r[k, k] <= 1e-7:
            r[k, k] = 0.0
            dead.append(k)
    pins = []
    for k in range(m):
        if k in dead:
            pins.append(np.zeros_like(as_matrix(cross[k])))
            continue
        acc = as_matrix(cross[k]).copy()
        for j in range(k):
            acc = acc - np.conj(r[j, k]) * pins[j]
        pins.append(acc / r[k, k])
    return CompositeSolution(tuple(pins), r, tuple(dead))


def extract_composite_sector(s: RoutedKrausChannel) -> tuple[KrausChannel, CompositeSolution]:
    """Inverse of ``build_sector_preserving_composite``."""
    dims = s.space_in.sector_dims
    if s.space_out.sector_dims != dims or any(x != 1 for x in dims[1:]) or len(dims) < 2:
        raise ValueError("expected a channel on (d, 1, ..., 1)")
    if s.route != Route.identity(len(dims)):
        raise ValueError("expected the identity route")
    d, m = dims[0], len(dims) - 1
    c = s.channel
    n = d + m
    cross = []
    for k in range(m):
        blk = np.zeros((d, d), dtype=complex)
        for v in range(d):
            x = np.zeros((n, n), dtype=complex)
            x[v, d + k] = 1.0
            blk[:, v] = linear_extension(c, x)[:d, d + k]
        cross.append(blk)
    g = np.zeros((m, m), dtype=complex)
    for j in range(m):
        for k in range(m):
            x = np.zeros((n, n), dtype=complex)
            x[d + j, d + k] = 1.0
            g[j, k] = linear_extension(c, x)[d + j, d + k]
    sol = solve_composite(cross, g.conj())
    inner = ch.channel([k[:d, :d] for k in c.kraus])
    return inner, sol


def extract_d11(s: RoutedKrausChannel):
    """``(channel, pin1, pin2, gamma12, undetermined)`` from a ``(d, 1, 1)`` channel."""
    if s.space_in.n_sectors != 3:
        raise ValueError("expected three sectors")
    inner, sol = extract_composite_sector(s)
    return inner, sol.pins[0], sol.pins[1], complex(sol.amplitudes[0, 1]), sol.undetermined


# -- random route followers ---------------------------------------------------

def random_route_follower(space_in, space_out, route: Route, seed, max_rank: int = 3) -> KrausChannel:
    """A random channel that follows ``route``.

    When the allowed output sets of distinct input sectors are disjoint, all
    sectors share one environment index so the sample keeps coherence across
    sectors; otherwise each input sector gets its own Kraus operators.
    """
    space_in, space_out = as_space(space_in), as_space(space_out)
    rng = as_stream(seed)
    allowed = [np.concatenate([space_out.indices(l) for l in range(space_out.n_sectors)
                               if route.allows(k, l)]) for k in range(space_in.n_sectors)]
    disjoint = all(np.intersect1d(allowed[a], allowed[b]).size == 0
                   for a in range(len(allowed)) for b in range(a + 1, len(allowed)))
    rank = rng.integers(1, max_rank + 1)
    blocks = []
    for k in range(space_in.n_sectors):
        cols = space_in.indices(k)
        rows = allowed[k]
        env = max(rank, -(-len(cols) // len(rows)))
        iso = qr_isometry(rng.complex_normal((len(rows) * env, len(cols))))
        ops = []
        for e in range(env):
            op = np.zeros((space_out.dim, space_in.dim), dtype=complex)
            op[np.ix_(rows, cols)] = iso[e * len(rows):(e + 1) * len(rows)]
            ops.append(op)
        blocks.append(ops)
    if disjoint:
        width = max(len(b) for b in blocks)
        zero = np.zeros((space_out.dim, space_in.dim), dtype=complex)
        ks = [sum(b[e] if e < len(b) else zero for b in blocks) for e in range(width)]
    else:
        ks = [op for b in blocks for op in b]
    return KrausChannel(space_in.dim, space_out.dim, tuple(ks))
