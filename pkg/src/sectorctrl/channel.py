"""Quantum channels as Kraus families.

Choi convention: ``choi(c) = sum_ij |i><j| ⊗ c(|i><j|)`` with the input factor
first. A Kraus operator ``K`` (``dim_out x dim_in``) contributes the rank-one
term ``v v^†`` where ``v = K.T.reshape(-1)``; eigenvectors are turned back into
Kraus operators with the inverse reshape, so the round trip is exact.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .rng import as_stream
from .tensor import (EQ_TOL, PSD_TOL, RANK_TOL, as_matrix, dag, eig_hermitian,
                     frozen, matrix_from_obj, matrix_to_obj, partial_trace,
                     qr_isometry)

# Kraus products with every entry below this are dropped when composing
PRUNE_TOL = 1e-14


@dataclass(frozen=True)
class CPMap:
    """Completely positive map ``rho -> sum_i K_i rho K_i^†``. No normalisation required."""

    dim_in: int
    dim_out: int
    kraus: tuple

    def __post_init__(self):
        ks = tuple(frozen(k) for k in self.kraus)
        if not ks:
            raise ValueError("Kraus list must be non-empty")
        for k in ks:
            if k.shape != (self.dim_out, self.dim_in):
                raise ValueError(
                    f"Kraus operator of shape {k.shape}, expected {(self.dim_out, self.dim_in)}")
        object.__setattr__(self, "kraus", ks)

    def __len__(self):
        return len(self.kraus)

    def apply(self, rho) -> np.ndarray:
        rho = as_matrix(rho)
        return sum(k @ rho @ dag(k) for k in self.kraus)

    def tp_defect(self) -> float:
        s = sum(dag(k) @ k for k in self.kraus)
        return float(np.linalg.norm(s - np.eye(self.dim_in)))


@dataclass(frozen=True)
class KrausChannel(CPMap):
    """A CPTP map. Construction fails unless ``sum K^† K = I``."""

    def __post_init__(self):
        super().__post_init__()
        defect = self.tp_defect()
        if defect > EQ_TOL:
            raise ValueError(f"Kraus operators are not trace preserving (defect {defect:.3e})")


@dataclass(frozen=True)
class PinnedChannel:
    channel: KrausChannel
    pin: np.ndarray

    def __post_init__(self):
        pin = frozen(self.pin)
        if pin.shape != (self.channel.dim_out, self.channel.dim_in):
            raise ValueError("pin shape does not match channel")
        if not is_valid_pin(self.channel, pin):
            raise ValueError("pin is not a valid Kraus operator of the channel")
        object.__setattr__(self, "pin", pin)


def channel(kraus: Sequence, dim_in: int | None = None, dim_out: int | None = None) -> KrausChannel:
    """Build a KrausChannel, inferring dims from the first operator."""
    ks = [as_matrix(k) for k in kraus]
    if not ks:
        raise ValueError("Kraus list must be non-empty")
    dout, din = ks[0].shape
    return KrausChannel(dim_in if dim_in is not None else din,
                        dim_out if dim_out is not None else dout, tuple(ks))


def cp_map(kraus: Sequence, dim_in: int | None = None, dim_out: int | None = None) -> CPMap:
    ks = [as_matrix(k) for k in kraus]
    if not ks:
        raise ValueError("Kraus list must be non-empty")
    dout, din = ks[0].shape
    return CPMap(dim_in if dim_in is not None else din,
                 dim_out if dim_out is not None else dout, tuple(ks))


def kraus_vec(k) -> np.ndarray:
    """Column vector of ``k`` in Choi index order (input index most significant)."""
    return as_matrix(k).T.reshape(-1)


def kraus_unvec(v, dim_in: int, dim_out: int) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(dim_in, dim_out).T


def choi(c: CPMap) -> np.ndarray:
    vs = np.stack([kraus_vec(k) for k in c.kraus], axis=1)
    return vs @ dag(vs)


def choi_distance(a: CPMap, b: CPMap) -> float:
    if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out):
        raise ValueError(
            f"dimension mismatch: {a.dim_in}->{a.dim_out} vs {b.dim_in}->{b.dim_out}")
    return float(np.linalg.norm(choi(a) - choi(b)))


def channels_equal(a: CPMap, b: CPMap, tol: float = EQ_TOL) -> bool:
    return choi_distance(a, b) <= tol


def choi_marginal(c: CPMap) -> np.ndarray:
    """Partial trace of the Choi matrix over the output; the identity for channels."""
    return partial_trace(choi(c), [c.dim_in, c.dim_out], keep=[0])


def kraus_from_choi(j, dim_in: int, dim_out: int, rank_tol: float = RANK_TOL,
                    psd_tol: float = PSD_TOL) -> list:
    """Kraus operators of the CP map with Choi matrix ``j``, largest weight first.

    Raises if ``j`` has an eigenvalue below ``-psd_tol``.
    """
    w, v = eig_hermitian(j)
    if w.size and w[0] < -psd_tol:
        raise ValueError(f"Choi matrix is not PSD (min eigenvalue {w[0]:.3e})")
    top = float(w[-1]) if w.size else 0.0
    cut = rank_tol * max(top, 0.0)
    out = []
    for idx in range(len(w) - 1, -1, -1):
        if w[idx] > cut and w[idx] > 0:
            out.append(np.sqrt(w[idx]) * kraus_unvec(v[:, idx], dim_in, dim_out))
    return out


def minimal_kraus(c: CPMap) -> CPMap:
    """Same map with the fewest Kraus operators (Choi eigen-decomposition)."""
    ks = kraus_from_choi(choi(c), c.dim_in, c.dim_out)
    if not ks:
        ks = [np.zeros((c.dim_out, c.dim_in), dtype=complex)]
    if isinstance(c, KrausChannel):
        return KrausChannel(c.dim_in, c.dim_out, tuple(ks))
    return CPMap(c.dim_in, c.dim_out, tuple(ks))


def choi_rank(c: CPMap, rank_tol: float = RANK_TOL) -> int:
    w, _ = eig_hermitian(choi(c))
    top = max(float(w[-1]), 0.0)
    return int(np.sum(w > rank_tol * top)) if top > 0 else 0


def remainder(c: CPMap, pins: Iterable, psd_tol: float = PSD_TOL) -> CPMap | None:
    """The CP map ``rho -> c(rho) - sum_k P_k rho P_k^†``.

    Returns None when the remainder vanishes. Raises ValueError if it is not
    completely positive.
    """
    j = choi(c)
    for p in pins:
        v = kraus_vec(p)
        j = j - np.outer(v, v.conj())
    ks = kraus_from_choi(j, c.dim_in, c.dim_out, psd_tol=psd_tol)
    # tiny leftovers are eigensolver noise on an exact cancellation
    ks = [k for k in ks if np.linalg.norm(k) > 1e-7]
    if not ks:
        return None
    return CPMap(c.dim_in, c.dim_out, tuple(ks))


def is_valid_pin(c: CPMap, k, psd_tol: float = PSD_TOL) -> bool:
    k = as_matrix(k)
    if k.shape != (c.dim_out, c.dim_in):
        return False
    v = kraus_vec(k)
    w, _ = eig_hermitian(choi(c) - np.outer(v, v.conj()))
    return bool(w[0] >= -psd_tol)


def _unitary_sending_to_first(alpha: np.ndarray) -> np.ndarray:
    """Unitary ``V`` with ``V @ alpha = e_0`` for a unit vector ``alpha``."""
    n = alpha.size
    q, _ = np.linalg.qr(np.column_stack([alpha, np.eye(n, dtype=complex)]), mode="complete")
    q = q[:, :n]
    # first column is alpha up to a phase; remove it
    ph = np.vdot(q[:, 0], alpha)
    q[:, 0] = q[:, 0] * ph / abs(ph)
    return dag(q)


def canonicalize_pinned(kraus: Sequence, amplitudes: Sequence[complex],
                        tol: float = 1e-9) -> PinnedChannel:
    """Rotate a Kraus list so the operator coherent with the identity branch comes first.

    With amplitudes ``a``, the pin is ``sum_i conj(a_i) K_i``; the remaining
    operators are the other rows of a unitary mix and carry no coherence.
    """
    ks = [as_matrix(k) for k in kraus]
    alpha = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if alpha.size != len(ks):
        raise ValueError(f"{alpha.size} amplitudes for {len(ks)} Kraus operators")
    norm = np.linalg.norm(alpha)
    if abs(norm - 1.0) > tol:
        raise ValueError(f"amplitudes are not normalised (norm {norm:.12g})")
    v = _unitary_sending_to_first(alpha / norm)
    stack = np.stack(ks)
    mixed = np.einsum("ji,iab->jab", v, stack)
    mixed[0] = np.einsum("i,iab->ab", alpha.conj(), stack)
    ch = channel(list(mixed))
    return PinnedChannel(ch, mixed[0])


def mix_kraus(kraus: Sequence, u) -> list:
    """Kraus list ``K'_j = sum_i u[j, i] K_i``; same channel when ``u`` is an isometry."""
    stack = np.stack([as_matrix(k) for k in kraus])
    return list(np.einsum("ji,iab->jab", as_matrix(u), stack))


def compose(first: CPMap, second: CPMap) -> CPMap:
    """``second ∘ first``; near-zero Kraus products are dropped."""
    if first.dim_out != second.dim_in:
        raise ValueError(f"cannot compose: {first.dim_out} != {second.dim_in}")
    ks = [b @ a for a in first.kraus for b in second.kraus]
    kept = [k for k in ks if np.max(np.abs(k)) > PRUNE_TOL] or [ks[0]]
    cls = KrausChannel if isinstance(first, KrausChannel) and isinstance(second, KrausChannel) else CPMap
    return cls(first.dim_in, second.dim_out, tuple(kept))


def tensor(a: CPMap, b: CPMap) -> CPMap:
    ks = [np.kron(x, y) for x in a.kraus for y in b.kraus]
    cls = KrausChannel if isinstance(a, KrausChannel) and isinstance(b, KrausChannel) else CPMap
    return cls(a.dim_in * b.dim_in, a.dim_out * b.dim_out, tuple(ks))


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel(d, d, (np.eye(d, dtype=complex),))


def unitary_channel(u) -> KrausChannel:
    u = as_matrix(u)
    return KrausChannel(u.shape[1], u.shape[0], (u,))


def dephasing_qubit() -> KrausChannel:
    """The qubit channel ``rho -> (rho + Z rho Z) / 2``."""
    s = 1 / np.sqrt(2)
    return KrausChannel(2, 2, (s * np.eye(2, dtype=complex), s * np.diag([1.0, -1.0]).astype(complex)))


def random_isometry(dim_in: int, dim_out: int, seed) -> np.ndarray:
    rng = as_stream(seed)
    return qr_isometry(rng.complex_normal((dim_out, dim_in)))


def random_unitary(d: int, seed) -> np.ndarray:
    return random_isometry(d, d, seed)


def random_cptp(dim_in: int, dim_out: int, kraus_rank: int, seed) -> KrausChannel:
    """Haar-random Stinespring channel with ``kraus_rank`` environment levels."""
    if kraus_rank < 1:
        raise ValueError("kraus_rank must be at least 1")
    if dim_out * kraus_rank < dim_in:
        raise ValueError(f"cannot dilate {dim_in} into {dim_out}x{kraus_rank}")
    iso = random_isometry(dim_in, dim_out * kraus_rank, seed)
    ks = [iso[e * dim_out:(e + 1) * dim_out, :] for e in range(kraus_rank)]
    return KrausChannel(dim_in, dim_out, tuple(ks))


def _two_branch_kraus(a_kraus, b_kraus):
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)
    return [np.kron(p0, a) + np.kron(p1, b) for a, b in zip(a_kraus, b_kraus)]


def complete_prefix(b: CPMap, prefix: Sequence) -> list:
    """Extend ``prefix`` to a full Kraus list of ``b``; raises if impossible."""
    rest = remainder(b, prefix)
    return [as_matrix(p) for p in prefix] + ([] if rest is None else list(rest.kraus))


def two_control_distance(a_min: CPMap, b1: Sequence, b2: Sequence, b: CPMap) -> float:
    """Choi distance between the controls pairing ``a_min`` with prefix ``b1`` or ``b2``.

    ``a_min`` must be a minimal Kraus list of length ``n``; ``b1`` and ``b2``
    are length-``n`` prefixes of Kraus lists of ``b``. Each prefix is completed
    with a remainder of ``b`` (paired with zero on the other branch).
    """
    n = len(a_min.kraus)
    if len(b1) != n or len(b2) != n:
        raise ValueError(f"prefixes must have length {n}")
    if choi_rank(a_min) != n:
        raise ValueError("first channel is not given by a minimal Kraus list")
    builds = []
    for prefix in (b1, b2):
        try:
            full = complete_prefix(b, prefix)
        except ValueError as exc:
            raise ValueError("prefix does not extend to a Kraus list of the channel") from exc
        zero = np.zeros((a_min.dim_out, a_min.dim_in), dtype=complex)
        a_list = list(a_min.kraus) + [zero] * (len(full) - n)
        builds.append(cp_map(_two_branch_kraus(a_list, full)))
    return choi_distance(builds[0], builds[1])


def two_control_equal_iff(a_min: CPMap, b1: Sequence, b2: Sequence, b: CPMap,
                          tol: float = EQ_TOL) -> bool:
    return two_control_distance(a_min, b1, b2, b) <= tol


# -- JSON ------------------------------------------------------------------

def channel_to_obj(c: CPMap) -> dict:
    return {"dim_in": c.dim_in, "dim_out": c.dim_out,
            "kraus": [matrix_to_obj(k) for k in c.kraus]}


def channel_from_obj(obj: dict, trace_preserving: bool = True) -> CPMap:
    ks = tuple(matrix_from_obj(k) for k in obj["kraus"])
    cls = KrausChannel if trace_preserving else CPMap
    return cls(int(obj["dim_in"]), int(obj["dim_out"]), ks)


def channel_to_json(c: CPMap) -> str:
    return json.dumps(channel_to_obj(c))


def channel_from_json(text: str, trace_preserving: bool = True) -> CPMap:
    return channel_from_obj(json.loads(text), trace_preserving)
