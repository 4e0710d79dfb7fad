"""Controlled channels built directly from their Kraus operators.

Two control conventions exist side by side:

* ``"identity-first"`` (standard control): control state 0 leaves the target
  alone, control state 1 applies the channel;
* ``"channel-first"`` (composite control): control state 0 applies the
  channel, states ``1..m`` leave the target alone.

``swap_control_labels`` converts a qubit-controlled channel between the two.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import channel as ch
from .channel import CPMap, KrausChannel, PinnedChannel
from .sectors import amplitude_matrix, composite_kraus_parts, solve_composite
from .tensor import EQ_TOL, as_matrix, dag, is_isometry, is_unitary, ketbra

IDENTITY_FIRST = "identity-first"
CHANNEL_FIRST = "channel-first"


@dataclass(frozen=True)
class ControlledChannel:
    control_dim: int
    target_in: int
    target_out: int
    channel: KrausChannel
    convention: str = IDENTITY_FIRST

    def __post_init__(self):
        c = self.channel
        if (c.dim_in, c.dim_out) != (self.control_dim * self.target_in,
                                     self.control_dim * self.target_out):
            raise ValueError("channel dims do not match control and target dims")
        if self.convention not in (IDENTITY_FIRST, CHANNEL_FIRST):
            raise ValueError(f"unknown control convention {self.convention!r}")
        for r in range(self.control_dim):
            defect = branch_map(self, r).tp_defect()
            if defect > 1e-8:
                raise ValueError(f"control branch {r} is not a channel (defect {defect:.3e})")

    def block(self, k, r: int, s: int) -> np.ndarray:
        """Block ``<r| K |s>`` of an operator on control ⊗ target."""
        to, ti = self.target_out, self.target_in
        return as_matrix(k)[r * to:(r + 1) * to, s * ti:(s + 1) * ti]

    def to_obj(self) -> dict:
        obj = ch.channel_to_obj(self.channel)
        obj.update(control_dim=self.control_dim, target_in=self.target_in,
                   target_out=self.target_out)
        return obj


def branch_map(cc: ControlledChannel, r: int) -> CPMap:
    """The map applied to the target when the control is classically ``r``."""
    ks = [cc.block(k, r, r) for k in cc.channel.kraus]
    return CPMap(cc.target_in, cc.target_out, tuple(ks))


def coherence_block(cc: ControlledChannel, r: int = 0, s: int = 1) -> np.ndarray:
    """Choi sub-block linking control-diagonal entries ``r`` and ``s``.

    Rows are Choi indices with control ``r`` on both input and output, columns
    with control ``s``; equals ``sum_k vec(A_k) vec(B_k)^†`` for the diagonal
    blocks ``A_k``, ``B_k`` of each Kraus operator.
    """
    a = np.stack([ch.kraus_vec(cc.block(k, r, r)) for k in cc.channel.kraus], axis=1)
    b = np.stack([ch.kraus_vec(cc.block(k, s, s)) for k in cc.channel.kraus], axis=1)
    return a @ dag(b)


def singular_values(m) -> np.ndarray:
    return np.linalg.svd(as_matrix(m), compute_uv=False)


def numerical_rank(m, rel_tol: float = 1e-9) -> int:
    s = singular_values(m)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def _wrap(kraus, control_dim, t_in, t_out, convention=IDENTITY_FIRST) -> ControlledChannel:
    c = KrausChannel(control_dim * t_in, control_dim * t_out, tuple(kraus))
    return ControlledChannel(control_dim, t_in, t_out, c, convention)


def _proj(n: int, i: int) -> np.ndarray:
    return ketbra(n, i, i)


def build_ctrl_unitary(u) -> ControlledChannel:
    u = as_matrix(u)
    if not is_unitary(u):
        raise ValueError("expected a unitary")
    d = u.shape[0]
    k = np.kron(_proj(2, 0), np.eye(d)) + np.kron(_proj(2, 1), u)
    return _wrap([k], 2, d, d)


def build_ctrl_two_unitary(u, v) -> ControlledChannel:
    u, v = as_matrix(u), as_matrix(v)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch {u.shape} vs {v.shape}")
    if not (is_isometry(u) and is_isometry(v)):
        raise ValueError("expected isometries")
    k = np.kron(_proj(2, 0), u) + np.kron(_proj(2, 1), v)
    return _wrap([k], 2, u.shape[1], u.shape[0])


def build_pinned_control(p: PinnedChannel) -> ControlledChannel:
    ks = p.channel.kraus
    if np.linalg.norm(ks[0] - p.pin) > 1e-10:
        raise ValueError("the pin must be the first Kraus operator; canonicalize first")
    d_out, d_in = p.pin.shape
    if d_in != d_out:
        raise ValueError("standard control needs a channel on a single space")
    out = [np.kron(_proj(2, 0), np.eye(d_in)) + np.kron(_proj(2, 1), ks[0])]
    out += [np.kron(_proj(2, 1), k) for k in ks[1:]]
    return _wrap(out, 2, d_in, d_out)


def control_from_amplitudes(kraus: Sequence, amplitudes: Sequence[complex]) -> ControlledChannel:
    """Standard control with identity-branch amplitudes ``a_i`` on each Kraus operator."""
    ks = [as_matrix(k) for k in kraus]
    a = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if a.size != len(ks):
        raise ValueError("one amplitude per Kraus operator")
    if abs(np.linalg.norm(a) - 1.0) > 1e-9:
        raise ValueError("amplitudes are not normalised")
    d = ks[0].shape[1]
    out = [np.kron(_proj(2, 0), ai * np.eye(d)) + np.kron(_proj(2, 1), k) for ai, k in zip(a, ks)]
    return _wrap(out, 2, d, ks[0].shape[0])


def build_two_channel_control(a_kraus: Sequence, b_kraus: Sequence) -> ControlledChannel:
    """Kraus operators ``|0><0| ⊗ A_i + |1><1| ⊗ B_i``, padding the shorter list with zeros."""
    a = [as_matrix(k) for k in a_kraus]
    b = [as_matrix(k) for k in b_kraus]
    if not a or not b:
        raise ValueError("Kraus lists must be non-empty")
    if a[0].shape != b[0].shape:
        raise ValueError(f"branch dims differ: {a[0].shape} vs {b[0].shape}")
    for name, ks in (("first", a), ("second", b)):
        if CPMap(ks[0].shape[1], ks[0].shape[0], tuple(ks)).tp_defect() > EQ_TOL:
            raise ValueError(f"{name} Kraus list is not trace preserving")
    n = max(len(a), len(b))
    zero = np.zeros_like(a[0])
    a += [zero] * (n - len(a))
    b += [zero] * (n - len(b))
    out = [np.kron(_proj(2, 0), x) + np.kron(_proj(2, 1), y) for x, y in zip(a, b)]
    return _wrap(out, 2, a[0].shape[1], a[0].shape[0])


def pin_from_block(block, d: int) -> np.ndarray:
    """Read the pin back from a standard-control coherence block.

    The block is ``vec(I) vec(pin)^†``, so contracting with ``vec(I)/d``
    isolates ``vec(pin)^†``.
    """
    row = ch.kraus_vec(np.eye(d)).conj() @ as_matrix(block) / d
    return ch.kraus_unvec(row.conj(), d, d)


def pin_from_control(cc: ControlledChannel) -> np.ndarray:
    """Pin of a standard-control channel from the image of ``|0><1| ⊗ I``."""
    if cc.control_dim != 2 or cc.target_in != cc.target_out:
        raise ValueError("expected a qubit-controlled channel on a single target space")
    d = cc.target_in
    x = np.kron(ketbra(2, 0, 1), np.eye(d))
    y = sum(k @ x @ dag(k) for k in cc.channel.kraus)
    return dag(y[:d, d:])


def swap_control_labels(cc: ControlledChannel) -> ControlledChannel:
    """Exchange control states 0 and 1 and flip the convention tag."""
    if cc.control_dim != 2:
        raise ValueError("label swap is defined for a qubit control")
    xo = np.kron(np.array([[0, 1], [1, 0]], dtype=complex), np.eye(cc.target_out))
    xi = np.kron(np.array([[0, 1], [1, 0]], dtype=complex), np.eye(cc.target_in))
    ks = [xo @ k @ xi for k in cc.channel.kraus]
    conv = CHANNEL_FIRST if cc.convention == IDENTITY_FIRST else IDENTITY_FIRST
    return _wrap(ks, 2, cc.target_in, cc.target_out, conv)


# -- composite control ---------------------------------------------------------

@dataclass(frozen=True)
class CompositeControlParams:
    pins: tuple
    gammas: np.ndarray
    undetermined: tuple = field(default=())

    def __post_init__(self):
        pins = tuple(as_matrix(p) for p in self.pins)
        m = len(pins)
        if m < 1:
            raise ValueError("need at least one pin")
        g = np.zeros((m, m), dtype=complex) if self.gammas is None else np.array(self.gammas, dtype=complex)
        if m == 1 and g.size == 0:
            g = np.zeros((1, 1), dtype=complex)
        amplitude_matrix(g, m)  # raises on shape, triangularity and feasibility
        g.setflags(write=False)
        object.__setattr__(self, "pins", pins)
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "undetermined", tuple(self.undetermined))

    @property
    def m(self) -> int:
        return len(self.pins)


def gammas_from_pairs(m: int, pairs: dict) -> np.ndarray:
    """Strictly upper-triangular matrix from ``{(j, k): value}`` with one-based indices."""
    g = np.zeros((m, m), dtype=complex)
    for (j, k), val in pairs.items():
        g[j - 1, k - 1] = val
    return g


def build_composite_control(c: KrausChannel, params: CompositeControlParams) -> ControlledChannel:
    """Control of dimension ``m + 1``: state 0 applies ``c``, states ``1..m`` do nothing.

    Kraus operator ``j`` is ``|0><0| ⊗ P_j + sum_k R[j, k] |k><k| ⊗ I`` where
    ``R`` is the amplitude matrix of the gammas and ``P_j`` runs over the pins
    followed by a Kraus list of what is left of ``c``.
    """
    if c.dim_in != c.dim_out:
        raise ValueError("composite control needs a channel on a single space")
    m = params.m
    ops, amps = composite_kraus_parts(c, params.pins, params.gammas)
    d = c.dim_in
    n = m + 1
    out = []
    for op, row in zip(ops, amps):
        k = np.kron(_proj(n, 0), op)
        for s in range(m):
            if row[s] != 0:
                k = k + row[s] * np.kron(_proj(n, s + 1), np.eye(d))
        out.append(k)
    return _wrap(out, n, d, d, CHANNEL_FIRST)


def _image(cc: ControlledChannel, r: int, s: int, x) -> np.ndarray:
    n = cc.control_dim
    big = np.kron(ketbra(n, r, s), as_matrix(x))
    return sum(k @ big @ dag(k) for k in cc.channel.kraus)


def extract_composite_params(cc: ControlledChannel, m: int,
                             tol: float = 1e-9) -> tuple[KrausChannel, CompositeControlParams]:
    """Recover ``(channel, params)`` from a compositely controlled channel.

    Uses the images of ``|0><k| ⊗ I`` and ``|j><k| ⊗ I`` under the channel's
    linear extension. A qubit-controlled channel in the standard convention is
    relabelled first when ``m == 1``.
    """
    if cc.convention == IDENTITY_FIRST:
        if m == 1 and cc.control_dim == 2:
            cc = swap_control_labels(cc)
        else:
            raise ValueError("expected a channel-first controlled channel")
    if cc.control_dim != m + 1:
        raise ValueError(f"control dimension {cc.control_dim} does not match m = {m}")
    if cc.target_in != cc.target_out:
        raise ValueError("expected a channel on a single target space")
    d = cc.target_in
    eye = np.eye(d)
    cross = []
    for k in range(1, m + 1):
        y = _image(cc, 0, k, eye)
        cross.append(y[:d, k * d:(k + 1) * d])
    g = np.zeros((m, m), dtype=complex)
    for j in range(1, m + 1):
        for k in range(1, m + 1):
            y = _image(cc, j, k, eye)
            blk = y[j * d:(j + 1) * d, k * d:(k + 1) * d]
            coeff = np.trace(blk) / d
            if np.linalg.norm(blk - coeff * eye) > 1e-8:
                raise ValueError(f"block ({j}, {k}) is not proportional to the identity")
            g[j - 1, k - 1] = coeff
    sol = solve_composite(cross, g.conj(), tol)
    inner = ch.channel([cc.block(k, 0, 0) for k in cc.channel.kraus])
    gam = np.triu(sol.amplitudes, 1)
    # at |gamma| = 1 the trailing pin is free; zero satisfies joint validity
    params = CompositeControlParams(sol.pins, gam, sol.undetermined)
    rebuilt = build_composite_control(inner, params)
    if not ch.channels_equal(rebuilt.channel, cc.channel, 1e-7):
        raise ValueError("channel is not of compositely controlled form")
    return inner, params
