"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Tensor factors are
ordered with the leftmost factor as the most significant index, so
``kron(control, target)`` puts the control first.
"""
from __future__ import annotations

import json
from typing import Sequence

import numpy as np
from scipy.linalg import block_diag

HERMITIAN_TOL = 1e-9
PSD_TOL = 1e-9
EQ_TOL = 1e-9
RANK_TOL = 1e-8


def as_matrix(m) -> np.ndarray:
    """Coerce ``m`` to a finite 2-d complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def frozen(m) -> np.ndarray:
    """Return a read-only complex copy of ``m``."""
    a = np.array(as_matrix(m), copy=True)
    a.setflags(write=False)
    return a


def dag(m: np.ndarray) -> np.ndarray:
    return np.conjugate(np.transpose(m))


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(factors: Sequence) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, as_matrix(f))
    return out


def direct_sum(blocks: Sequence) -> np.ndarray:
    """Block-diagonal matrix with ``blocks`` along the diagonal.

    Scalars count as 1x1 blocks, so ``direct_sum([1, U])`` is ``1 ⊕ U``.
    Off-diagonal blocks are exactly zero.
    """
    mats = [as_matrix(b) for b in blocks]
    if not mats:
        raise ValueError("direct_sum needs at least one block")
    return np.asarray(block_diag(*mats), dtype=complex)


def partial_trace(m, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every factor of ``m`` not listed in ``keep``.

    ``dims`` gives the factor dimensions of the square matrix ``m``; kept
    factors stay in their original order.
    """
    m = as_matrix(m)
    dims = [int(d) for d in dims]
    n = int(np.prod(dims)) if dims else 1
    if m.shape != (n, n):
        raise ValueError(f"matrix of shape {m.shape} does not match dims {dims}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {len(dims)} factors")
    nf = len(dims)
    t = m.reshape(dims + dims)
    row = list(range(nf))
    col = [nf + i for i in range(nf)]
    for i in range(nf):
        if i not in keep:
            col[i] = row[i]
    out_idx = [row[i] for i in keep] + [col[i] for i in keep]
    r = np.einsum(t, row + col, out_idx)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    return np.asarray(r).reshape(dk, dk)


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return False
    return np.linalg.norm(m - dag(m)) <= tol * max(1.0, np.linalg.norm(m))


def eig_hermitian(m, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix."""
    m = as_matrix(m)
    if not is_hermitian(m, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    h = 0.5 * (m + dag(m))
    w, v = np.linalg.eigh(h)
    return w, v


def qr_isometry(m, tol: float = 1e-10) -> np.ndarray:
    """Orthonormalize the columns of ``m``, keeping their span.

    Column phases are fixed so that ``R`` has a positive diagonal, which is
    what makes QR of a Gaussian matrix Haar distributed.
    """
    m = as_matrix(m)
    rows, cols = m.shape
    if rows < cols:
        raise ValueError(f"need rows >= cols, got {m.shape}")
    q, r = np.linalg.qr(m)
    diag = np.diag(r)
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.any(np.abs(diag) <= tol * scale):
        raise ValueError("input is rank deficient")
    return q * (diag / np.abs(diag))


def is_isometry(v, tol: float = EQ_TOL) -> bool:
    v = as_matrix(v)
    if v.shape[0] < v.shape[1]:
        return False
    return np.linalg.norm(dag(v) @ v - np.eye(v.shape[1])) <= tol


def is_unitary(u, tol: float = EQ_TOL) -> bool:
    u = as_matrix(u)
    return u.shape[0] == u.shape[1] and is_isometry(u, tol)


def basis_vector(dim: int, index: int) -> np.ndarray:
    e = np.zeros((dim, 1), dtype=complex)
    e[index, 0] = 1.0
    return e


def ketbra(dim: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((dim, dim), dtype=complex)
    m[i, j] = 1.0
    return m


def embed_operator(op, targets: Sequence[int], dims_in: Sequence[int],
                   dims_out: Sequence[int]) -> np.ndarray:
    """Lift ``op`` acting on wires ``targets`` to the full multi-wire space.

    ``dims_in``/``dims_out`` are the dimensions of every wire before and after
    the operation; only the target wires may change dimension. The input index
    of ``op`` runs over the target wires in the order given.
    """
    op = as_matrix(op)
    dims_in = [int(d) for d in dims_in]
    dims_out = [int(d) for d in dims_out]
    n = len(dims_in)
    if len(dims_out) != n:
        raise ValueError("wire count must not change")
    targets = [int(t) for t in targets]
    rest = [w for w in range(n) if w not in targets]
    for w in rest:
        if dims_in[w] != dims_out[w]:
            raise ValueError(f"wire {w} changes dimension but is not a target")
    t_in = [dims_in[t] for t in targets]
    t_out = [dims_out[t] for t in targets]
    r_dims = [dims_in[w] for w in rest]
    if op.shape != (int(np.prod(t_out)), int(np.prod(t_in))):
        raise ValueError(f"operator shape {op.shape} does not match target dims {t_in}->{t_out}")
    full = np.kron(op, np.eye(int(np.prod(r_dims)) if r_dims else 1))
    order = targets + rest
    pos = [order.index(w) for w in range(n)]
    t = full.reshape(t_out + r_dims + t_in + r_dims)
    t = t.transpose(pos + [n + p for p in pos])
    return t.reshape(int(np.prod(dims_out)), int(np.prod(dims_in)))


def permutation_operator(dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Unitary that moves input wire ``order[i]`` to output position ``i``."""
    dims = [int(d) for d in dims]
    order = [int(o) for o in order]
    if sorted(order) != list(range(len(dims))):
        raise ValueError(f"{order} is not a permutation of {len(dims)} wires")
    n = int(np.prod(dims)) if dims else 1
    idx = np.arange(n).reshape(dims) if dims else np.arange(1)
    # row = output multi-index, value = input basis index
    source = np.transpose(idx, order).reshape(-1)
    p = np.zeros((n, n), dtype=complex)
    p[np.arange(n), source] = 1.0
    return p


# -- JSON encoding ---------------------------------------------------------

def matrix_to_obj(m) -> dict:
    m = as_matrix(m)
    rows, cols = m.shape
    data = [[float(z.real), float(z.imag)] for z in m.reshape(-1)]
    return {"rows": rows, "cols": cols, "data": data}


def matrix_from_obj(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    data = obj["data"]
    if len(data) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, got {len(data)}")
    flat = np.array([complex(float(re), float(im)) for re, im in data], dtype=complex)
    return as_matrix(flat.reshape(rows, cols))


def matrix_to_json(m) -> str:
    # json uses repr() for floats, the shortest string that round-trips exactly
    return json.dumps(matrix_to_obj(m))


def matrix_from_json(text: str) -> np.ndarray:
    return matrix_from_obj(json.loads(text))
