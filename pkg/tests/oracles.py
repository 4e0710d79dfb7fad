"""Brute-force reference computations used by the tests.

Everything here is written from the definitions with explicit loops so it
shares no code path with the package.
"""
import itertools

import numpy as np


def unit(d, i):
    e = np.zeros(d, dtype=complex)
    e[i] = 1.0
    return e


def kron_loops(a, b):
    m, n = a.shape
    p, q = b.shape
    out = np.zeros((m * p, n * q), dtype=complex)
    for i in range(m):
        for j in range(n):
            for k in range(p):
                for l in range(q):
                    out[i * p + k, j * q + l] = a[i, j] * b[k, l]
    return out


def apply_kraus(kraus, rho):
    out = 0
    for k in kraus:
        out = out + k @ rho @ k.conj().T
    return out


def choi_by_definition(kraus, d_in):
    """sum_ij |i><j| ⊗ C(|i><j|), input factor first."""
    d_out = kraus[0].shape[0]
    j = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for a in range(d_in):
        for b in range(d_in):
            e = np.zeros((d_in, d_in), dtype=complex)
            e[a, b] = 1.0
            j[a * d_out:(a + 1) * d_out, b * d_out:(b + 1) * d_out] = apply_kraus(kraus, e)
    return j


def choi_gap(k1, k2, d_in):
    return np.linalg.norm(choi_by_definition(list(k1), d_in) - choi_by_definition(list(k2), d_in))


def sector_ranges(sector_dims):
    out, start = [], 0
    for s in sector_dims:
        out.append(list(range(start, start + s)))
        start += s
    return out


def product_sectors(factors):
    """Joint sectors of a product of partitioned wires, row-major.

    Returns ``(tuples, indices)`` where ``indices[n]`` lists the basis indices
    of the ``n``-th joint sector.
    """
    ranges = [sector_ranges(f) for f in factors]
    dims = [sum(f) for f in factors]
    tuples, indices = [], []
    for tup in itertools.product(*[range(len(f)) for f in factors]):
        idx = []
        for digits in itertools.product(*[ranges[w][tup[w]] for w in range(len(factors))]):
            flat = 0
            for w, x in enumerate(digits):
                flat = flat * dims[w] + x
            idx.append(flat)
        tuples.append(tup)
        indices.append(sorted(idx))
    return tuples, indices


def random_state_leaks(kraus, in_sectors, out_sectors, allowed, rng, samples=3, tol=1e-18):
    """Forbidden (k, l) pairs seen by pushing random states of sector k through the map.

    ``allowed(k, l)`` says whether the route permits input sector k to reach
    output sector l. Random superpositions hit every leaking direction with
    probability one.
    """
    d_in = kraus[0].shape[1]
    found = set()
    for k, idx in enumerate(in_sectors):
        for _ in range(samples):
            psi = np.zeros(d_in, dtype=complex)
            psi[idx] = rng.normal(size=len(idx)) + 1j * rng.normal(size=len(idx))
            psi /= np.linalg.norm(psi)
            out = apply_kraus(kraus, np.outer(psi, psi.conj()))
            for l, jdx in enumerate(out_sectors):
                if not allowed(k, l) and np.real(sum(out[j, j] for j in jdx)) > tol:
                    found.add((k, l))
    return found


def haar_unitary(d, rng):
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_kraus(d_in, d_out, n, rng):
    """Kraus list of a random channel, built from a Haar isometry by hand."""
    if d_out * n < d_in:
        raise ValueError("need d_out * n >= d_in for an isometry")
    z = rng.normal(size=(d_out * n, d_in)) + 1j * rng.normal(size=(d_out * n, d_in))
    q, _ = np.linalg.qr(z)
    return [q[i * d_out:(i + 1) * d_out] for i in range(n)]
