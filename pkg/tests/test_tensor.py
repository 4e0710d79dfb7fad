import itertools

import numpy as np
import pytest

from sectorctrl import tensor as tn
from oracles import kron_loops, unit


@pytest.fixture
def rng():
    return np.random.default_rng(11)


def cmat(rng, m, n):
    return rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))


def test_kron_matches_loops(rng):
    a, b = cmat(rng, 2, 3), cmat(rng, 4, 2)
    assert np.allclose(tn.kron(a, b), kron_loops(a, b))
    c = cmat(rng, 3, 3)
    assert np.allclose(tn.kron_all([a, b, c]), kron_loops(kron_loops(a, b), c))


def test_direct_sum_places_blocks(rng):
    a, b = cmat(rng, 2, 3), cmat(rng, 1, 1)
    s = tn.direct_sum([a, b])
    assert s.shape == (3, 4)
    assert np.allclose(s[:2, :3], a) and s[2, 3] == b[0, 0]
    assert np.count_nonzero(s[:2, 3]) == 0 and np.count_nonzero(s[2, :3]) == 0


def test_partial_trace_against_index_sums(rng):
    dims = [2, 3, 2]
    n = 12
    m = cmat(rng, n, n)
    t = m.reshape(dims + dims)
    # keep the middle factor
    want = np.zeros((3, 3), dtype=complex)
    for i in range(3):
        for j in range(3):
            want[i, j] = sum(t[a, i, c, a, j, c] for a in range(2) for c in range(2))
    assert np.allclose(tn.partial_trace(m, dims, [1]), want)
    # keep the outer factors
    want = np.zeros((4, 4), dtype=complex)
    for a, c, a2, c2 in itertools.product(range(2), repeat=4):
        want[a * 2 + c, a2 * 2 + c2] = sum(t[a, b, c, a2, b, c2] for b in range(3))
    assert np.allclose(tn.partial_trace(m, dims, [0, 2]), want)
    assert np.isclose(tn.partial_trace(m, dims, [])[0, 0], np.trace(m))


def test_partial_trace_rejects_bad_input():
    with pytest.raises(ValueError):
        tn.partial_trace(np.eye(4), [2, 3], [0])
    with pytest.raises(ValueError):
        tn.partial_trace(np.eye(4), [2, 2], [2])


def test_embed_operator_on_product_states(rng):
    x, y = cmat(rng, 2, 2), cmat(rng, 3, 2)
    dims_in, dims_out = [2, 3, 2], [3, 3, 2]
    # op reads wire 2 then wire 0; wire 0 grows from 2 to 3
    op = np.kron(x, y)
    big = tn.embed_operator(op, [2, 0], dims_in, dims_out)
    for a, b, c in itertools.product(range(2), range(3), range(2)):
        psi = np.kron(np.kron(unit(2, a), unit(3, b)), unit(2, c))
        want = np.kron(np.kron(y @ unit(2, a), unit(3, b)), x @ unit(2, c))
        assert np.allclose(big @ psi, want)


def test_permutation_operator_moves_wires():
    dims = [2, 3, 4]
    p = tn.permutation_operator(dims, [2, 0, 1])
    for a, b, c in itertools.product(range(2), range(3), range(4)):
        psi = np.kron(np.kron(unit(2, a), unit(3, b)), unit(4, c))
        assert np.allclose(p @ psi, np.kron(np.kron(unit(4, c), unit(2, a)), unit(3, b)))
    assert tn.is_unitary(p)
    with pytest.raises(ValueError):
        tn.permutation_operator(dims, [0, 0, 1])


def test_qr_isometry_keeps_span(rng):
    m = cmat(rng, 5, 3)
    q = tn.qr_isometry(m)
    assert tn.is_isometry(q)
    # m lies in the span of q
    assert np.allclose(q @ (q.conj().T @ m), m)
    with pytest.raises(ValueError):
        tn.qr_isometry(np.ones((3, 2)))
    with pytest.raises(ValueError):
        tn.qr_isometry(cmat(rng, 2, 3))


def test_hermitian_checks(rng):
    h = cmat(rng, 3, 3)
    h = h + h.conj().T
    w, v = tn.eig_hermitian(h)
    assert np.all(np.diff(w) >= 0)
    assert np.allclose(v @ np.diag(w) @ v.conj().T, h)
    with pytest.raises(ValueError):
        tn.eig_hermitian(cmat(rng, 3, 3))


def test_matrix_json_roundtrip(rng):
    m = cmat(rng, 3, 2)
    assert np.array_equal(tn.matrix_from_json(tn.matrix_to_json(m)), m)


def test_as_matrix_validation():
    with pytest.raises(ValueError):
        tn.as_matrix(np.zeros(3))
    with pytest.raises(ValueError):
        tn.as_matrix([[np.nan]])
