import itertools

import numpy as np
import pytest

from sectorctrl import channel as ch
from sectorctrl import sectors as sc
from oracles import product_sectors, random_kraus, random_state_leaks


@pytest.fixture
def rng():
    return np.random.default_rng(17)


def test_partitioned_space_layout():
    s = sc.PartitionedSpace((1, 3, 2))
    assert s.dim == 6 and s.n_sectors == 3
    assert list(s.indices(1)) == [1, 2, 3]
    assert np.allclose(s.projector(2), np.diag([0, 0, 0, 0, 1, 1]))
    with pytest.raises(ValueError):
        sc.PartitionedSpace((2, 0))


def test_product_space_matches_enumeration():
    factors = [(1, 2), (2, 1, 1), (1, 1)]
    p = sc.ProductSpace(factors)
    tuples, indices = product_sectors(factors)
    assert p.n_sectors == len(tuples)
    for k, (tup, idx) in enumerate(zip(tuples, indices)):
        assert p.sector_tuple(k) == tup
        assert list(p.indices(k)) == idx
    assert sum(p.sector_dims) == p.dim == 3 * 4 * 2


def test_route_rejects_unroutable_input():
    with pytest.raises(ValueError):
        sc.Route([[1, 0], [1, 0]])
    r = sc.Route([[1, 0], [1, 1]])
    assert r.allows(0, 1) and not r.allows(1, 0)
    assert r.transpose() == sc.Route([[1, 1], [0, 1]])


def test_route_compose_is_relation_composition(rng):
    for _ in range(20):
        a = rng.random((3, 4)) < 0.5
        b = rng.random((2, 3)) < 0.5
        a[rng.integers(0, 3, 4), np.arange(4)] = True
        b[rng.integers(0, 2, 3), np.arange(3)] = True
        got = sc.route_compose(sc.Route(a), sc.Route(b)).matrix
        for k in range(4):
            for l in range(2):
                want = any(a[j, k] and b[l, j] for j in range(3))
                assert got[l, k] == want
    with pytest.raises(ValueError):
        sc.route_compose(sc.Route.identity(2), sc.Route.identity(3))


def test_route_tensor_pairs_sectors():
    a = sc.Route([[1, 0], [1, 1]])
    b = sc.Route([[0, 1, 1], [1, 0, 0]])
    t = sc.route_tensor(a, b)
    for (k1, k2), (l1, l2) in itertools.product(itertools.product(range(2), range(3)),
                                                itertools.product(range(2), range(2))):
        assert t.allows(k1 * 3 + k2, l1 * 2 + l2) == (a.allows(k1, l1) and b.allows(k2, l2))


def _oracle(kraus, sin, sout, route, rng):
    return random_state_leaks(kraus, [list(sin.indices(k)) for k in range(sin.n_sectors)],
                              [list(sout.indices(l)) for l in range(sout.n_sectors)],
                              route.allows, rng)


def test_follows_route_agrees_with_density_oracle(rng):
    sin = sc.PartitionedSpace((1, 2, 2))
    sout = sc.PartitionedSpace((2, 1, 2))
    for trial in range(30):
        m = rng.random((3, 3)) < 0.4
        m[rng.integers(0, 3, 3), np.arange(3)] = True
        route = sc.Route(m)
        good = sc.random_route_follower(sin, sout, route, trial)
        assert sc.follows_route(good, sin, sout, route)
        assert _oracle(good.kraus, sin, sout, route, rng) == set()
        # a generic channel leaks exactly where the oracle says
        bad = ch.channel(random_kraus(5, 5, 2, rng))
        leaks = {(k, l) for k, l, n in sc.route_leakage(bad, sin, sout, route) if n > 1e-9}
        assert leaks == _oracle(bad.kraus, sin, sout, route, rng)


def test_route_follower_on_product_spaces(rng):
    sin = sc.ProductSpace(((1, 2), (2,)))
    sout = sc.ProductSpace(((1, 2), (1, 1)))
    route = sc.Route([[1, 0], [1, 0], [0, 1], [0, 1]])
    c = sc.random_route_follower(sin, sout, route, 3)
    assert c.tp_defect() < 1e-12
    assert _oracle(c.kraus, sin, sout, route, rng) == set()


def test_routed_channel_validates(rng):
    s = sc.PartitionedSpace((1, 2))
    with pytest.raises(ValueError, match="route"):
        sc.RoutedKrausChannel(s, s, sc.Route.identity(2), ch.channel(random_kraus(3, 3, 2, rng)))
    ok = sc.RoutedKrausChannel(s, s, sc.Route.full(2, 2), ch.channel(random_kraus(3, 3, 2, rng)))
    back = sc.routed_from_obj(ok.to_obj())
    assert back.route == ok.route and ch.channels_equal(back.channel, ok.channel)


def test_sector_preserving_acts_trivially_on_vacuum(rng):
    ks = random_kraus(2, 3, 3, rng)
    a = rng.normal(size=3) + 1j * rng.normal(size=3)
    a /= np.linalg.norm(a)
    s = sc.sector_preserving_from_amplitudes(a, ks)
    vac = np.zeros((3, 3))
    vac[0, 0] = 1
    out = s.channel.apply(vac)
    assert np.isclose(out[0, 0], 1) and np.allclose(out[1:, 1:], 0)
    assert (s.d_in, s.d_out) == (2, 3)
    with pytest.raises(ValueError):
        sc.sector_preserving_from_amplitudes(0.5 * a, ks)


def test_sector_preserving_type_checks():
    # vacuum split across two Kraus operators still has total weight one
    k0 = np.diag([0.0, 1.0, 1.0]).astype(complex)
    k1 = np.zeros((3, 3), dtype=complex)
    k1[0, 0] = 1.0
    c = ch.channel([k0, k1])
    s = sc.PartitionedSpace((1, 2))
    sc.SectorPreserving1d(sc.RoutedKrausChannel(s, s, sc.Route.identity(2), c))
    with pytest.raises(ValueError, match="identity route"):
        sc.SectorPreserving1d(sc.RoutedKrausChannel(s, s, sc.Route.full(2, 2), c))
    t = sc.PartitionedSpace((2, 1))
    with pytest.raises(ValueError, match="type"):
        sc.SectorPreserving1d(sc.RoutedKrausChannel(t, t, sc.Route.identity(2), c))


def test_extract_pin_roundtrip(rng):
    ks = random_kraus(3, 3, 2, rng)
    a = np.array([0.6, 0.8j])
    s = sc.sector_preserving_from_amplitudes(a, ks)
    p = sc.extract_pin(s)
    assert np.allclose(p.pin, np.conj(a[0]) * ks[0] + np.conj(a[1]) * ks[1])
    assert ch.channels_equal(p.channel, ch.channel(ks))
    again = sc.build_sector_preserving_1d(p)
    assert ch.channels_equal(again.channel, s.channel)


def test_linear_extension_on_offdiagonal(rng):
    ks = random_kraus(2, 2, 2, rng)
    x = np.array([[0, 1], [0, 0]], dtype=complex)
    want = sum(k @ x @ k.conj().T for k in ks)
    assert np.allclose(sc.linear_extension(ch.channel(ks), x), want)


def test_isometric_sector_preserving(rng):
    v = np.linalg.qr(rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2)))[0]
    r = sc.build_isometric_sp(v)
    assert len(r.channel.kraus) == 1 and r.space_out.sector_dims == (1, 3)
    with pytest.raises(ValueError):
        sc.build_isometric_sp(2 * v)


def test_amplitude_matrix_columns_are_unit():
    g = np.zeros((3, 3), dtype=complex)
    g[0, 1], g[0, 2], g[1, 2] = 0.6, 0.3j, 0.5
    r = sc.amplitude_matrix(g, 3)
    assert np.allclose(np.linalg.norm(r, axis=0), 1)
    assert np.allclose(np.triu(r, 1), g)
    bad = g.copy()
    bad[1, 2] = 0.99
    with pytest.raises(ValueError, match="infeasible"):
        sc.amplitude_matrix(bad, 3)
    with pytest.raises(ValueError):
        sc.amplitude_matrix(g.T, 3)


def _pins(ks, rng, m):
    w = np.linalg.qr(rng.normal(size=(len(ks), m)) + 1j * rng.normal(size=(len(ks), m)))[0]
    return [sum(np.conj(w[i, j]) * k for i, k in enumerate(ks)) for j in range(m)]


@pytest.mark.parametrize("gamma", [0.0, 0.3, 0.99j, -1.0])
def test_d11_build_extract(gamma, rng):
    ks = random_kraus(2, 2, 3, rng)
    c = ch.channel(ks)
    p1, p2 = _pins(ks, rng, 2)
    s = sc.build_sector_preserving_d11(c, p1, p2, gamma)
    # coherence between the two unit sectors carries conj(gamma)
    x = np.zeros((4, 4), dtype=complex)
    x[2, 3] = 1
    assert np.isclose(sc.linear_extension(s.channel, x)[2, 3], np.conj(gamma))
    inner, q1, q2, g, undetermined = sc.extract_d11(s)
    assert ch.channels_equal(inner, c)
    assert np.isclose(g, gamma)
    assert np.allclose(q1, p1)
    if abs(gamma) == 1:
        assert undetermined == (1,)
    else:
        assert undetermined == () and np.allclose(q2, p2)


def test_composite_rejects_invalid_pins(rng):
    ks = random_kraus(2, 2, 2, rng)
    with pytest.raises(ValueError, match="jointly"):
        sc.build_sector_preserving_d11(ch.channel(ks), ks[0], ks[0], 0.0)

