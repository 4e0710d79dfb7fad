import numpy as np
import pytest

from sectorctrl import channel as ch
from sectorctrl import control as ct
from oracles import apply_kraus, haar_unitary, random_kraus


@pytest.fixture
def rng():
    return np.random.default_rng(23)


def rand_op(d, rng):
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def ketbra(n, i, j):
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e


def unit_amps(n, rng):
    a = rng.normal(size=n) + 1j * rng.normal(size=n)
    return a / np.linalg.norm(a)


def test_ctrl_unitary_action(rng):
    u = haar_unitary(3, rng)
    k = ct.build_ctrl_unitary(u).channel.kraus[0]
    for i in range(3):
        e = np.zeros(3)
        e[i] = 1
        assert np.allclose(k @ np.kron([1, 0], e), np.kron([1, 0], e))
        assert np.allclose(k @ np.kron([0, 1], e), np.kron([0, 1], u @ e))
    with pytest.raises(ValueError):
        ct.build_ctrl_unitary(np.diag([1.0, 2.0]))


@pytest.mark.parametrize("d,rank", [(2, 1), (2, 3), (3, 2)])
def test_pinned_control_on_operator_basis(d, rank, rng):
    ks = random_kraus(d, d, rank, rng)
    a = unit_amps(rank, rng)
    p = ch.canonicalize_pinned(ks, a)
    cc = ct.build_pinned_control(p)
    x = rand_op(d, rng)
    pin = sum(np.conj(ai) * k for ai, k in zip(a, ks))
    cases = {
        (0, 0): x,
        (1, 1): apply_kraus(ks, x),
        (0, 1): x @ pin.conj().T,
        (1, 0): pin @ x,
    }
    for (r, s), want in cases.items():
        out = cc.channel.apply(np.kron(ketbra(2, r, s), x))
        assert np.allclose(out, np.kron(ketbra(2, r, s), want))


def test_pin_must_lead(rng):
    ks = random_kraus(2, 2, 2, rng)
    p = ch.PinnedChannel(ch.channel(ks), ks[1])
    with pytest.raises(ValueError, match="first"):
        ct.build_pinned_control(p)


def test_control_from_amplitudes_equals_canonical(rng):
    ks = random_kraus(3, 3, 3, rng)
    a = unit_amps(3, rng)
    direct = ct.control_from_amplitudes(ks, a)
    canon = ct.build_pinned_control(ch.canonicalize_pinned(ks, a))
    assert ch.choi_distance(direct.channel, canon.channel) < 1e-12


def test_coherence_block_is_identity_times_pin(rng):
    d = 3
    ks = random_kraus(d, d, 2, rng)
    a = unit_amps(2, rng)
    cc = ct.control_from_amplitudes(ks, a)
    pin = sum(np.conj(ai) * k for ai, k in zip(a, ks))
    # Choi index (input i, output o) of the target: vec(M)[i*d + o] = M[o, i]
    vec = lambda m: np.array([m[o, i] for i in range(d) for o in range(d)])
    want = np.outer(vec(np.eye(d)), vec(pin).conj())
    assert np.allclose(ct.coherence_block(cc), want)
    assert np.allclose(ct.pin_from_block(want, d), pin)
    assert np.allclose(ct.pin_from_control(cc), pin)
    assert ct.numerical_rank(want) == 1


def test_branch_maps(rng):
    ks = random_kraus(2, 2, 2, rng)
    cc = ct.control_from_amplitudes(ks, unit_amps(2, rng))
    assert ch.channels_equal(ct.branch_map(cc, 0), ch.identity_channel(2))
    assert ch.channels_equal(ct.branch_map(cc, 1), ch.channel(ks))


def test_two_channel_control(rng):
    a, b = random_kraus(2, 3, 1, rng), random_kraus(2, 3, 3, rng)
    cc = ct.build_two_channel_control(a, b)
    assert len(cc.channel.kraus) == 3
    x = rand_op(2, rng)
    out = cc.channel.apply(np.kron(ketbra(2, 0, 1), x))
    want = sum(ai @ x @ bi.conj().T for ai, bi in zip(a, b[:1]))
    assert np.allclose(out[:3, 3:], want)
    with pytest.raises(ValueError):
        ct.build_two_channel_control([2 * a[0]], b)


def test_two_isometry_control(rng):
    u = haar_unitary(3, rng)[:, :2]
    v = haar_unitary(3, rng)[:, :2]
    cc = ct.build_ctrl_two_unitary(u, v)
    assert (cc.target_in, cc.target_out) == (2, 3)
    assert np.allclose(cc.channel.kraus[0][3:, 2:], v)


def test_controlled_channel_validation(rng):
    ks = random_kraus(2, 2, 2, rng)
    bad = ch.channel([np.kron(ketbra(2, 0, 1) + ketbra(2, 1, 0), k) for k in ks])
    # control flips: diagonal branches are not channels
    with pytest.raises(ValueError, match="branch"):
        ct.ControlledChannel(2, 2, 2, bad)
    with pytest.raises(ValueError):
        ct.ControlledChannel(2, 2, 2, ch.identity_channel(4), "sideways")


def test_swap_labels_is_an_involution(rng):
    cc = ct.control_from_amplitudes(random_kraus(2, 2, 2, rng), unit_amps(2, rng))
    sw = ct.swap_control_labels(cc)
    assert sw.convention == ct.CHANNEL_FIRST
    assert ch.channels_equal(ct.branch_map(sw, 0), ct.branch_map(cc, 1))
    back = ct.swap_control_labels(sw)
    assert back.convention == ct.IDENTITY_FIRST and ch.channels_equal(back.channel, cc.channel)


def _pins(ks, m, rng):
    w = haar_unitary(len(ks), rng)[:, :m]
    return [sum(np.conj(w[i, j]) * k for i, k in enumerate(ks)) for j in range(m)]


def test_composite_control_action(rng):
    d = 2
    ks = random_kraus(d, d, 3, rng)
    p1, p2 = _pins(ks, 2, rng)
    gamma = 0.4 - 0.3j
    cc = ct.build_composite_control(ch.channel(ks), ct.CompositeControlParams(
        [p1, p2], ct.gammas_from_pairs(2, {(1, 2): gamma})))
    x = rand_op(d, rng)
    r22 = np.sqrt(1 - abs(gamma) ** 2)
    # amplitude rows: pin 1 -> (1, gamma), pin 2 -> (0, r22)
    blocks = {
        (0, 0): apply_kraus(ks, x),
        (1, 1): x, (2, 2): x,
        (0, 1): p1 @ x,
        (0, 2): (np.conj(gamma) * p1 + r22 * p2) @ x,
        (1, 2): np.conj(gamma) * x,
    }
    for (r, s), want in blocks.items():
        out = cc.channel.apply(np.kron(ketbra(3, r, s), x))
        assert np.allclose(out, np.kron(ketbra(3, r, s), want)), (r, s)


def test_composite_with_one_pin_is_relabelled_standard_control(rng):
    ks = random_kraus(2, 2, 2, rng)
    p = ch.canonicalize_pinned(ks, unit_amps(2, rng))
    comp = ct.build_composite_control(p.channel, ct.CompositeControlParams([p.pin], None))
    std = ct.swap_control_labels(ct.build_pinned_control(p))
    assert ch.choi_distance(comp.channel, std.channel) < 1e-12
    inner, params = ct.extract_composite_params(ct.build_pinned_control(p), 1)
    assert np.allclose(params.pins[0], p.pin)


@pytest.mark.parametrize("m", [2, 3])
def test_composite_extract_roundtrip(m, rng):
    ks = random_kraus(2, 2, m + 1, rng)
    g = np.zeros((m, m), dtype=complex)
    for k in range(1, m):
        v = rng.normal(size=k) + 1j * rng.normal(size=k)
        g[:k, k] = 0.8 * v / np.linalg.norm(v)
    params = ct.CompositeControlParams(_pins(ks, m, rng), g)
    cc = ct.build_composite_control(ch.channel(ks), params)
    assert cc.channel.tp_defect() < 1e-12
    inner, got = ct.extract_composite_params(cc, m)
    assert ch.channels_equal(inner, ch.channel(ks))
    assert np.allclose(got.gammas, g)
    for a, b in zip(params.pins, got.pins):
        assert np.allclose(a, b)


def test_composite_params_validation(rng):
    ks = random_kraus(2, 2, 2, rng)
    with pytest.raises(ValueError):
        ct.CompositeControlParams([ks[0], ks[1]], [[0, 1.2], [0, 0]])
    with pytest.raises(ValueError):
        ct.CompositeControlParams([], None)


def test_extract_rejects_non_composite(rng):
    # random control-diagonal channel with non-identity idle branches
    a, b, c = (random_kraus(2, 2, 1, rng)[0] for _ in range(3))
    k = np.kron(ketbra(3, 0, 0), a) + np.kron(ketbra(3, 1, 1), b) + np.kron(ketbra(3, 2, 2), c)
    cc = ct.ControlledChannel(3, 2, 2, ch.channel([k]), ct.CHANNEL_FIRST)
    with pytest.raises(ValueError):
        ct.extract_composite_params(cc, 2)
    with pytest.raises(ValueError, match="dimension"):
        ct.extract_composite_params(cc, 3)
