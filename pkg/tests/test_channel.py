import numpy as np
import pytest

from sectorctrl import channel as ch
from oracles import apply_kraus, choi_by_definition, haar_unitary, random_kraus


@pytest.fixture
def rng():
    return np.random.default_rng(5)


def rand_state(d, rng):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    r = g @ g.conj().T
    return r / np.trace(r)


def test_choi_matches_definition(rng):
    ks = random_kraus(2, 3, 2, rng)
    c = ch.channel(ks)
    assert np.allclose(ch.choi(c), choi_by_definition(ks, 2))
    assert np.allclose(ch.choi_marginal(c), np.eye(2))


def test_apply_matches_kraus_sum(rng):
    ks = random_kraus(3, 2, 3, rng)
    rho = rand_state(3, rng)
    assert np.allclose(ch.channel(ks).apply(rho), apply_kraus(ks, rho))


def test_trace_preservation_enforced(rng):
    ks = random_kraus(2, 2, 2, rng)
    with pytest.raises(ValueError):
        ch.channel([2 * k for k in ks])
    # a CP map need not be trace preserving
    assert ch.cp_map([2 * k for k in ks]).tp_defect() > 1


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        ch.CPMap(2, 2, (np.eye(2), np.eye(3)))
    with pytest.raises(ValueError):
        ch.channel([])


def test_unitary_mixing_keeps_choi(rng):
    ks = random_kraus(2, 2, 3, rng)
    u = haar_unitary(3, rng)
    mixed = ch.mix_kraus(ks, u)
    assert ch.choi_distance(ch.channel(ks), ch.channel(mixed)) < 1e-12
    # an isometry into more operators works as well
    v = haar_unitary(5, rng)[:, :3]
    assert ch.choi_distance(ch.channel(ks), ch.channel(ch.mix_kraus(ks, v))) < 1e-12


def test_distinct_channels_detected(rng):
    a = ch.channel(random_kraus(2, 2, 2, rng))
    b = ch.channel(random_kraus(2, 2, 2, rng))
    assert not ch.channels_equal(a, b)
    with pytest.raises(ValueError):
        ch.choi_distance(a, ch.identity_channel(3))


def test_kraus_from_choi_roundtrip(rng):
    ks = random_kraus(3, 2, 2, rng)
    j = choi_by_definition(ks, 3)
    back = ch.kraus_from_choi(j, 3, 2)
    assert len(back) == 2
    assert np.allclose(choi_by_definition(back, 3), j)
    norms = [np.linalg.norm(k) for k in back]
    assert norms == sorted(norms, reverse=True)
    with pytest.raises(ValueError):
        ch.kraus_from_choi(-j, 3, 2)


def test_minimal_kraus_drops_redundancy(rng):
    ks = random_kraus(2, 2, 2, rng)
    padded = ks + [0.0 * ks[0]] + [ks[0] * 0]
    c = ch.channel(ch.mix_kraus(padded, haar_unitary(4, rng)))
    m = ch.minimal_kraus(c)
    assert len(m.kraus) == 2 and ch.choi_rank(c) == 2
    assert ch.channels_equal(m, c)


def test_random_cptp_is_channel_with_rank():
    c = ch.random_cptp(3, 2, 4, 0)
    assert c.tp_defect() < 1e-12
    assert len(c.kraus) == 4 and ch.choi_rank(c) == 4
    with pytest.raises(ValueError):
        ch.random_cptp(5, 2, 2, 0)
    assert np.array_equal(ch.random_cptp(2, 2, 2, 7).kraus[0], ch.random_cptp(2, 2, 2, 7).kraus[0])


def test_canonicalize_puts_pin_first(rng):
    ks = random_kraus(2, 2, 3, rng)
    a = rng.normal(size=3) + 1j * rng.normal(size=3)
    a /= np.linalg.norm(a)
    p = ch.canonicalize_pinned(ks, a)
    want = sum(np.conj(ai) * k for ai, k in zip(a, ks))
    assert np.allclose(p.pin, want)
    assert np.allclose(p.channel.kraus[0], want)
    assert ch.choi_distance(p.channel, ch.channel(ks)) < 1e-12
    with pytest.raises(ValueError):
        ch.canonicalize_pinned(ks, 2 * a)


def test_pin_validity(rng):
    ks = random_kraus(2, 2, 2, rng)
    c = ch.channel(ks)
    assert ch.is_valid_pin(c, ks[0])
    assert ch.is_valid_pin(c, 0.3 * ks[1])
    assert not ch.is_valid_pin(c, 1.5 * ks[0])
    # an operator outside the Kraus span is never valid
    z = np.array([[0, 1], [0, 0]], dtype=complex)
    k_span = np.stack([k.ravel() for k in ks], 1)
    outside = z.ravel() - k_span @ np.linalg.lstsq(k_span, z.ravel(), rcond=None)[0]
    assert not ch.is_valid_pin(c, 0.1 * outside.reshape(2, 2) / np.linalg.norm(outside))
    with pytest.raises(ValueError):
        ch.PinnedChannel(c, 2 * ks[0])


def test_remainder_completes_the_channel(rng):
    ks = random_kraus(2, 3, 3, rng)
    c = ch.channel(ks)
    pin = 0.6 * ks[0] + 0.8 * ks[2]
    rest = ch.remainder(c, [pin])
    assert np.allclose(choi_by_definition([pin] + list(rest.kraus), 2), ch.choi(c))
    assert ch.remainder(c, ks) is None
    with pytest.raises(ValueError):
        ch.remainder(c, [2 * ks[0]])


def test_compose_and_tensor(rng):
    a = ch.channel(random_kraus(2, 3, 2, rng))
    b = ch.channel(random_kraus(3, 2, 2, rng))
    rho = rand_state(2, rng)
    assert np.allclose(ch.compose(a, b).apply(rho), b.apply(a.apply(rho)))
    s = rand_state(3, rng)
    t = ch.tensor(a, b)
    assert np.allclose(t.apply(np.kron(rho, s)), np.kron(a.apply(rho), b.apply(s)))
    with pytest.raises(ValueError):
        ch.compose(a, a)


def test_dephasing_kills_coherence():
    d = ch.dephasing_qubit()
    rho = np.array([[0.5, 0.3j], [-0.3j, 0.5]])
    assert np.allclose(d.apply(rho), np.diag([0.5, 0.5]))


def test_unitary_channel_rejects_nonunitary():
    with pytest.raises(ValueError):
        ch.unitary_channel(np.diag([1.0, 0.5]))


def test_two_control_prefix_criterion(rng):
    a = ch.minimal_kraus(ch.channel(random_kraus(2, 2, 1, rng)))
    b = ch.channel(random_kraus(2, 2, 3, rng))
    full = ch.mix_kraus(b.kraus, haar_unitary(3, rng))
    assert ch.two_control_equal_iff(a, full[:1], [full[0].copy()], b)
    assert not ch.two_control_equal_iff(a, full[:1], full[1:2], b)
    # mixing the tail only does not matter
    tail = ch.mix_kraus(full[1:], haar_unitary(2, rng))
    assert ch.two_control_distance(a, [full[0]], [full[0]], ch.channel([full[0]] + tail)) < 1e-12


def test_two_control_rejects_bad_arguments(rng):
    ks = random_kraus(2, 2, 2, rng)
    padded = ch.channel(ks + [0 * ks[0]])
    b = ch.channel(random_kraus(2, 2, 3, rng))
    with pytest.raises(ValueError, match="minimal"):
        ch.two_control_equal_iff(padded, b.kraus, b.kraus, b)
    a = ch.minimal_kraus(ch.channel(ks))
    with pytest.raises(ValueError, match="length"):
        ch.two_control_equal_iff(a, b.kraus[:1], b.kraus[:2], b)
    with pytest.raises(ValueError, match="extend"):
        ch.two_control_equal_iff(a, [3 * k for k in b.kraus[:2]], b.kraus[:2], b)


def test_json_roundtrip(rng):
    c = ch.channel(random_kraus(2, 3, 2, rng))
    back = ch.channel_from_json(ch.channel_to_json(c))
    assert all(np.array_equal(x, y) for x, y in zip(c.kraus, back.kraus))
    m = ch.cp_map([2 * np.eye(2)])
    with pytest.raises(ValueError):
        ch.channel_from_json(ch.channel_to_json(m))
    assert ch.channel_from_json(ch.channel_to_json(m), trace_preserving=False).tp_defect() > 1
