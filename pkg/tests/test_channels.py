import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmem.channels import (
    ChoiState,
    QuantumChannel,
    apply,
    apply_kraus,
    channel_partial_trace,
    choi_to_kraus,
    compose,
    damping,
    dephasing,
    depolarizing,
    erasure,
    family,
    identity,
    is_ppt_choi,
    kraus_to_choi,
    lindblad_dephasing,
    measure_prepare_channel,
    random_channel,
    random_eb_channel,
    tensor,
)
from qmem.errors import CapacityError, InvalidInputError
from qmem.linalg import PAULI_Z, max_entangled, partial_trace, projector, ket

from conftest import random_density

seeds = st.integers(0, 2**31 - 1)
small_dim = st.integers(1, 3)


def completely_depolarizing(d=2):
    return depolarizing(0.0) if d == 2 else measure_prepare_channel([np.eye(d)], [np.eye(d) / d])


def test_identity_choi_is_max_entangled():
    m = identity(2).choi.matrix
    expected = np.zeros((4, 4))
    expected[np.ix_([0, 3], [0, 3])] = 0.5
    np.testing.assert_allclose(m, expected, atol=1e-15)


def test_completely_depolarizing_choi():
    np.testing.assert_allclose(completely_depolarizing().choi.matrix, np.eye(4) / 4, atol=1e-15)


def test_dephasing_choi_entries():
    m = dephasing(0.75).choi.matrix
    np.testing.assert_allclose(np.diag(m).real, [0.5, 0, 0, 0.5], atol=1e-15)
    assert abs(m[0, 3] - 0.25) < 1e-15 and abs(m[3, 0] - 0.25) < 1e-15
    m = dephasing(0.5).choi.matrix
    assert abs(m[0, 3]) < 1e-15


def test_apply_examples(rng):
    rho = random_density(rng, 2)
    np.testing.assert_allclose(apply(identity(2), rho), rho, atol=1e-14)
    np.testing.assert_allclose(apply(erasure(0.0), rho), projector(ket(2, 3)), atol=1e-14)
    np.testing.assert_allclose(apply(damping(0.5), projector(ket(1, 2))), np.eye(2) / 2, atol=1e-14)


def test_apply_dimension_mismatch():
    with pytest.raises(InvalidInputError):
        apply(identity(2), np.eye(3) / 3)


def test_family_examples():
    (k,) = family("identity", 2).kraus
    np.testing.assert_array_equal(k, np.eye(2))
    e1 = family("erasure", 1.0)
    assert (e1.d_in, e1.d_out) == (2, 3)
    embed = np.eye(3)[:, :2]
    np.testing.assert_allclose(apply(e1, np.array([[0.3, 0.2j], [-0.2j, 0.7]])), embed @ np.array([[0.3, 0.2j], [-0.2j, 0.7]]) @ embed.T, atol=1e-15)


@pytest.mark.parametrize("name,params", [("dephasing", (1.2,)), ("damping", (-0.1,)), ("erasure", (2,)),
                                         ("lindblad_dephasing", (-1, 1)), ("identity", (1,)), ("nope", (0.5,))])
def test_family_rejects_bad_parameters(name, params):
    with pytest.raises(InvalidInputError):
        family(name, *params)


def test_lindblad_is_dephasing():
    for g, t in [(1.0, 0.0), (1.0, 0.7), (0.3, 5.0)]:
        p = (1 + np.exp(-g * t)) / 2
        np.testing.assert_allclose(lindblad_dephasing(g, t).choi.matrix, dephasing(p).choi.matrix, atol=1e-14)


def test_non_trace_preserving_kraus_rejected():
    with pytest.raises(InvalidInputError):
        QuantumChannel.from_kraus([np.diag([1.0, 0.5])])


def test_bad_choi_rejected():
    with pytest.raises(InvalidInputError):
        ChoiState(2, 2, np.eye(4) / 2)
    with pytest.raises(InvalidInputError):
        ChoiState(2, 2, np.diag([0.5, 0.5, 0, 0]))  # wrong marginal
    with pytest.raises(CapacityError):
        ChoiState(9, 8, np.eye(72) / 72)


@pytest.mark.parametrize("p,q", [(0.1, 0.2), (0.5, 0.9), (1.0, 0.3), (0.0, 0.0)])
def test_dephasing_composition(p, q):
    c = compose(dephasing(p), dephasing(q))
    np.testing.assert_allclose(c.choi.matrix, dephasing(p * q + (1 - p) * (1 - q)).choi.matrix, atol=1e-12)


def test_compose_identity_and_depolarizing():
    n = random_channel(2, 2, 3, seed=4)
    np.testing.assert_allclose(compose(identity(2), n).choi.matrix, n.choi.matrix, atol=1e-12)
    np.testing.assert_allclose(compose(completely_depolarizing(), n).choi.matrix, np.eye(4) / 4, atol=1e-12)
    with pytest.raises(InvalidInputError):
        compose(identity(2), erasure(0.5))


def test_tensor_examples():
    t = tensor(identity(2), identity(2))
    np.testing.assert_allclose(t.choi.matrix, max_entangled(4), atol=1e-15)
    # dephasing(1) is the identity and dephasing(0) is conjugation by Z: both Chois are pure
    w = np.linalg.eigvalsh(tensor(dephasing(1.0), dephasing(0.0)).choi.matrix)
    np.testing.assert_allclose(w, [0] * 15 + [1], atol=1e-14)
    w = np.linalg.eigvalsh(tensor(dephasing(0.5), dephasing(0.5)).choi.matrix)
    np.testing.assert_allclose(np.sort(w)[::-1][:4], [0.25] * 4, atol=1e-14)
    with pytest.raises(CapacityError):
        tensor(identity(3), identity(3))


def test_tensor_matches_kraus_action(rng):
    a, b = random_channel(2, 3, 2, seed=1), random_channel(2, 2, 2, seed=2)
    t = tensor(a, b)
    rho, sig = random_density(rng, 2), random_density(rng, 2)
    np.testing.assert_allclose(apply(t, np.kron(rho, sig)), np.kron(apply(a, rho), apply(b, sig)), atol=1e-12)


def test_channel_partial_trace_examples():
    n = random_channel(2, 2, 2, seed=9)
    t = tensor(n, completely_depolarizing())
    np.testing.assert_allclose(channel_partial_trace(t, "B", (2, 2), (2, 2)).choi.matrix, n.choi.matrix, atol=1e-12)
    np.testing.assert_allclose(channel_partial_trace(t, "A", (2, 2), (2, 2)).choi.matrix, np.eye(4) / 4, atol=1e-12)
    r = channel_partial_trace(identity(4), "B", (2, 2), (2, 2))
    np.testing.assert_allclose(r.choi.matrix, identity(2).choi.matrix, atol=1e-12)
    assert abs(np.trace(r.choi.matrix) - 1) < 1e-12
    with pytest.raises(InvalidInputError):
        channel_partial_trace(identity(4), "B", (3, 2), (2, 2))


def test_random_eb_examples(rng):
    c = random_eb_channel(2, 3, 1, seed=5)
    sigma = apply(c, np.eye(2) / 2)
    np.testing.assert_allclose(c.choi.matrix, np.kron(np.eye(2) / 2, sigma), atol=1e-12)
    basis = [projector(ket(i, 2)) for i in range(2)]
    mp = measure_prepare_channel(basis, basis)
    np.testing.assert_allclose(mp.choi.matrix, dephasing(0.5).choi.matrix, atol=1e-15)
    a = random_eb_channel(3, 2, 4, seed=11)
    b = random_eb_channel(3, 2, 4, seed=11)
    np.testing.assert_array_equal(a.choi.matrix, b.choi.matrix)


def test_is_ppt_examples():
    assert not is_ppt_choi(identity(2).choi)
    assert is_ppt_choi(depolarizing(1 / 3).choi)
    assert not is_ppt_choi(depolarizing(1 / 3 + 1e-3).choi)
    assert is_ppt_choi(random_eb_channel(2, 2, 3, seed=0).choi)


def test_random_channel_chois_valid():
    # fuzz 500 random channels of assorted shapes through every Choi invariant
    rng = np.random.default_rng(7)
    for k in range(500):
        d_in, d_out = (int(x) for x in rng.integers(1, 5, size=2))
        nk = int(rng.integers(-(-d_in // d_out), 5))
        ch = random_channel(d_in, d_out, nk, seed=rng)
        m = ch.choi.matrix
        assert np.linalg.eigvalsh(m)[0] >= -1e-9
        assert abs(np.trace(m) - 1) <= 1e-10
        assert np.max(np.abs(partial_trace(m, "B", (d_in, d_out)) - np.eye(d_in) / d_in)) <= 1e-9


def test_random_eb_all_ppt():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        d_in, d_out = (int(x) for x in rng.integers(2, 4, size=2))
        ch = random_eb_channel(d_in, d_out, int(rng.integers(1, 6)), seed=rng)
        assert is_ppt_choi(ch.choi)


@settings(max_examples=120)
@given(d_in=small_dim, d_out=small_dim, nk=st.integers(1, 4), seed=seeds)
def test_choi_and_kraus_apply_agree(d_in, d_out, nk, seed):
    nk = max(nk, -(-d_in // d_out))
    ch = random_channel(d_in, d_out, nk, seed=seed)
    rho = random_density(np.random.default_rng(seed + 1), d_in)
    out = apply(ch, rho)
    np.testing.assert_allclose(out, apply_kraus(ch, rho), atol=1e-10)
    assert abs(np.trace(out) - 1) < 1e-10
    assert np.linalg.eigvalsh(out)[0] > -1e-9
    np.testing.assert_allclose(kraus_to_choi(ch).matrix, ch.choi.matrix, atol=1e-10)
    rebuilt = QuantumChannel.from_kraus(choi_to_kraus(ch.choi))
    np.testing.assert_allclose(rebuilt.choi.matrix, ch.choi.matrix, atol=1e-10)


@settings(max_examples=120)
@given(d=st.integers(1, 3), seed=seeds)
def test_compose_associative(d, seed):
    a, b, c = (random_channel(d, d, 2, seed=seed + k) for k in range(3))
    left = compose(compose(a, b), c)
    right = compose(a, compose(b, c))
    np.testing.assert_allclose(left.choi.matrix, right.choi.matrix, atol=1e-10)
    rho = random_density(np.random.default_rng(seed), d)
    np.testing.assert_allclose(apply(left, rho), apply(a, apply(b, apply(c, rho))), atol=1e-10)


def test_dephasing_kraus_form():
    ks = dephasing(0.3).kraus
    rho = np.array([[0.6, 0.1 + 0.2j], [0.1 - 0.2j, 0.4]])
    np.testing.assert_allclose(sum(k @ rho @ k.conj().T for k in ks), 0.3 * rho + 0.7 * PAULI_Z @ rho @ PAULI_Z)
