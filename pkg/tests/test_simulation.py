import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmem.channels import (
    ChoiState,
    damping,
    dephasing,
    depolarizing,
    erasure,
    identity,
    is_ppt_choi,
    random_channel,
    random_eb_channel,
)
from qmem.errors import InvalidInputError
from qmem.linalg import PAULI_X, PAULI_Z, max_entangled
from qmem.robustness import robustness_ppt
from qmem.simulation import (
    close_polygon,
    decompose,
    measure_prepare_from_choi,
    product_decomposition_2x2,
    sample_estimate,
    synthesis_superchannel,
    takagi,
)

PLUS = np.full((2, 2), 0.5, dtype=complex)
FAMILY = [identity(2), identity(3), dephasing(0.1), dephasing(0.75), depolarizing(0.6), damping(0.35),
          erasure(0.4), erasure(1.0), random_channel(2, 2, 2, seed=1)]


def test_decompose_examples():
    dec = decompose(random_eb_channel(2, 2, 3, seed=0))
    assert dec.s == 0 and dec.overhead == 1
    dec = decompose(identity(2))
    assert abs(dec.overhead - 9) < 1e-6
    dec = decompose(dephasing(0.75))
    assert abs(dec.s - 0.5) < 1e-6 and abs(dec.overhead - 4) < 1e-5
    assert dec.overhead == dec.one_norm ** 2


@pytest.mark.parametrize("ch", FAMILY, ids=lambda c: c.label or "random")
def test_decomposition_reconstructs(ch):
    dec = decompose(ch)
    r = dec.result
    s = dec.s
    recon = (1 + s) * dec.m_plus.choi.matrix - s * dec.m_minus.choi.matrix
    assert np.linalg.norm(recon - ch.choi.matrix) <= 1e-7
    assert abs(dec.overhead - (1 + 2 * r.value) ** 2) <= 1e-5
    assert is_ppt_choi(dec.m_plus.choi) and is_ppt_choi(dec.m_minus.choi)
    assert dec.relaxed == (ch.d_in * ch.d_out != 4)


def test_takagi_factorization(rng):
    for _ in range(50):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        a = a + a.T
        q, s = takagi(a)
        np.testing.assert_allclose(q @ np.diag(s) @ q.T, a, atol=1e-9)
        np.testing.assert_allclose(q.conj().T @ q, np.eye(4), atol=1e-12)


def test_close_polygon(rng):
    for _ in range(200):
        lengths = np.sort(rng.uniform(0, 1, size=4))[::-1]
        if lengths[0] > lengths[1:].sum():
            continue
        phi = close_polygon(lengths)
        assert abs(np.sum(lengths * np.exp(1j * phi))) < 1e-9


def test_product_decomposition_of_separable_states(rng):
    worst = 0.0
    for k in range(300):
        rho = random_eb_channel(2, 2, int(k % 4) + 1, seed=rng).choi.matrix
        parts = product_decomposition_2x2(rho)
        recon = sum(w * np.kron(np.outer(a, a.conj()), np.outer(b, b.conj())) for w, a, b in parts)
        worst = max(worst, float(np.max(np.abs(recon - rho))))
    assert worst < 1e-8


def test_measure_prepare_ensemble_reproduces_choi():
    ch = depolarizing(0.3)
    ens = measure_prepare_from_choi(ch.choi)
    assert not ens.relaxed
    np.testing.assert_allclose(sum(ens.povm), np.eye(2), atol=1e-10)
    rebuilt = sum(np.kron(e.T, s) for e, s in zip(ens.povm, ens.states)) / 2
    np.testing.assert_allclose(rebuilt, ch.choi.matrix, atol=1e-8)
    assert measure_prepare_from_choi(erasure(0.2).choi).relaxed


def test_trivial_estimate_exact():
    dec = decompose(random_eb_channel(2, 2, 2, seed=4))
    est, err = sample_estimate(dec, np.diag([0.3, 0.7]), np.eye(2), 1000, seed=1)
    assert est == pytest.approx(1.0, abs=1e-12) and err == pytest.approx(0.0, abs=1e-12)


def test_identity_estimate():
    dec = decompose(identity(2))
    est, err = sample_estimate(dec, PLUS, PAULI_X, 100_000, seed=3)
    assert abs(est - 1.0) <= 5 * err
    assert abs(err - 3 / np.sqrt(100_000)) < 0.2 * 3 / np.sqrt(100_000)


def test_dephasing_estimate():
    dec = decompose(dephasing(0.75))
    est, err = sample_estimate(dec, PLUS, PAULI_X, 100_000, seed=5)
    assert abs(est - 0.5) <= 5 * err


def test_relaxed_component_estimate():
    dec = decompose(erasure(0.6))
    obs = np.diag([1.0, -1.0, 0.5])
    rho = np.array([[0.7, 0.2], [0.2, 0.3]], dtype=complex)
    exact = float(np.real(np.trace(obs @ erasure(0.6)(rho))))
    est, err = sample_estimate(dec, rho, obs, 50_000, seed=2)
    assert abs(est - exact) <= 5 * err


def test_sample_input_validation():
    dec = decompose(dephasing(0.75))
    with pytest.raises(InvalidInputError):
        sample_estimate(dec, PLUS, 2 * PAULI_X, 10)
    with pytest.raises(InvalidInputError):
        sample_estimate(dec, PLUS, PAULI_X, 0)
    with pytest.raises(InvalidInputError):
        sample_estimate(dec, np.eye(3) / 3, PAULI_X, 10)


def test_seed_reproducibility():
    dec = decompose(dephasing(0.75))
    a = sample_estimate(dec, PLUS, PAULI_Z, 20_000, seed=9)
    b = sample_estimate(dec, PLUS, PAULI_Z, 20_000, seed=9)
    c = sample_estimate(dec, PLUS, PAULI_Z, 20_000, seed=10)
    assert a == b and a != c


def test_estimator_variance_bound():
    # spread over 200 independent runs stays within the ||c||_1^2 / shots scale
    dec = decompose(dephasing(0.75))
    shots = 2000
    est = np.array([sample_estimate(dec, PLUS, PAULI_X, shots, seed=1000 + k)[0] for k in range(200)])
    assert est.var(ddof=1) <= dec.overhead / shots * 1.1
    assert abs(est.mean() - 0.5) <= 5 * est.std(ddof=1) / np.sqrt(200)


@pytest.mark.parametrize("ch", FAMILY, ids=lambda c: c.label or "random")
def test_synthesis_reproduces_target(ch):
    r = robustness_ppt(ch)
    sc = synthesis_superchannel(ch, r)
    assert sc.probe_dimension == 1 + int(np.ceil(r.value - 1e-7))
    dc = sc.probe_dimension
    out = sc(ChoiState(dc, dc, max_entangled(dc)))
    assert np.max(np.abs(out.matrix - ch.choi.matrix)) <= 1e-6


@pytest.mark.parametrize("ch", [identity(2), dephasing(0.9), damping(0.2), erasure(0.5)], ids=lambda c: c.label)
def test_synthesis_maps_eb_to_ppt(ch):
    sc = synthesis_superchannel(ch)
    dc = sc.probe_dimension
    for k in range(50):
        probe = random_eb_channel(dc, dc, int(k % 5) + 1, seed=k)
        assert is_ppt_choi(sc(probe))


def test_synthesis_of_eb_target_is_constant():
    ch = random_eb_channel(2, 2, 3, seed=6)
    sc = synthesis_superchannel(ch)
    assert sc.probe_dimension == 1
    out = sc(ChoiState(1, 1, np.ones((1, 1))))
    np.testing.assert_allclose(out.matrix, ch.choi.matrix, atol=1e-12)
    with pytest.raises(InvalidInputError):
        sc(identity(2))


@settings(max_examples=100)
@given(seed=st.integers(0, 2**31 - 1))
def test_random_decompositions_have_theorem_overhead(seed):
    ch = random_channel(2, 2, 2, seed=seed)
    dec = decompose(ch)
    assert abs(dec.overhead - (1 + 2 * dec.result.value) ** 2) <= 1e-5
    recon = (1 + dec.s) * dec.m_plus.choi.matrix - dec.s * dec.m_minus.choi.matrix
    assert np.linalg.norm(recon - ch.choi.matrix) <= 1e-7
