import json
import math
from pathlib import Path

import numpy as np
import pytest

from qmem.channels import lindblad_dephasing
from qmem.dynamics import (
    DEFAULT_DD_RATE,
    NO_PULSES,
    BathModel,
    PulseSequence,
    evolve_channel,
    non_markovianity,
    qubit_bath_model,
    total_propagator,
    trajectory,
)
from qmem.errors import InvalidInputError
from qmem.linalg import PAULI_Z, kron, max_entangled
from qmem.robustness import eig_lower_bound

GOLDEN = json.loads((Path(__file__).parent / "data" / "golden_dynamics.json").read_text())


def test_time_zero_is_identity():
    np.testing.assert_allclose(evolve_channel(qubit_bath_model(), None, 0.0).choi.matrix, max_entangled(2), atol=1e-10)


def test_zz_coupling_is_pure_dephasing():
    model = BathModel(kron(PAULI_Z, PAULI_Z), np.diag([0.4, 0.6]))
    for t in (0.1, 0.5, 1.3, 2.9):
        m = evolve_channel(model, None, t).choi.matrix
        expected = abs(0.4 * np.exp(-2j * t) + 0.6 * np.exp(2j * t)) / 2
        assert abs(abs(m[0, 3]) - expected) < 1e-12
        assert abs(m[1, 1]) < 1e-12 and abs(m[0, 0] - 0.5) < 1e-12


def test_propagator_unitary():
    model = qubit_bath_model()
    for t in (0.0, 0.8, math.pi, 17.0):
        for pulses in (NO_PULSES, PulseSequence(rate=DEFAULT_DD_RATE)):
            u = total_propagator(model, pulses, t)
            assert np.max(np.abs(u.conj().T @ u - np.eye(4))) <= 1e-9


def test_pulse_times():
    seq = PulseSequence(rate=2.0)
    np.testing.assert_allclose(seq.times(1.0), [0.5, 1.0])
    assert len(seq.times(0.49)) == 0
    assert len(NO_PULSES.times(10.0)) == 0


def test_invalid_configs():
    with pytest.raises(InvalidInputError):
        PulseSequence(pulse_unitary=np.diag([1.0, 2.0]))
    with pytest.raises(InvalidInputError):
        PulseSequence(rate=-1.0)
    with pytest.raises(InvalidInputError):
        BathModel(np.eye(4), np.diag([0.5, 0.6]))
    with pytest.raises(InvalidInputError):
        BathModel(np.eye(3), np.diag([0.5, 0.5]))
    with pytest.raises(InvalidInputError):
        evolve_channel(qubit_bath_model(), None, -1.0)
    with pytest.raises(InvalidInputError):
        trajectory(qubit_bath_model(), None, 1.0, 1)


def test_non_markovianity_sum():
    np.testing.assert_allclose(non_markovianity([1.0, 0.5, 0.7, 0.6, 0.9]), [0, 0, 0.2, 0.2, 0.5])


def test_trajectory_shape_and_monotone_measure():
    tr = trajectory(qubit_bath_model(), None, math.pi, 200)
    assert len(tr.times) == len(tr.channels) == len(tr.robustness) == len(tr.non_markovianity) == 201
    assert tr.non_markovianity[0] == 0
    assert np.all(np.diff(tr.non_markovianity) >= 0)


def test_markovian_semigroup_has_no_memory_effect():
    tr = trajectory(lambda t: lindblad_dephasing(1.0, t), None, math.pi, 500)
    assert tr.non_markovianity[-1] <= 1e-9


def test_bath_model_revival():
    tr = trajectory(qubit_bath_model(), None, math.pi, 1000)
    r = tr.robustness
    k = int(np.argmin(r[: 400]))
    assert 0 < k and r[k] < r[k - 1] and r[k] < r[k + 1]
    assert r[k + 1:].max() > r[k] + 0.3
    assert 0.6 < tr.times[k] < 1.0


def test_golden_values_from_oracle():
    model = qubit_bath_model()
    for t, v in GOLDEN["samples"].items():
        assert abs(eig_lower_bound(evolve_channel(model, None, float(t))).value - v) < 1e-10
    dd = PulseSequence(rate=GOLDEN["dd_rate"])
    for t, v in GOLDEN["dd_samples"].items():
        assert abs(eig_lower_bound(evolve_channel(model, dd, float(t))).value - v) < 1e-10
    assert GOLDEN["dd_rate"] == DEFAULT_DD_RATE


def test_grid_convergence():
    i500 = trajectory(qubit_bath_model(), None, math.pi, 500).non_markovianity[-1]
    i1000 = trajectory(qubit_bath_model(), None, math.pi, 1000).non_markovianity[-1]
    assert abs(i500 - i1000) <= 0.01 * i1000
    assert abs(i1000 - GOLDEN["non_markovianity_pi"]) <= 0.01 * GOLDEN["non_markovianity_pi"]


def test_fast_pulses_change_dynamics():
    model = qubit_bath_model()
    free = eig_lower_bound(evolve_channel(model, None, 0.8)).value
    fast = eig_lower_bound(evolve_channel(model, PulseSequence(rate=200 / np.pi), 0.8)).value
    assert fast > free


def test_every_channel_valid():
    tr = trajectory(qubit_bath_model(), PulseSequence(rate=DEFAULT_DD_RATE), math.pi, 100)
    for ch in tr.channels:
        assert ch.choi.d_A == 2  # ChoiState construction validates the rest
