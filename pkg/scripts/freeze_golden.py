"""Freeze golden dynamics numbers from an independent 10^4-step oracle.

The oracle shares no code with ``qmem.dynamics``: propagators come from
``scipy.linalg.expm``, the Choi state is built by an explicit partial trace
over the bath and robustness uses ``numpy.linalg.eigvalsh``.
Writes ``tests/data/golden_dynamics.json``.
"""

import json
import math
from pathlib import Path

import numpy as np
from scipy.linalg import expm

STEPS = 10_000
T_MAX = math.pi
DD_RATE = 5.0 / math.pi
OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "golden_dynamics.json"

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
H = 0.2 * (np.kron(X, X) + np.kron(Y, Y)) + np.kron(Z, Z)
RHO_B = np.diag([0.4, 0.6]).astype(complex)
PHI = np.zeros((4, 1), dtype=complex)
PHI[0] = PHI[3] = 1 / math.sqrt(2)
PHI = PHI @ PHI.conj().T


def unitary(t, rate):
    u = np.eye(4, dtype=complex)
    last = 0.0
    if rate:
        k = 1
        while k / rate <= t * (1 + 1e-12):
            u = np.kron(X, np.eye(2)) @ expm(-1j * H * (k / rate - last)) @ u
            last = k / rate
            k += 1
    return expm(-1j * H * (t - last)) @ u


def robustness(t, rate=None):
    u = unitary(t, rate)
    # reference R, memory M, bath B; order R M B
    big = np.kron(np.eye(2), u)
    state = big @ np.kron(PHI, RHO_B) @ big.conj().T
    choi = np.einsum("ambcnb->amcn", state.reshape(2, 2, 2, 2, 2, 2)).reshape(4, 4)
    lam = np.linalg.eigvalsh(choi)[-1]
    return max(0.0, 2 * lam - 1)


def main():
    times = np.linspace(0.0, T_MAX, STEPS + 1)
    r = np.array([robustness(t) for t in times])
    inc = np.clip(np.diff(r), 0, None)
    i_pi = float(inc.sum())
    k_min = int(np.argmin(r[: int(0.4 * STEPS)]))
    k_rev = k_min + int(np.argmax(r[k_min:]))
    golden = {
        "steps": STEPS,
        "t_max": T_MAX,
        "non_markovianity_pi": i_pi,
        "first_minimum": {"t": float(times[k_min]), "robustness": float(r[k_min])},
        "revival_maximum": {"t": float(times[k_rev]), "robustness": float(r[k_rev])},
        "samples": {f"{t:g}": robustness(t) for t in (0.25, 0.5, 0.8, 1.0, 1.5, 2.0, 3.0)},
        "dd_rate": DD_RATE,
        "dd_samples": {f"{t:g}": robustness(t, DD_RATE) for t in (0.25, 0.5, 0.8, 1.0, 1.5, 2.0, 3.0)},
    }
    golden["dd_ratio_0.8"] = golden["dd_samples"]["0.8"] / golden["samples"]["0.8"]
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(golden, indent=1) + "\n")
    print(json.dumps(golden, indent=1))


if __name__ == "__main__":
    main()
