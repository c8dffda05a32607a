"""Operational tasks built on the optimal decomposition ``N = (1+s) M' - s M``.

* Quasi-probability simulation: each shot picks ``M'`` or ``M`` with
  probability proportional to its weight, simulates it classically and
  reweights the outcome by ``sign * (1 + 2s)``.
* Memory synthesis: a super-channel that turns ideal ``d_c``-level memories
  into the target while mapping classical memories to classical ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import ChoiState, QuantumChannel, apply, measure_prepare_channel
from .errors import InvalidInputError
from .linalg import check_hermitian, hermitize, max_entangled
from .robustness import INTEGER_NUDGE, RobustnessResult, robustness_ppt

BATCH_SHOTS = 8192
_HADAMARD4 = np.array([[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]], dtype=float)
_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


@dataclass(frozen=True)
class MeasurePrepare:
    """``rho -> sum_k Tr[rho E_k] tau_k``; ``relaxed`` marks a PPT-only component
    simulated through its Choi rather than an explicit classical ensemble."""

    povm: tuple
    states: tuple
    relaxed: bool = False


@dataclass(frozen=True, eq=False)
class QuasiDecomposition:
    s: float
    m_plus: QuantumChannel
    m_minus: QuantumChannel
    plus_ensemble: MeasurePrepare | None = None
    minus_ensemble: MeasurePrepare | None = None
    result: RobustnessResult | None = None

    @property
    def one_norm(self) -> float:
        return 2.0 * self.s + 1.0

    @property
    def overhead(self) -> float:
        return self.one_norm ** 2

    @property
    def relaxed(self) -> bool:
        return any(e is None or e.relaxed for e in (self.plus_ensemble, self.minus_ensemble))


# --- separable decomposition of two-qubit PPT states ---------------------


def takagi(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Factor a complex symmetric ``a = Q diag(s) Q^T`` with ``Q`` unitary."""
    a = 0.5 * (a + a.T)
    u, s, vh = np.linalg.svd(a)
    z = u.conj().T @ vh.T
    w, v = np.linalg.eig(z)
    root = v @ np.diag(np.sqrt(w.astype(complex))) @ np.linalg.inv(v)
    q = u @ root.T
    # polish to unitarity
    uq, _, vq = np.linalg.svd(q)
    return uq @ vq, s


def close_polygon(lengths) -> np.ndarray:
    """Angles ``phi`` with ``sum_k L_k exp(i phi_k) ~ 0`` for four lengths sorted descending.

    Exact whenever the largest length is at most the sum of the others.
    """
    l1, l2, l3, l4 = (float(x) for x in lengths)
    seg = min(max(l1 - l2, abs(l3 - l4)), l3 + l4)

    def tri(a, b, c):
        # angles of sides b and c so that a + b e^{ib} + c e^{ic} = 0, a along 0
        if b <= 1e-300 and c <= 1e-300:
            return 0.0, 0.0
        if c <= 1e-300:
            return np.pi, 0.0
        if b <= 1e-300:
            return 0.0, np.pi
        cos_b = np.clip((c * c - a * a - b * b) / (2 * a * b) if a > 0 else -1.0, -1.0, 1.0)
        ang_b = np.arccos(cos_b)
        vec = -(a + b * np.exp(1j * ang_b))
        ang_c = float(np.angle(vec)) if abs(vec) > 0 else 0.0
        return float(ang_b), ang_c

    ang2, ang_seg = tri(l1, l2, seg)
    # split the segment into l3 and l4
    if seg <= 1e-300:
        a3, a4 = 0.0, np.pi
    elif l4 <= 1e-300:
        a3, a4 = 0.0, 0.0
    else:
        cos3 = np.clip((seg * seg + l3 * l3 - l4 * l4) / (2 * seg * l3), -1.0, 1.0)
        a3 = float(np.arccos(cos3))
        rest = seg - l3 * np.exp(1j * a3)
        a4 = float(np.angle(rest)) if abs(rest) > 0 else 0.0
    return np.array([0.0, ang2, ang_seg + a3, ang_seg + a4])


def product_decomposition_2x2(rho: np.ndarray):
    """Pure product states ``(w_k, a_k, b_k)`` with ``rho = sum w_k |a_k b_k><a_k b_k|``.

    Uses the zero-concurrence construction for two-qubit states; valid for
    separable (equivalently PPT) ``rho``.
    """
    rho = hermitize(rho)
    lam, vec = np.linalg.eigh(rho)
    ymat = vec * np.sqrt(np.clip(lam, 0.0, None))
    gram = ymat.T @ _YY @ ymat
    q, mu = takagi(gram)
    order = np.argsort(-mu)
    q, mu = q[:, order], mu[order]
    phases = np.exp(0.5j * close_polygon(mu))
    u = np.conj(q) @ np.diag(phases) @ _HADAMARD4 / 2.0
    z = ymat @ u
    out = []
    for k in range(4):
        w = float(np.real(np.vdot(z[:, k], z[:, k])))
        if w <= 1e-15:
            continue
        m = z[:, k].reshape(2, 2) / np.sqrt(w)
        uu, sv, vv = np.linalg.svd(m)
        out.append((w, uu[:, 0], vv[0].copy()))
    return out


def measure_prepare_from_choi(choi: ChoiState) -> MeasurePrepare:
    """Explicit classical ensemble for a two-qubit PPT Choi; relaxed otherwise."""
    d_a, d_b = choi.dims
    if (d_a, d_b) != (2, 2):
        return MeasurePrepare((), (), relaxed=True)
    parts = product_decomposition_2x2(choi.matrix)
    povm = [d_a * w * np.outer(a.conj(), a) for w, a, _ in parts]
    states = [np.outer(b, b.conj()) for _, _, b in parts]
    total = hermitize(sum(povm))
    ev, ew = np.linalg.eigh(total)
    fix = (ew / np.sqrt(ev)) @ ew.conj().T
    povm = [hermitize(fix @ e @ fix) for e in povm]
    return MeasurePrepare(tuple(povm), tuple(states), relaxed=False)


def decompose(n: QuantumChannel, result: RobustnessResult | None = None) -> QuasiDecomposition:
    """Optimal quasi-probability decomposition from the standard PPT program."""
    if result is None:
        result = robustness_ppt(n, "standard")
    if result.decomposition is None:
        raise InvalidInputError("decompose needs a robustness result with a decomposition")
    m_minus_choi, m_plus_choi = result.decomposition
    m_plus = QuantumChannel.from_choi(m_plus_choi, n.d_in, n.d_out, label="M'")
    m_minus = QuantumChannel.from_choi(m_minus_choi, n.d_in, n.d_out, label="M")
    return QuasiDecomposition(
        s=result.value,
        m_plus=m_plus,
        m_minus=m_minus,
        plus_ensemble=measure_prepare_from_choi(m_plus_choi),
        minus_ensemble=measure_prepare_from_choi(m_minus_choi),
        result=result,
    )


def _component_law(channel: QuantumChannel, ens: MeasurePrepare, rho, evecs):
    """Outcome law ``p_k = Tr[rho E_k]`` and, per prepared state, the law of the
    observable's eigen-outcomes. A relaxed component has one pseudo-outcome
    preparing ``N(rho)`` itself."""
    if ens is not None and not ens.relaxed:
        p_k = np.array([max(0.0, float(np.real(np.vdot(e, rho)))) for e in ens.povm])
        prepared = ens.states
    else:
        p_k = np.ones(1)
        prepared = (apply(channel, rho),)
    q = np.array([[max(0.0, float(np.real(v.conj() @ t @ v))) for v in evecs.T] for t in prepared])
    return p_k / p_k.sum(), q / q.sum(axis=1, keepdims=True)


def _draw(rng, law, evals, n):
    p_k, q = law
    labels = rng.choice(len(p_k), size=n, p=p_k)
    out = np.empty(n)
    for k in range(len(p_k)):
        mask = labels == k
        cnt = int(mask.sum())
        if cnt:
            out[mask] = evals[rng.choice(len(evals), size=cnt, p=q[k])]
    return out


def sample_estimate(dec: QuasiDecomposition, rho, observable, shots: int, seed=0):
    """Unbiased Monte Carlo estimate of ``Tr[O N(rho)]`` from classical components.

    Returns ``(estimate, std_error)``. Shots run in batches seeded by
    ``SeedSequence([seed, batch])`` so batches may be processed independently.
    """
    shots = int(shots)
    if shots < 1:
        raise InvalidInputError(f"shots must be >= 1, got {shots}")
    rho = check_hermitian(rho, name="rho")
    obs = check_hermitian(observable, name="observable")
    if rho.shape != (dec.m_plus.d_in,) * 2:
        raise InvalidInputError(f"rho has shape {rho.shape}, channel input is {dec.m_plus.d_in}")
    if obs.shape != (dec.m_plus.d_out,) * 2:
        raise InvalidInputError(f"observable has shape {obs.shape}, channel output is {dec.m_plus.d_out}")
    evals, evecs = np.linalg.eigh(obs)
    if np.max(np.abs(evals)) > 1.0 + 1e-12:
        raise InvalidInputError(f"observable operator norm {np.max(np.abs(evals)):.6g} exceeds 1")

    s = dec.s
    norm1 = dec.one_norm
    p_plus = (1.0 + s) / norm1
    law_plus = _component_law(dec.m_plus, dec.plus_ensemble, rho, evecs)
    law_minus = _component_law(dec.m_minus, dec.minus_ensemble, rho, evecs)

    total = 0.0
    total_sq = 0.0
    done = 0
    batch = 0
    while done < shots:
        n = min(BATCH_SHOTS, shots - done)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), batch])))
        plus = rng.random(n) < p_plus
        n_plus = int(plus.sum())
        out = np.empty(n)
        out[plus] = norm1 * _draw(rng, law_plus, evals, n_plus)
        out[~plus] = -norm1 * _draw(rng, law_minus, evals, n - n_plus)
        total += float(out.sum())
        total_sq += float(np.dot(out, out))
        done += n
        batch += 1
    mean = total / shots
    var = max(0.0, total_sq / shots - mean * mean)
    std_error = math.sqrt(var / shots) if shots > 1 else float("nan")
    return mean, std_error


# --- synthesis -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SuperChannel:
    """``Lambda(Phi_C) = Tr[phi+ Phi_C] Phi_target + Tr[(I - phi+) Phi_C] Phi_filler``."""

    target: ChoiState
    filler: ChoiState
    probe_dimension: int

    def apply(self, probe) -> ChoiState:
        probe_choi = probe.choi if isinstance(probe, QuantumChannel) else probe
        dc = self.probe_dimension
        if probe_choi.dims != (dc, dc):
            raise InvalidInputError(f"probe must be a {dc}->{dc} channel, got {probe_choi.dims}")
        t = float(np.real(np.vdot(max_entangled(dc), probe_choi.matrix)))
        t = min(1.0, max(0.0, t))
        m = t * self.target.matrix + (1.0 - t) * self.filler.matrix
        return ChoiState(self.target.d_A, self.target.d_B, hermitize(m))

    __call__ = apply


def synthesis_superchannel(n_target: QuantumChannel, result: RobustnessResult | None = None) -> SuperChannel:
    """Super-channel building ``n_target`` from an ideal memory of dimension ``1 + ceil(R)``."""
    if result is None:
        result = robustness_ppt(n_target, "standard")
    if result.decomposition is None:
        raise InvalidInputError("synthesis needs a robustness result with a decomposition")
    nudge = max(INTEGER_NUDGE, result.tolerance)
    dc = 1 + math.ceil(max(0.0, result.value - nudge))
    m_minus, _ = result.decomposition
    return SuperChannel(n_target.choi, m_minus, dc)
