"""Nonlocal quantum games and their witness operators.

A game ``{alpha_ij, sigma_i, O_j}`` pays ``sum_ij alpha_ij Tr[N(sigma_i) O_j]``
on a channel ``N``. It is equivalent to the witness
``W = d_A sum_ij alpha_ij sigma_i^T (x) O_j`` through ``P = Tr[Phi_N W]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .channels import QuantumChannel, apply
from .errors import InvalidInputError
from .linalg import PAULIS, check_hermitian, herm_eig, hermitize, kron

STATE_TOL = 1e-10
OBS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Game:
    inputs: tuple
    observables: tuple
    coefficients: np.ndarray
    label: str = ""
    eb_normalized: bool = False
    setting_coefficients: tuple | None = None

    def __post_init__(self):
        ins = tuple(check_hermitian(s, name="input state") for s in self.inputs)
        obs = tuple(check_hermitian(o, name="observable") for o in self.observables)
        if not ins or not obs:
            raise InvalidInputError("a game needs at least one input and one observable")
        for s in ins:
            if s.shape != ins[0].shape:
                raise InvalidInputError("input states must share one dimension")
            if abs(np.trace(s).real - 1) > STATE_TOL:
                raise InvalidInputError("input state is not unit trace")
            if herm_eig(s)[0][0] < -STATE_TOL:
                raise InvalidInputError("input state is not PSD")
        for o in obs:
            if o.shape != obs[0].shape:
                raise InvalidInputError("observables must share one dimension")
            ev = herm_eig(o)[0]
            if ev[0] < -OBS_TOL or ev[-1] > 1 + OBS_TOL:
                raise InvalidInputError("observable must satisfy 0 <= O <= I")
        alpha = np.asarray(self.coefficients, dtype=float)
        if alpha.shape != (len(ins), len(obs)):
            raise InvalidInputError(
                f"coefficients have shape {alpha.shape}, expected ({len(ins)}, {len(obs)})"
            )
        for a in (*ins, *obs, alpha):
            a.setflags(write=False)
        object.__setattr__(self, "inputs", ins)
        object.__setattr__(self, "observables", obs)
        object.__setattr__(self, "coefficients", alpha)
        if self.setting_coefficients is not None:
            object.__setattr__(
                self, "setting_coefficients", tuple(float(c) for c in self.setting_coefficients)
            )

    @property
    def d_in(self) -> int:
        return self.inputs[0].shape[0]

    @property
    def d_out(self) -> int:
        return self.observables[0].shape[0]


@dataclass(frozen=True)
class PayoffResult:
    payoff: float
    per_setting: list = field(default_factory=list)
    robustness_lower_bound: float = 0.0
    normalized: bool = False


def payoff(game: Game, channel: QuantumChannel) -> PayoffResult:
    """``sum_ij alpha_ij Tr[N(sigma_i) O_j]``; the bound ``payoff - 1`` needs an EB-normalized game."""
    if (channel.d_in, channel.d_out) != (game.d_in, game.d_out):
        raise InvalidInputError(
            f"game is {game.d_in}->{game.d_out} but channel is {channel.d_in}->{channel.d_out}"
        )
    rows = []
    total = 0.0
    for i, sigma in enumerate(game.inputs):
        out = apply(channel, sigma)
        for j, obs in enumerate(game.observables):
            a = game.coefficients[i, j]
            if a == 0.0:
                continue
            prob = float(np.real(np.vdot(obs, out)))
            term = a * prob
            rows.append((i, j, prob, term))
            total += term
    return PayoffResult(total, rows, total - 1.0, game.eb_normalized)


def game_to_witness(game: Game) -> np.ndarray:
    """``W = d_A sum_ij alpha_ij sigma_i^T (x) O_j``."""
    d = game.d_in
    w = np.zeros((d * game.d_out,) * 2, dtype=complex)
    for i, sigma in enumerate(game.inputs):
        for j, obs in enumerate(game.observables):
            a = game.coefficients[i, j]
            if a != 0.0:
                w += a * kron(sigma.T, obs)
    return hermitize(d * w)


# --- operator bases -------------------------------------------------------


def gell_mann_basis(d: int) -> list[np.ndarray]:
    """Identity plus the generalized Gell-Mann matrices (symmetric, antisymmetric, diagonal)."""
    basis = [np.eye(d, dtype=complex)]
    for j, k in itertools.combinations(range(d), 2):
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = m[k, j] = 1.0
        basis.append(m)
    for j, k in itertools.combinations(range(d), 2):
        m = np.zeros((d, d), dtype=complex)
        m[j, k], m[k, j] = -1j, 1j
        basis.append(m)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        basis.append(np.diag(diag * np.sqrt(2.0 / (l * (l + 1)))).astype(complex))
    return basis


def pauli_product_basis(d: int) -> list[np.ndarray]:
    """Pauli strings when ``d`` is a power of two, Gell-Mann matrices otherwise.

    Strings are ordered lexicographically by Pauli index (I, X, Y, Z).
    """
    n = int(round(np.log2(d))) if d > 0 else 0
    if d >= 2 and 2 ** n == d:
        out = []
        for idx in itertools.product(range(4), repeat=n):
            m = np.ones((1, 1), dtype=complex)
            for i in idx:
                m = np.kron(m, PAULIS[i])
            out.append(m)
        return out
    return gell_mann_basis(d)


def _spectral_pieces(b: np.ndarray, tol: float = 1e-9):
    """Write ``b = shift I + sum_k c_k P_k`` with orthogonal projectors ``P_k``.

    ``shift`` is the eigenvalue of largest multiplicity (ties prefer zero, then
    the smallest value), which keeps the number of projectors small.
    """
    w, v = np.linalg.eigh(b)
    groups: list[list[int]] = []
    for i, lam in enumerate(w):
        if groups and abs(lam - w[groups[-1][0]]) <= tol * max(1.0, abs(lam)):
            groups[-1].append(i)
        else:
            groups.append([i])
    vals = [float(np.mean(w[g])) for g in groups]
    best = max(range(len(groups)), key=lambda k: (len(groups[k]), abs(vals[k]) <= tol, -vals[k]))
    shift = vals[best] if abs(vals[best]) > tol else 0.0
    pieces = []
    for k, g in enumerate(groups):
        if k == best:
            continue
        vecs = v[:, g]
        pieces.append((vals[k] - shift, hermitize(vecs @ vecs.conj().T), len(g)))
    return shift, pieces


class _Dedup:
    """Collect matrices, merging entries equal within ``tol``."""

    def __init__(self, tol: float = 1e-9):
        self.items: list[np.ndarray] = []
        self.tol = tol

    def index(self, m: np.ndarray) -> int:
        for k, x in enumerate(self.items):
            if np.max(np.abs(x - m)) <= self.tol:
                return k
        self.items.append(m)
        return len(self.items) - 1


def witness_to_game(w, dims, label: str = "witness", eb_normalized: bool = False, tol: float = 1e-12) -> Game:
    """Game whose witness is ``w``.

    ``w`` is expanded over products of basis operators. Each input-side factor
    becomes a mixture of normalized eigenprojector states (``I`` maps to the
    maximally mixed state) and each output-side factor becomes projective
    observables plus the identity.
    """
    d_a, d_b = (int(x) for x in dims)
    w = check_hermitian(w, name="witness")
    if w.shape != (d_a * d_b, d_a * d_b):
        raise InvalidInputError(f"witness shape {w.shape} does not match dims {dims}")
    basis_a = pauli_product_basis(d_a)
    basis_b = pauli_product_basis(d_b)
    # input factor B_a = sum_k c_k sigma_k^T with sigma_k density matrices
    dec_a = []
    for b in basis_a:
        shift, pieces = _spectral_pieces(b)
        terms = []
        if shift != 0.0:
            terms.append((shift * d_a, np.eye(d_a) / d_a))
        for c, p, rank in pieces:
            terms.append((c * rank, p.T / rank))
        dec_a.append(terms)
    # output factor B_b = sum_k c_k O_k with projective O_k
    dec_b = []
    for b in basis_b:
        shift, pieces = _spectral_pieces(b)
        terms = []
        if shift != 0.0:
            terms.append((shift, np.eye(d_b, dtype=complex)))
        for c, p, _ in pieces:
            terms.append((c, p))
        dec_b.append(terms)
    norms_a = [float(np.real(np.vdot(b, b))) for b in basis_a]
    norms_b = [float(np.real(np.vdot(b, b))) for b in basis_b]

    inputs, observables = _Dedup(), _Dedup()
    entries: dict[tuple[int, int], float] = {}
    t = w.reshape(d_a, d_b, d_a, d_b)
    for ia, ba in enumerate(basis_a):
        # partial contraction with the A factor, then each B factor
        wa = np.einsum("ij,jbic->bc", ba, t) / norms_a[ia]
        for ib, bb in enumerate(basis_b):
            coef = float(np.real(np.vdot(bb, wa))) / norms_b[ib]
            if abs(coef) <= tol:
                continue
            for ca, sigma in dec_a[ia]:
                i = inputs.index(sigma)
                for cb, obs in dec_b[ib]:
                    j = observables.index(obs)
                    entries[(i, j)] = entries.get((i, j), 0.0) + coef * ca * cb / d_a
    if not inputs.items:
        inputs.index(np.eye(d_a, dtype=complex) / d_a)
        observables.index(np.eye(d_b, dtype=complex))
    alpha = np.zeros((len(inputs.items), len(observables.items)))
    for (i, j), v in entries.items():
        alpha[i, j] = v
    return Game(tuple(inputs.items), tuple(observables.items), alpha, label, eb_normalized)


# --- canned games ---------------------------------------------------------

_SQ3 = np.sqrt(3.0)
_I2 = np.eye(2, dtype=complex)
_X, _Y, _Z = PAULIS[1], PAULIS[2], PAULIS[3]


def _qubit_state(bloch) -> np.ndarray:
    x, y, z = bloch
    return 0.5 * (_I2 + x * _X + y * _Y + z * _Z)


def _embed_qutrit(m) -> np.ndarray:
    out = np.zeros((3, 3), dtype=complex)
    out[:2, :2] = m
    return out


def _depolarizing_inputs():
    return [
        0.5 * _I2,
        _qubit_state((1, 0, 0)),
        _qubit_state((0, -1, 0)),
        _qubit_state((0, 0, 1)),
        _qubit_state((1 / _SQ3, 1 / _SQ3, 1 / _SQ3)),
    ]


def _depolarizing_alpha() -> np.ndarray:
    return np.array(
        [
            [2 * _SQ3, 0, 0, 0, -_SQ3],
            [0, 1, 0, 0, 0],
            [0, 0, -1, 0, 0],
            [0, 0, 0, 1, 0],
            [-_SQ3, 0, 0, 0, 0],
        ]
    )


def damping_amplitudes(p: float) -> tuple[float, float]:
    """Amplitudes ``(alpha, beta)`` of the top Choi eigenvector of ``damping(p)``."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise InvalidInputError(f"p must lie in [0, 1], got {p}")
    r = np.sqrt(1 - 2 * p + 5 * p * p)
    u, v = 1 - p + r, 2 * p
    norm = np.sqrt(u * u + v * v)
    return float(u / norm), float(v / norm)


def canned_game(name: str, p: float | None = None) -> Game:
    """The explicit depolarizing/dephasing, erasure and damping games.

    The damping game depends on the damping parameter ``p``.
    """
    if name in ("depolarizing", "dephasing"):
        ins = _depolarizing_inputs()
        obs = [s.T for s in ins]
        return Game(tuple(ins), tuple(obs), _depolarizing_alpha(), name, eb_normalized=True)
    if name == "erasure":
        ins = _depolarizing_inputs()
        obs = [
            _embed_qutrit(0.5 * _I2),
            _embed_qutrit(_qubit_state((1, 0, 0))),
            _embed_qutrit(_qubit_state((0, 1, 0))),
            _embed_qutrit(_qubit_state((0, 0, 1))),
            _embed_qutrit(_qubit_state((1 / _SQ3, -1 / _SQ3, 1 / _SQ3))),
            np.diag([0, 0, 1]).astype(complex),
        ]
        alpha = np.zeros((5, 6))
        alpha[:, :5] = _depolarizing_alpha()
        alpha[0, 5] = 1.0
        return Game(tuple(ins), tuple(obs), alpha, name, eb_normalized=True)
    if name == "damping":
        if p is None:
            raise InvalidInputError("the damping game needs a parameter p")
        a, b = damping_amplitudes(p)
        s2 = np.sqrt(2.0)
        obs = [
            0.5 * _I2,
            _qubit_state((1, 0, 0)),
            _qubit_state((0, 1, 0)),
            _qubit_state((0, 0, 1)),
            _qubit_state((0, 0, -1)),
            _qubit_state((1 / s2, -1 / s2, 0)),
        ]
        ins = [o.T for o in obs]
        alpha = np.zeros((6, 6))
        alpha[0, 0] = 4 * s2 * a * b
        alpha[0, 5] = -2 * s2 * a * b
        alpha[5, 0] = -2 * s2 * a * b
        alpha[1, 1] = 2 * a * b
        alpha[2, 2] = -2 * a * b
        alpha[3, 3] = a * a
        alpha[4, 4] = b * b
        return Game(tuple(ins), tuple(obs), alpha, f"damping({p:g})", eb_normalized=True)
    raise InvalidInputError(f"unknown game {name!r}; choose depolarizing, erasure or damping")


def unitary_witness(u) -> np.ndarray:
    """``d Phi_U``: the witness whose payoff is ``d`` times the Choi fidelity with ``U``."""
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    vec = u.T.reshape(-1) / np.sqrt(d)
    return d * np.outer(vec, vec.conj())


def gate_witness_bound(u, empirical_choi_fidelity: float) -> float:
    """``max(0, d F - 1)`` from the Choi fidelity ``F`` of an implemented gate."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise InvalidInputError(f"gate must be a square matrix, got shape {u.shape}")
    dev = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    if dev > 1e-10:
        raise InvalidInputError(f"gate is not unitary (deviation {dev:.3e})")
    f = float(empirical_choi_fidelity)
    if not 0.0 <= f <= 1.0:
        raise InvalidInputError(f"fidelity must lie in [0, 1], got {f}")
    return max(0.0, u.shape[0] * f - 1.0)
