"""Quantum channels held as Kraus operators and normalized Choi states.

Choi convention: ``Phi = (1/d_A) sum_ij |i><j| (x) N(|i><j|)`` with the input
copy ``A`` first (slower index) and the output ``B`` second. For tensor
products of channels the Choi is stored in ``A1 A2 : B1 B2`` order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, InvalidInputError
from .linalg import (
    MAX_DIM,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    check_hermitian,
    dagger,
    herm_eig,
    hermitize,
    partial_trace,
    partial_transpose,
)

PSD_TOL = 1e-9
TRACE_TOL = 1e-10
MARGINAL_TOL = 1e-9
KRAUS_TOL = 1e-10
PPT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ChoiState:
    """Normalized Choi state on ``A (x) B``."""

    d_A: int
    d_B: int
    matrix: np.ndarray

    def __post_init__(self):
        d_a, d_b = int(self.d_A), int(self.d_B)
        if d_a < 1 or d_b < 1:
            raise InvalidInputError(f"Choi dimensions must be positive, got ({d_a}, {d_b})")
        side = d_a * d_b
        if side > MAX_DIM:
            raise CapacityError(f"Choi side {side} exceeds limit {MAX_DIM}")
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (side, side):
            raise InvalidInputError(f"Choi matrix shape {m.shape} does not match ({d_a}, {d_b})")
        m = check_hermitian(m, name="Choi matrix")
        m.setflags(write=False)
        object.__setattr__(self, "d_A", d_a)
        object.__setattr__(self, "d_B", d_b)
        object.__setattr__(self, "matrix", m)
        self._validate()

    def _validate(self):
        tr = float(np.trace(self.matrix).real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidInputError(f"Choi trace is {tr!r}, expected 1")
        marg = partial_trace(self.matrix, "B", (self.d_A, self.d_B))
        dev = float(np.max(np.abs(marg - np.eye(self.d_A) / self.d_A)))
        if dev > MARGINAL_TOL:
            raise InvalidInputError(f"Choi marginal deviates from I/d_A by {dev:.3e}")
        lo = float(np.linalg.eigvalsh(self.matrix)[0])
        if lo < -PSD_TOL:
            raise InvalidInputError(f"Choi matrix is not PSD (min eigenvalue {lo:.3e})")

    @property
    def dims(self) -> tuple[int, int]:
        return self.d_A, self.d_B


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """A CPTP map ``d_in -> d_out``. The Choi state is always populated."""

    d_in: int
    d_out: int
    choi: ChoiState
    kraus: tuple | None = None
    label: str = field(default="")

    def __post_init__(self):
        if (self.choi.d_A, self.choi.d_B) != (self.d_in, self.d_out):
            raise InvalidInputError("Choi dimensions disagree with channel dimensions")

    @classmethod
    def from_kraus(cls, kraus, label: str = "") -> "QuantumChannel":
        ks = [np.asarray(k, dtype=complex) for k in kraus]
        if not ks:
            raise InvalidInputError("empty Kraus set")
        d_out, d_in = ks[0].shape
        for k in ks:
            if k.ndim != 2 or k.shape != (d_out, d_in):
                raise InvalidInputError("Kraus operators must share one 2-D shape")
        gram = sum(dagger(k) @ k for k in ks)
        dev = float(np.max(np.abs(gram - np.eye(d_in))))
        if dev > KRAUS_TOL:
            raise InvalidInputError(f"Kraus set is not trace preserving (deviation {dev:.3e})")
        for k in ks:
            k.setflags(write=False)
        choi = ChoiState(d_in, d_out, _choi_from_kraus(ks))
        return cls(d_in, d_out, choi, tuple(ks), label)

    @classmethod
    def from_choi(cls, matrix, d_in: int, d_out: int, label: str = "") -> "QuantumChannel":
        choi = matrix if isinstance(matrix, ChoiState) else ChoiState(d_in, d_out, matrix)
        return cls(choi.d_A, choi.d_B, choi, None, label)

    def kraus_ops(self) -> tuple:
        """Kraus operators, derived from the Choi spectrum when not stored."""
        if self.kraus is not None:
            return self.kraus
        return tuple(choi_to_kraus(self.choi))

    def __call__(self, rho):
        return apply(self, rho)


def _choi_from_kraus(ks) -> np.ndarray:
    d_out, d_in = ks[0].shape
    # vec index (i, b) with the input index slower: v[i*d_out + b] = K[b, i]
    vecs = np.stack([k.T.reshape(-1) for k in ks], axis=1)
    return hermitize(vecs @ dagger(vecs)) / d_in


def kraus_to_choi(channel) -> ChoiState:
    """Normalized Choi of a channel given as a ``QuantumChannel`` or Kraus list."""
    if isinstance(channel, QuantumChannel):
        if channel.kraus is None:
            return channel.choi
        return QuantumChannel.from_kraus(channel.kraus).choi
    return QuantumChannel.from_kraus(channel).choi


def choi_to_kraus(choi: ChoiState, cutoff: float = 1e-12) -> list[np.ndarray]:
    """Minimal Kraus set from the Choi spectrum."""
    w, v = np.linalg.eigh(choi.matrix)
    out = []
    for lam, vec in zip(w, v.T):
        if lam > cutoff:
            out.append(np.sqrt(choi.d_A * lam) * vec.reshape(choi.d_A, choi.d_B).T)
    return out


def _check_state(rho, d: int, name="rho") -> np.ndarray:
    rho = check_hermitian(rho, name=name)
    if rho.shape != (d, d):
        raise InvalidInputError(f"{name} has shape {rho.shape}, expected ({d}, {d})")
    return rho


def apply(channel: QuantumChannel, rho) -> np.ndarray:
    """``N(rho) = d_A Tr_A[(rho^T (x) I) Phi]``."""
    rho = _check_state(rho, channel.d_in)
    t = channel.choi.matrix.reshape(channel.d_in, channel.d_out, channel.d_in, channel.d_out)
    return hermitize(channel.d_in * np.einsum("ij,ibjc->bc", rho, t))


def apply_kraus(channel: QuantumChannel, rho) -> np.ndarray:
    rho = _check_state(rho, channel.d_in)
    return hermitize(sum(k @ rho @ dagger(k) for k in channel.kraus_ops()))


# --- families -------------------------------------------------------------


def _check_prob(p, name="p") -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0) or np.isnan(p):
        raise InvalidInputError(f"{name} must lie in [0, 1], got {p}")
    return p


def identity(d: int = 2) -> QuantumChannel:
    d = int(d)
    if d < 2:
        raise InvalidInputError(f"dimension must be >= 2, got {d}")
    if d * d > MAX_DIM:
        raise CapacityError(f"identity({d}) Choi side {d * d} exceeds {MAX_DIM}")
    return QuantumChannel.from_kraus([np.eye(d)], label=f"identity({d})")


def unitary_channel(u, label: str = "unitary") -> QuantumChannel:
    return QuantumChannel.from_kraus([np.asarray(u, dtype=complex)], label=label)


def dephasing(p: float) -> QuantumChannel:
    """``rho -> p rho + (1-p) Z rho Z``."""
    p = _check_prob(p)
    return QuantumChannel.from_kraus(
        [np.sqrt(p) * np.eye(2), np.sqrt(1 - p) * PAULI_Z], label=f"dephasing({p:g})"
    )


def depolarizing(p: float) -> QuantumChannel:
    """``rho -> p rho + (1-p) I/2``."""
    p = _check_prob(p)
    q = (1 - p) / 4
    ks = [np.sqrt(p + q) * np.eye(2)] + [np.sqrt(q) * s for s in (PAULI_X, PAULI_Y, PAULI_Z)]
    return QuantumChannel.from_kraus(ks, label=f"depolarizing({p:g})")


def damping(p: float) -> QuantumChannel:
    """Stochastic damping ``rho -> p rho + (1-p)|0><0|``."""
    p = _check_prob(p)
    q = np.sqrt(1 - p)
    ks = [
        np.sqrt(p) * np.eye(2),
        q * np.array([[1, 0], [0, 0]]),
        q * np.array([[0, 1], [0, 0]]),
    ]
    return QuantumChannel.from_kraus(ks, label=f"damping({p:g})")


def erasure(p: float) -> QuantumChannel:
    """``rho -> p rho + (1-p)|2><2|`` with the qubit embedded in a qutrit."""
    p = _check_prob(p)
    embed = np.zeros((3, 2))
    embed[0, 0] = embed[1, 1] = 1.0
    q = np.sqrt(1 - p)
    e0 = np.zeros((3, 2))
    e0[2, 0] = q
    e1 = np.zeros((3, 2))
    e1[2, 1] = q
    return QuantumChannel.from_kraus([np.sqrt(p) * embed, e0, e1], label=f"erasure({p:g})")


def lindblad_dephasing(gamma: float, t: float) -> QuantumChannel:
    """Dephasing semigroup, equal to ``dephasing((1 + exp(-gamma t))/2)``."""
    gamma, t = float(gamma), float(t)
    if gamma < 0 or t < 0:
        raise InvalidInputError(f"gamma and t must be nonnegative, got {gamma}, {t}")
    ch = dephasing(0.5 * (1.0 + np.exp(-gamma * t)))
    return QuantumChannel(ch.d_in, ch.d_out, ch.choi, ch.kraus, f"lindblad_dephasing({gamma:g},{t:g})")


FAMILIES = {
    "identity": identity,
    "dephasing": dephasing,
    "depolarizing": depolarizing,
    "damping": damping,
    "erasure": erasure,
    "lindblad_dephasing": lindblad_dephasing,
}


def family(name: str, *params) -> QuantumChannel:
    """Build a named channel family, e.g. ``family("dephasing", 0.75)``."""
    try:
        ctor = FAMILIES[name]
    except KeyError:
        raise InvalidInputError(
            f"unknown channel family {name!r}; choose from {sorted(FAMILIES)}"
        ) from None
    try:
        return ctor(*params)
    except TypeError as exc:
        raise InvalidInputError(f"bad parameters for {name}: {exc}") from exc


# --- algebra --------------------------------------------------------------


def compose(later: QuantumChannel, earlier: QuantumChannel) -> QuantumChannel:
    """``later o earlier``."""
    if earlier.d_out != later.d_in:
        raise InvalidInputError(
            f"cannot compose: earlier outputs {earlier.d_out}, later expects {later.d_in}"
        )
    ks = [b @ a for b in later.kraus_ops() for a in earlier.kraus_ops()]
    ch = QuantumChannel.from_kraus(ks)
    # keep the Kraus list small for chains of compositions
    return QuantumChannel(ch.d_in, ch.d_out, ch.choi, tuple(choi_to_kraus(ch.choi)))


def reorder_tensor_choi(m, dims1, dims2) -> np.ndarray:
    """Map an operator on ``A1 B1 A2 B2`` to ``A1 A2 B1 B2`` order."""
    a1, b1 = dims1
    a2, b2 = dims2
    t = np.asarray(m).reshape(a1, b1, a2, b2, a1, b1, a2, b2)
    t = t.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    side = a1 * a2 * b1 * b2
    return np.ascontiguousarray(t).reshape(side, side)


def tensor(a: QuantumChannel, b: QuantumChannel) -> QuantumChannel:
    """Parallel channel ``a (x) b`` with Choi in ``A1 A2 : B1 B2`` order."""
    d_in, d_out = a.d_in * b.d_in, a.d_out * b.d_out
    if d_in * d_out > MAX_DIM:
        raise CapacityError(f"tensor product Choi side {d_in * d_out} exceeds {MAX_DIM}")
    m = reorder_tensor_choi(np.kron(a.choi.matrix, b.choi.matrix), a.choi.dims, b.choi.dims)
    kraus = None
    if a.kraus is not None and b.kraus is not None:
        kraus = tuple(np.kron(x, y) for x in a.kraus for y in b.kraus)
    label = f"{a.label}*{b.label}" if a.label and b.label else ""
    return QuantumChannel(d_in, d_out, ChoiState(d_in, d_out, m), kraus, label)


def channel_partial_trace(n: QuantumChannel, part: str, in_dims, out_dims) -> QuantumChannel:
    """Trace out input/output factor ``part`` of a bipartite channel.

    Keeps ``rho -> Tr_part N(rho (x) I/d)``; on the Choi this is the partial
    trace over both the input and output copies of ``part``.
    """
    if part not in ("A", "B"):
        raise InvalidInputError(f"part must be 'A' or 'B', got {part!r}")
    a1, a2 = (int(x) for x in in_dims)
    b1, b2 = (int(x) for x in out_dims)
    if a1 * a2 != n.d_in or b1 * b2 != n.d_out or min(a1, a2, b1, b2) < 1:
        raise InvalidInputError(
            f"bipartition {in_dims}->{out_dims} does not match channel {n.d_in}->{n.d_out}"
        )
    t = n.choi.matrix.reshape(a1, a2, b1, b2, a1, a2, b1, b2)
    if part == "B":
        r = np.einsum("ikjlmknl->ijmn", t)
        d_in, d_out = a1, b1
    else:
        r = np.einsum("kiljknlm->ijnm", t)
        d_in, d_out = a2, b2
    r = r.reshape(d_in * d_out, d_in * d_out)
    return QuantumChannel.from_choi(hermitize(r), d_in, d_out)


def measure_prepare_channel(povm, states, label: str = "") -> QuantumChannel:
    """``rho -> sum_i Tr[rho M_i] sigma_i`` for a POVM and density matrices."""
    povm = [check_hermitian(m, name="POVM element") for m in povm]
    states = [check_hermitian(s, name="state") for s in states]
    if len(povm) != len(states) or not povm:
        raise InvalidInputError("POVM and state lists must be nonempty and of equal length")
    d_in, d_out = povm[0].shape[0], states[0].shape[0]
    dev = float(np.max(np.abs(sum(povm) - np.eye(d_in))))
    if dev > KRAUS_TOL:
        raise InvalidInputError(f"POVM is not complete (deviation {dev:.3e})")
    ks = []
    for m, s in zip(povm, states):
        mw, mv = np.linalg.eigh(m)
        sw, sv = np.linalg.eigh(s)
        for mu, e in zip(mw, mv.T):
            if mu <= 1e-15:
                continue
            for nu, f in zip(sw, sv.T):
                if nu <= 1e-15:
                    continue
                ks.append(np.sqrt(mu * nu) * np.outer(f, e.conj()))
    choi = sum(np.kron(m.T, s) for m, s in zip(povm, states)) / d_in
    ch = QuantumChannel.from_kraus(ks, label=label)
    return QuantumChannel(d_in, d_out, ChoiState(d_in, d_out, hermitize(choi)), ch.kraus, label)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_state(d: int, rng) -> np.ndarray:
    rng = _rng(rng)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_povm(d: int, n_outcomes: int, rng) -> list[np.ndarray]:
    """``G^dag G`` elements completion-normalized by ``S^{-1/2}``."""
    rng = _rng(rng)
    if n_outcomes < 1:
        raise InvalidInputError(f"n_outcomes must be >= 1, got {n_outcomes}")
    ps = []
    for _ in range(n_outcomes):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        ps.append(dagger(g) @ g)
    w, v = np.linalg.eigh(hermitize(sum(ps)))
    s_inv = (v / np.sqrt(w)) @ dagger(v)
    return [hermitize(s_inv @ p @ s_inv) for p in ps]


def random_eb_channel(d_in: int, d_out: int, n_outcomes: int, seed=None) -> QuantumChannel:
    """Random measure-and-prepare channel with Haar pure output states."""
    rng = _rng(seed)
    povm = random_povm(d_in, n_outcomes, rng)
    states = [np.outer(psi, psi.conj()) for psi in (haar_state(d_out, rng) for _ in povm)]
    return measure_prepare_channel(povm, states, label="random_eb")


def random_channel(d_in: int, d_out: int, n_kraus: int = 2, seed=None) -> QuantumChannel:
    """Random CPTP map from a Gaussian isometry."""
    if n_kraus * d_out < d_in:
        raise InvalidInputError(f"{n_kraus} Kraus operators of shape {d_out}x{d_in} cannot be trace preserving")
    rng = _rng(seed)
    g = rng.normal(size=(n_kraus * d_out, d_in)) + 1j * rng.normal(size=(n_kraus * d_out, d_in))
    q, _ = np.linalg.qr(g)
    return QuantumChannel.from_kraus(
        [q[k * d_out:(k + 1) * d_out] for k in range(n_kraus)], label="random"
    )


def mix(channels, weights) -> QuantumChannel:
    """Convex mixture ``sum_k w_k N_k``."""
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise InvalidInputError("mixture weights must be a probability vector")
    first = channels[0]
    m = sum(w * c.choi.matrix for w, c in zip(weights, channels))
    return QuantumChannel.from_choi(hermitize(m), first.d_in, first.d_out)


def ppt_min_eig(choi: ChoiState) -> float:
    return float(herm_eig(partial_transpose(choi.matrix, "A", choi.dims))[0][0])


def is_ppt_choi(choi: ChoiState) -> bool:
    """PPT test on the input copy. Decides EB membership when ``d_A d_B <= 6``."""
    if isinstance(choi, QuantumChannel):
        choi = choi.choi
    return ppt_min_eig(choi) >= -PPT_TOL
