"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` complex arrays. Bipartite operators on
``A (x) B`` use row-major ordering with subsystem ``A`` as the slower index,
i.e. entry ``((i*dB + k), (j*dB + l))`` is ``<i k| X |j l>``.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError

HERMITIAN_TOL = 1e-10
MAX_DIM = 64

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)


def as_matrix(a, name="matrix") -> np.ndarray:
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be two-dimensional, got shape {arr.shape}")
    return arr


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(a))


def hermitian_deviation(a: np.ndarray) -> float:
    """Largest entrywise ``|A_ij - conj(A_ji)|``."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - dagger(a))))


def hermitize(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    return 0.5 * (a + dagger(a))


def check_hermitian(a, tol: float = HERMITIAN_TOL, name="matrix") -> np.ndarray:
    """Validate approximate Hermiticity and return the symmetrized matrix."""
    a = as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    dev = hermitian_deviation(a)
    if dev > tol * scale:
        raise InvalidInputError(f"{name} is not Hermitian (deviation {dev:.3e})")
    return hermitize(a)


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Rounds of disjoint index pairs covering every pair once (circle method)."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for k in range(m // 2):
            p, q = players[k], players[m - 1 - k]
            if p < n and q < n:
                ps.append(min(p, q))
                qs.append(max(p, q))
        rounds.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def herm_eig(a, tol: float = HERMITIAN_TOL, max_sweeps: int = 60):
    """Eigendecomposition of a Hermitian matrix by parallel cyclic Jacobi.

    Each round rotates a set of disjoint ``(p, q)`` pairs at once; a complex
    2x2 rotation first removes the phase of ``A_pq`` and then applies a real
    Givens rotation annihilating it.

    Returns
    -------
    (eigenvalues, eigenvectors)
        Real eigenvalues in ascending order and a unitary matrix whose
        columns are the corresponding eigenvectors.
    """
    h = check_hermitian(a, tol)
    n = h.shape[0]
    if n > MAX_DIM:
        raise InvalidInputError(f"herm_eig supports sides up to {MAX_DIM}, got {n}")
    if n == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    work = h.copy()
    vecs = np.eye(n, dtype=complex)
    norm = float(np.linalg.norm(work))
    if n == 1 or norm == 0.0:
        return np.real(np.diag(work)).copy(), vecs
    rounds = _round_robin(n)
    threshold = (1e-15 * norm) ** 2
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = float(np.sum(np.abs(work[offdiag]) ** 2))
        if off <= threshold:
            break
        for ps, qs in rounds:
            app = work[ps, ps].real
            aqq = work[qs, qs].real
            apq = work[ps, qs]
            mag = np.abs(apq)
            phase = np.ones_like(apq)
            nz = mag > 0
            phase[nz] = apq[nz] / mag[nz]
            # inner rotation |theta| <= pi/4, t = tan(theta) is the small root
            # of t^2 + 2 tau t - 1 = 0
            t = np.zeros_like(app)
            safe = np.where(nz, mag, 1.0)
            with np.errstate(over="ignore"):
                tau = (aqq - app) / (2.0 * safe)
                root = np.sqrt(1.0 + tau * tau)
            sign = np.where(tau >= 0, 1.0, -1.0)
            t[nz] = (sign / (np.abs(tau) + root))[nz]
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # G = diag(1, conj(phase)) @ [[c, s], [-s, c]]
            g11 = c.astype(complex)
            g12 = s.astype(complex)
            g21 = -s * np.conj(phase)
            g22 = c * np.conj(phase)

            col_p = work[:, ps].copy()
            col_q = work[:, qs]
            work[:, ps] = col_p * g11 + col_q * g21
            work[:, qs] = col_p * g12 + col_q * g22
            row_p = work[ps, :].copy()
            row_q = work[qs, :]
            work[ps, :] = np.conj(g11)[:, None] * row_p + np.conj(g21)[:, None] * row_q
            work[qs, :] = np.conj(g12)[:, None] * row_p + np.conj(g22)[:, None] * row_q
            work[ps, qs] = 0.0
            work[qs, ps] = 0.0

            v_p = vecs[:, ps].copy()
            v_q = vecs[:, qs]
            vecs[:, ps] = v_p * g11 + v_q * g21
            vecs[:, qs] = v_p * g12 + v_q * g22
    evals = np.real(np.diag(work))
    order = np.argsort(evals, kind="stable")
    return evals[order], vecs[:, order]


def eigvalsh(a) -> np.ndarray:
    return herm_eig(a)[0]


def max_eig(a) -> float:
    return float(herm_eig(a)[0][-1])


def kron(a, b) -> np.ndarray:
    """Kronecker product, ``(A(x)B)[i*rB + k, j*cB + l] = A[i, j] * B[k, l]``."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def _check_bipartite(a, dims) -> tuple[np.ndarray, int, int]:
    a = as_matrix(a)
    try:
        d_a, d_b = (int(d) for d in dims)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"dims must be a pair of integers, got {dims!r}") from exc
    if d_a < 1 or d_b < 1:
        raise InvalidInputError(f"dims must be positive, got {dims!r}")
    if a.shape != (d_a * d_b, d_a * d_b):
        raise InvalidInputError(
            f"matrix of shape {a.shape} does not match dims ({d_a}, {d_b})"
        )
    return a, d_a, d_b


def _check_subsystem(subsystem: str) -> str:
    if subsystem not in ("A", "B"):
        raise InvalidInputError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return subsystem


def partial_trace(a, subsystem: str, dims) -> np.ndarray:
    """Trace out ``subsystem`` (``"A"`` or ``"B"``) of a bipartite operator."""
    _check_subsystem(subsystem)
    a, d_a, d_b = _check_bipartite(a, dims)
    t = a.reshape(d_a, d_b, d_a, d_b)
    if subsystem == "B":
        return np.einsum("ikjk->ij", t)
    return np.einsum("kikj->ij", t)


def partial_transpose(a, subsystem: str, dims) -> np.ndarray:
    """Transpose the indices of ``subsystem`` only. An exact involution."""
    _check_subsystem(subsystem)
    a, d_a, d_b = _check_bipartite(a, dims)
    t = a.reshape(d_a, d_b, d_a, d_b)
    axes = (2, 1, 0, 3) if subsystem == "A" else (0, 3, 2, 1)
    return np.ascontiguousarray(t.transpose(axes)).reshape(d_a * d_b, d_a * d_b)


def hs_inner(a, b) -> float:
    """Real Hilbert-Schmidt inner product ``Re Tr(A^dagger B)``."""
    return float(np.real(np.vdot(np.asarray(a), np.asarray(b))))


def max_entangled(d: int) -> np.ndarray:
    """Density matrix of ``sum_ij |ii><jj| / d``."""
    vec = np.zeros(d * d, dtype=complex)
    vec[:: d + 1] = 1.0 / np.sqrt(d)
    return np.outer(vec, vec.conj())


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    return np.outer(v, v.conj())


def is_psd(a, tol: float = 1e-9) -> bool:
    return bool(np.linalg.eigvalsh(hermitize(a))[0] >= -tol)


def sqrtm_psd(a) -> np.ndarray:
    w, v = np.linalg.eigh(hermitize(a))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ dagger(v)
