"""Robustness quantifiers for quantum memories.

``R(N)`` is the least ``s >= 0`` such that ``N = (1+s) M' - s M`` with
``M'`` classical (entanglement breaking) and ``M`` classical (standard) or
any channel (generalized). Classical is relaxed to PPT Choi states for the
SDPs, which is exact when ``d_A d_B <= 6``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import ChoiState, QuantumChannel
from .errors import CapacityError, InvalidInputError, SolverError
from .linalg import herm_eig, hermitize, partial_trace, partial_transpose
from .sdp import SdpOptions, SdpProblem, smat, solve, svec

SDP_MAX_SIDE = 16
VARIANTS = ("standard", "generalized", "entanglement", "entanglement_generalized")
INTEGER_NUDGE = 1e-9


@dataclass(frozen=True, eq=False)
class RobustnessResult:
    """A robustness value with provenance.

    ``tolerance`` is the numerical accuracy of ``value`` (zero for closed-form
    methods, the solver tolerance for SDPs).
    """

    value: float
    method: str
    is_exact: bool
    decomposition: tuple | None = None
    witness: np.ndarray | None = None
    tolerance: float = 0.0
    dims: tuple | None = None
    solution: object = None

    def __post_init__(self):
        if not self.value >= 0:
            raise InvalidInputError(f"robustness must be nonnegative, got {self.value}")


def _choi_of(n) -> ChoiState:
    if isinstance(n, QuantumChannel):
        return n.choi
    if isinstance(n, ChoiState):
        return n
    raise InvalidInputError(f"expected a QuantumChannel or ChoiState, got {type(n).__name__}")


def eig_lower_bound(n) -> RobustnessResult:
    """``max(0, d_A lambda_max(Phi) - 1)``; exact for ``d_A <= 3`` and ``d_B = 2``."""
    choi = _choi_of(n)
    lam = herm_eig(choi.matrix)[0][-1]
    value = max(0.0, choi.d_A * lam - 1.0)
    exact = choi.d_A <= 3 and choi.d_B == 2
    return RobustnessResult(value, "eig", exact, dims=choi.dims)


def moment_lower_bound(n, k) -> RobustnessResult:
    """``max(0, d_A^{(k-1)/k} (Tr Phi^k)^{1/k} - 1)``; ``k = inf`` gives the eig bound."""
    choi = _choi_of(n)
    if k == math.inf or k is None:
        res = eig_lower_bound(choi)
        return RobustnessResult(res.value, "moment(inf)", False, dims=choi.dims)
    if int(k) != k or k < 1:
        raise InvalidInputError(f"moment order must be an integer >= 1, got {k}")
    k = int(k)
    lam = np.clip(herm_eig(choi.matrix)[0], 0.0, None)
    # scale by lambda_max before powering to avoid underflow at large k
    top = lam[-1]
    norm_k = top * float(np.sum((lam / top) ** k)) ** (1.0 / k)
    value = max(0.0, choi.d_A ** ((k - 1) / k) * norm_k - 1.0)
    if k == 1:
        value = 0.0
    return RobustnessResult(value, f"moment({k})", False, dims=choi.dims)


def _herm_basis(n: int) -> np.ndarray:
    """Orthonormal Hermitian basis with ``<B_k, X> = svec(X)_k``."""
    return smat(np.eye(n * n), n)


def _traceless_basis(d: int) -> np.ndarray:
    """Orthonormal basis of traceless Hermitian ``d x d`` matrices."""
    basis = _herm_basis(d)
    # project out the identity direction and keep an orthonormal set
    vecs = svec(basis)
    ident = svec(np.eye(d)) / np.sqrt(d)
    vecs = vecs - np.outer(vecs @ ident, ident)
    u, s, _ = np.linalg.svd(vecs.T, full_matrices=False)
    return smat(u[:, s > 1e-9].T, d)


def build_ppt_problem(choi: ChoiState, variant: str) -> SdpProblem:
    """Assemble the PPT-relaxed robustness program.

    Blocks ``M``, ``M'`` and the partial transposes that carry the PPT
    constraints. ``M' - M = Phi``; minimize ``Tr M``.
    """
    d_a, d_b = choi.dims
    n = d_a * d_b
    ppt_minus = variant in ("standard", "entanglement")
    marginal = variant in ("standard", "generalized")
    blocks = [("M", n), ("M'", n)]
    if ppt_minus:
        blocks.append(("M^TA", n))
    blocks.append(("M'^TA", n))
    prob = SdpProblem(blocks, [np.eye(n)] + [None] * (len(blocks) - 1))
    basis = _herm_basis(n)
    basis_pt = np.array([partial_transpose(b, "A", (d_a, d_b)) for b in basis])
    phi = svec(choi.matrix)
    for k in range(n * n):
        prob.add_constraint({"M'": basis[k], "M": -basis[k]}, phi[k])
    for k in range(n * n):
        if ppt_minus:
            prob.add_constraint({"M^TA": basis[k], "M": -basis_pt[k]}, 0.0)
        prob.add_constraint({"M'^TA": basis[k], "M'": -basis_pt[k]}, 0.0)
    if marginal:
        # Tr_B M proportional to the identity: orthogonal to traceless T (x) I
        for t in _traceless_basis(d_a):
            prob.add_constraint({"M": np.kron(t, np.eye(d_b))}, 0.0)
    return prob


def _fix_marginal(m: np.ndarray, dims) -> np.ndarray:
    """Congruence by ``D (x) I`` restoring ``Tr_B = I/d_A`` (keeps PSD and PPT)."""
    d_a, d_b = dims
    marg = partial_trace(m, "B", dims) * d_a
    w, v = np.linalg.eigh(hermitize(marg))
    dm = (v / np.sqrt(w)) @ v.conj().T
    k = np.kron(dm, np.eye(d_b))
    return hermitize(k @ m @ k.conj().T)


def _lift(x1, x2, dims):
    """Add ``delta I`` to both parts so PSD and PPT hold exactly."""
    n = x1.shape[0]
    worst = 0.0
    for x in (x1, x2):
        worst = min(worst, float(np.linalg.eigvalsh(x)[0]))
        worst = min(worst, float(np.linalg.eigvalsh(partial_transpose(x, "A", dims))[0]))
    delta = -worst * (1.0 + 1e-6) + (1e-15 if worst < 0 else 0.0)
    return x1 + delta * np.eye(n), x2 + delta * np.eye(n)


def robustness_ppt(n, variant: str = "standard", options: SdpOptions | None = None) -> RobustnessResult:
    """PPT-relaxed robustness ``R*`` (and its generalized / entanglement cousins)."""
    if variant not in VARIANTS:
        raise InvalidInputError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    choi = _choi_of(n)
    d_a, d_b = choi.dims
    if d_a * d_b > SDP_MAX_SIDE:
        raise CapacityError(
            f"PPT SDP supports d_A*d_B <= {SDP_MAX_SIDE}, got {d_a}*{d_b} = {d_a * d_b}"
        )
    opts = options if options is not None else SdpOptions.from_env()
    prob = build_ppt_problem(choi, variant)
    sol = solve(prob, opts)
    if sol.status != "optimal":
        raise SolverError(
            f"robustness SDP ({variant}) ended with status {sol.status} after "
            f"{sol.iterations} iterations (gap {sol.gap:.2e}, primal residual "
            f"{sol.primal_residual:.2e}, dual residual {sol.dual_residual:.2e})",
            solution=sol,
        )
    tol = opts.tol
    s = max(0.0, sol.primal_value)
    if s <= 10 * tol:
        s = 0.0
    nn = d_a * d_b
    y_eq = sol.dual_multipliers[: nn * nn]
    witness = hermitize(np.eye(nn) + smat(y_eq, nn))

    method = {
        "standard": "sdp_ppt",
        "generalized": "sdp_ppt_generalized",
        "entanglement": "sdp_entanglement",
        "entanglement_generalized": "sdp_entanglement_generalized",
    }[variant]
    decomposition = None
    if variant in ("standard", "generalized"):
        x1 = hermitize(sol.primal_blocks[0])
        x2 = hermitize(choi.matrix + x1)  # exact equality constraint
        if variant == "generalized":
            x1, x2 = _lift_generalized(x1, x2, choi.dims)
        else:
            x1, x2 = _lift(x1, x2, choi.dims)
        s_dec = float(np.trace(x1).real)
        m_plus = ChoiState(d_a, d_b, _fix_marginal(x2 / (1.0 + s_dec), choi.dims))
        if s > 0:
            m_minus = ChoiState(d_a, d_b, _fix_marginal(x1 / s_dec, choi.dims))
        else:
            m_minus = m_plus
        decomposition = (m_minus, m_plus)
    exact = d_a * d_b <= 6
    return RobustnessResult(
        s, method, exact, decomposition, witness, tolerance=10 * tol, dims=choi.dims, solution=sol
    )


def _lift_generalized(x1, x2, dims):
    """As :func:`_lift`, but only ``M'`` must be PPT."""
    n = x1.shape[0]
    worst = min(
        0.0,
        float(np.linalg.eigvalsh(x1)[0]),
        float(np.linalg.eigvalsh(x2)[0]),
        float(np.linalg.eigvalsh(partial_transpose(x2, "A", dims))[0]),
    )
    delta = -worst * (1.0 + 1e-6) + (1e-15 if worst < 0 else 0.0)
    return x1 + delta * np.eye(n), x2 + delta * np.eye(n)


def reconstruction_error(result: RobustnessResult, n) -> float:
    """``||Phi - (1+s) Phi_M' + s Phi_M||_F`` using the decomposition's own ``s``."""
    if result.decomposition is None:
        raise InvalidInputError("result carries no decomposition")
    choi = _choi_of(n)
    m_minus, m_plus = result.decomposition
    s = decomposition_weight(result, choi)
    return float(np.linalg.norm(choi.matrix - (1 + s) * m_plus.matrix + s * m_minus.matrix))


def decomposition_weight(result: RobustnessResult, n) -> float:
    """Weight ``s`` that makes the stored decomposition reproduce ``Phi``.

    Solves the scalar least-squares problem; equals ``result.value`` up to the
    solver tolerance.
    """
    choi = _choi_of(n)
    m_minus, m_plus = result.decomposition
    diff = m_plus.matrix - m_minus.matrix
    denom = float(np.real(np.vdot(diff, diff)))
    if denom <= 1e-30:
        return result.value
    return float(np.real(np.vdot(diff, choi.matrix - m_plus.matrix)) / denom)


def log_robustness(r) -> float:
    """``log2(1 + R)``."""
    value = r.value if isinstance(r, RobustnessResult) else float(r)
    if value < 0:
        raise InvalidInputError(f"robustness must be nonnegative, got {value}")
    return math.log2(1.0 + value)


def synthesis_cost(r) -> int:
    """Ideal qubits needed to synthesise the memory: ``ceil(log2(ceil(R) + 1))``.

    ``R`` is nudged down by the larger of ``1e-9`` and its own tolerance
    before rounding up, so solver noise above an integer does not add a qubit.
    """
    if isinstance(r, RobustnessResult):
        value, tol = r.value, r.tolerance
    else:
        value, tol = float(r), 0.0
    if value < 0:
        raise InvalidInputError(f"robustness must be nonnegative, got {value}")
    c = math.ceil(max(0.0, value - max(INTEGER_NUDGE, tol)))
    return math.ceil(math.log2(c + 1))


def dmax(r: RobustnessResult) -> float:
    """Max-relative-entropy form ``log2(1 + R_G)`` of a generalized result."""
    if not isinstance(r, RobustnessResult) or r.method not in (
        "sdp_ppt_generalized",
        "sdp_entanglement_generalized",
    ):
        raise InvalidInputError("dmax needs a generalized-variant robustness result")
    return math.log2(1.0 + r.value)
