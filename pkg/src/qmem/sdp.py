"""Dense primal-dual interior-point solver for Hermitian block SDPs.

Standard form::

    minimize    sum_b <C_b, X_b>
    subject to  sum_b <A_ib, X_b> = b_i,   X_b >= 0

with ``<A, B> = Re Tr(A B)`` on Hermitian matrices. The dual is

    maximize    b . y
    subject to  S_b = C_b - sum_i y_i A_ib >= 0.

Iterates use Nesterov-Todd scaling with a Mehrotra predictor-corrector step.
Blocks stay complex; a Hermitian matrix of side ``n`` is vectorized into
``n^2`` reals (diagonal, then ``sqrt(2)`` times real and imaginary parts of
the strict upper triangle) so that the trace inner product is a dot product.

Infeasibility is detected by divergence: a dual objective above ``1e8``
(primal infeasible) or a primal objective below ``-1e8`` (dual infeasible)
ends the run with status ``infeasible``.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import CapacityError, InvalidInputError
from .linalg import hermitian_deviation

MAX_VARIABLES = 20_000
COEFF_HERMITIAN_TOL = 1e-12
REDUNDANT_TOL = 1e-12
DIVERGENCE = 1e8


@dataclass
class SdpOptions:
    tol: float = 1e-8
    max_iter: int = 200
    initial_scale: float | None = None
    step_fraction: float = 0.98

    @classmethod
    def from_env(cls, **overrides) -> "SdpOptions":
        """Defaults, with ``QMEM_SDP_TOL`` overriding the tolerance."""
        opts = cls(**overrides)
        env = os.environ.get("QMEM_SDP_TOL")
        if env and "tol" not in overrides:
            try:
                opts.tol = float(env)
            except ValueError as exc:
                raise InvalidInputError(f"QMEM_SDP_TOL is not a number: {env!r}") from exc
            if not opts.tol > 0:
                raise InvalidInputError(f"QMEM_SDP_TOL must be positive, got {env!r}")
        return opts


@dataclass
class SdpProblem:
    """Hermitian PSD blocks with a linear objective and equality constraints.

    ``constraints`` holds ``(coeffs, rhs)`` pairs where ``coeffs`` maps a block
    index to its Hermitian coefficient matrix; missing blocks contribute zero.
    """

    blocks: list[tuple[str, int]]
    objective: list = field(default_factory=list)
    constraints: list = field(default_factory=list)

    def __post_init__(self):
        self.blocks = [(str(lab), int(side)) for lab, side in self.blocks]
        if not self.blocks:
            raise InvalidInputError("SDP needs at least one block")
        for lab, side in self.blocks:
            if side < 1:
                raise InvalidInputError(f"block {lab!r} has nonpositive side {side}")
        if not self.objective:
            self.objective = [None] * len(self.blocks)
        if len(self.objective) != len(self.blocks):
            raise InvalidInputError("objective must give one matrix (or None) per block")

    def block_index(self, key) -> int:
        if isinstance(key, (int, np.integer)):
            if not 0 <= key < len(self.blocks):
                raise InvalidInputError(f"no block {key}")
            return int(key)
        for k, (lab, _) in enumerate(self.blocks):
            if lab == key:
                return k
        raise InvalidInputError(f"no block labelled {key!r}")

    def add_constraint(self, coeffs: dict, rhs: float) -> None:
        self.constraints.append(({self.block_index(k): v for k, v in coeffs.items()}, float(rhs)))

    @property
    def n_variables(self) -> int:
        return sum(side * side for _, side in self.blocks)


@dataclass
class SdpSolution:
    status: str
    primal_value: float
    dual_value: float
    primal_blocks: list
    dual_multipliers: np.ndarray
    iterations: int
    dual_blocks: list = field(default_factory=list)
    primal_residual: float = float("nan")
    dual_residual: float = float("nan")
    history: list = field(default_factory=list)

    @property
    def gap(self) -> float:
        return abs(self.primal_value - self.dual_value) / (1.0 + abs(self.primal_value))


# --- real vectorization of Hermitian matrices ----------------------------

_SQRT2 = np.sqrt(2.0)
_triu_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _triu(n: int):
    if n not in _triu_cache:
        _triu_cache[n] = np.triu_indices(n, 1)
    return _triu_cache[n]


def svec(x: np.ndarray) -> np.ndarray:
    """Vectorize one Hermitian matrix or a stack ``(..., n, n)``."""
    x = np.asarray(x)
    n = x.shape[-1]
    iu, ju = _triu(n)
    diag = np.real(np.diagonal(x, axis1=-2, axis2=-1))
    up = x[..., iu, ju]
    return np.concatenate([diag, _SQRT2 * up.real, _SQRT2 * up.imag], axis=-1)


def smat(v: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`svec`."""
    v = np.asarray(v, dtype=float)
    iu, ju = _triu(n)
    k = len(iu)
    out = np.zeros(v.shape[:-1] + (n, n), dtype=complex)
    idx = np.arange(n)
    out[..., idx, idx] = v[..., :n]
    up = (v[..., n:n + k] + 1j * v[..., n + k:]) / _SQRT2
    out[..., iu, ju] = up
    out[..., ju, iu] = np.conj(up)
    return out


def real_embedding(h: np.ndarray) -> np.ndarray:
    """``[[Re H, -Im H], [Im H, Re H]]``; its spectrum doubles that of ``H``."""
    h = np.asarray(h, dtype=complex)
    return np.block([[h.real, -h.imag], [h.imag, h.real]])


# --- problem assembly -----------------------------------------------------


@dataclass
class _Vectorized:
    sides: list
    offsets: list
    c: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def split(self, x):
        return [x[o:o + s * s] for o, s in zip(self.offsets, self.sides)]


def _vectorize(problem: SdpProblem) -> _Vectorized:
    sides = [side for _, side in problem.blocks]
    offsets = list(np.cumsum([0] + [s * s for s in sides])[:-1])
    total = sum(s * s for s in sides)
    if total > MAX_VARIABLES:
        raise CapacityError(f"SDP has {total} scalar variables, limit is {MAX_VARIABLES}")

    def coeff(mat, k, what):
        m = np.asarray(mat, dtype=complex)
        if m.shape != (sides[k], sides[k]):
            raise InvalidInputError(
                f"{what} for block {problem.blocks[k][0]!r} has shape {m.shape}, "
                f"expected ({sides[k]}, {sides[k]})"
            )
        scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
        if hermitian_deviation(m) > COEFF_HERMITIAN_TOL * scale:
            raise InvalidInputError(f"{what} for block {problem.blocks[k][0]!r} is not Hermitian")
        return svec(0.5 * (m + m.conj().T))

    c = np.zeros(total)
    for k, mat in enumerate(problem.objective):
        if mat is not None:
            c[offsets[k]:offsets[k] + sides[k] ** 2] = coeff(mat, k, "objective")
    a = np.zeros((len(problem.constraints), total))
    b = np.zeros(len(problem.constraints))
    for i, (coeffs, rhs) in enumerate(problem.constraints):
        items = coeffs.items() if isinstance(coeffs, dict) else enumerate(coeffs)
        for k, mat in items:
            if mat is None:
                continue
            k = problem.block_index(k)
            a[i, offsets[k]:offsets[k] + sides[k] ** 2] = coeff(mat, k, f"constraint {i}")
        b[i] = float(rhs)
    return _Vectorized(sides, offsets, c, a, b)


def _orthogonalize(a: np.ndarray, b: np.ndarray):
    """Pivoted QR of ``A^T``: orthonormal rows spanning the row space of ``A``.

    Returns ``(A_q, b_q, keep, r11, inconsistency)`` where ``keep`` lists the
    original rows retained, ``A_q = r11^{-T} A[keep]`` and likewise for ``b``.
    """
    m = a.shape[0]
    if m == 0:
        return a, b, np.zeros(0, dtype=int), np.zeros((0, 0)), 0.0
    q, r, piv = scipy.linalg.qr(a.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > REDUNDANT_TOL * max(1.0, diag[0])))
    keep = piv[:rank]
    r11 = r[:rank, :rank]
    a_q = q[:, :rank].T
    b_q = scipy.linalg.solve_triangular(r11, b[keep], trans="T")
    # dropped rows must be implied by the kept ones
    inconsistency = 0.0
    if rank < m:
        dropped = piv[rank:]
        coef = scipy.linalg.solve_triangular(r11, r[:rank, rank:])
        implied = coef.T @ b[keep]
        inconsistency = float(np.max(np.abs(implied - b[dropped])))
    return a_q, b_q, keep, r11, inconsistency


# --- solver ---------------------------------------------------------------


def _chol_factor(x: np.ndarray) -> np.ndarray:
    return np.linalg.cholesky(0.5 * (x + x.conj().T))


def _max_step(l_fac: np.ndarray, d: np.ndarray) -> float:
    """Largest ``a`` with ``L L^H + a D >= 0`` (``inf`` if unbounded)."""
    li = scipy.linalg.solve_triangular(l_fac, np.eye(l_fac.shape[0]), lower=True)
    t = li @ d @ li.conj().T
    lo = float(np.linalg.eigvalsh(0.5 * (t + t.conj().T))[0])
    return np.inf if lo >= 0 else -1.0 / lo


def solve(problem: SdpProblem, options: SdpOptions | None = None, **kw) -> SdpSolution:
    """Solve ``problem``; deterministic for identical inputs and options."""
    opts = options if options is not None else SdpOptions.from_env(**kw)
    vec = _vectorize(problem)
    sides, nb = vec.sides, len(vec.sides)
    m_orig = len(vec.b)
    a_q, b_q, keep, r11, inconsistency = _orthogonalize(vec.a, vec.b)
    m = a_q.shape[0]
    a_blocks = vec.split(a_q.T)  # each (n_b^2, m)
    a_mats = [smat(ab.T, s) for ab, s in zip(a_blocks, sides)]  # (m, n, n)
    c_mats = [smat(cb, s) for cb, s in zip(vec.split(vec.c), sides)]
    n_total = sum(sides)

    scale = opts.initial_scale
    if scale is None:
        scale = 1.0 + float(np.linalg.norm(vec.c))
    x = [scale * np.eye(s, dtype=complex) for s in sides]
    s_mat = [scale * np.eye(s, dtype=complex) for s in sides]
    y = np.zeros(m)
    b_norm = 1.0 + float(np.max(np.abs(b_q))) if m else 1.0
    c_norm = 1.0 + float(np.max(np.abs(vec.c))) if len(vec.c) else 1.0

    def a_op(mats):
        return sum(a_blocks[k].T @ svec(mats[k]) for k in range(nb)) if m else np.zeros(0)

    def at_op(v):
        return [np.tensordot(v, a_mats[k], axes=(0, 0)) if m else np.zeros((sides[k],) * 2, complex)
                for k in range(nb)]

    history = []
    status = "max_iterations"
    it = 0
    best = None

    def objectives():
        pobj = sum(float(np.real(np.vdot(c_mats[k], x[k]))) for k in range(nb))
        dobj = float(b_q @ y)
        return pobj, dobj

    for it in range(1, opts.max_iter + 1):
        aty = at_op(y)
        rp = b_q - a_op(x)
        rd = [c_mats[k] - aty[k] - s_mat[k] for k in range(nb)]
        mu = sum(float(np.real(np.vdot(x[k], s_mat[k]))) for k in range(nb)) / n_total
        pobj, dobj = objectives()
        pres = float(np.max(np.abs(rp))) / b_norm if m else 0.0
        dres = max(float(np.max(np.abs(r))) for r in rd) / c_norm
        gap = abs(pobj - dobj) / (1.0 + abs(pobj))
        history.append((it - 1, pobj, dobj, gap, pres, dres, mu))
        merit = max(gap, pres, dres)
        if best is None or merit < best[0]:
            best = (merit, [xx.copy() for xx in x], y.copy(), [ss.copy() for ss in s_mat])
        if gap <= opts.tol and pres <= opts.tol and dres <= opts.tol:
            status = "optimal"
            break
        if dobj > DIVERGENCE and dres <= opts.tol * 1e2:
            status = "infeasible"
            break
        if pobj < -DIVERGENCE and pres <= opts.tol * 1e2:
            status = "infeasible"
            break

        # NT scaling per block
        try:
            lx = [_chol_factor(xx) for xx in x]
        except np.linalg.LinAlgError:
            break
        g, lam, w = [], [], []
        for k in range(nb):
            t = lx[k].conj().T @ s_mat[k] @ lx[k]
            d2, u = np.linalg.eigh(0.5 * (t + t.conj().T))
            d = np.sqrt(np.clip(d2, 1e-300, None))
            gk = (lx[k] @ u) / np.sqrt(d)
            g.append(gk)
            lam.append(d)
            w.append(gk @ gk.conj().T)

        # Schur complement M_ij = <A_i, W A_j W> = <G^H A_i G, G^H A_j G>, so M = B B^T.
        # A QR of B^T gives the Cholesky factor without forming M, which keeps
        # cond(R) = sqrt(cond(M)) as X and S become ill-conditioned.
        schur = None
        if m:
            bt = np.concatenate([svec(g[k].conj().T @ a_mats[k] @ g[k]) for k in range(nb)], axis=1)
            r_fac = scipy.linalg.qr(bt.T, mode="r", check_finite=False)[0][:m]
            if np.min(np.abs(np.diag(r_fac))) > 1e-14 * np.max(np.abs(np.diag(r_fac))):
                schur = lambda v: scipy.linalg.solve_triangular(  # noqa: E731
                    r_fac, scipy.linalg.solve_triangular(r_fac, v, trans="T"))
            else:
                schur = lambda v: np.linalg.lstsq(bt.T, np.linalg.lstsq(bt, v, rcond=None)[0],  # noqa: E731
                                                  rcond=None)[0]

        def direction(rc):
            wrdw = [w[k] @ rd[k] @ w[k] for k in range(nb)]
            rhs = rp - a_op([rc[k] - wrdw[k] for k in range(nb)])
            dy = schur(rhs) if m else np.zeros(0)
            for _ in range(2 if m else 0):
                # refine against the true residual A(dx) = rp; the Schur matrix
                # is badly conditioned near the optimum
                atdy = at_op(dy)
                dx = [rc[k] - w[k] @ (rd[k] - atdy[k]) @ w[k] for k in range(nb)]
                dy = dy + schur(rp - a_op(dx))
            atdy = at_op(dy)
            ds = [rd[k] - atdy[k] for k in range(nb)]
            dx = [rc[k] - w[k] @ ds[k] @ w[k] for k in range(nb)]
            dx = [0.5 * (d_ + d_.conj().T) for d_ in dx]
            ds = [0.5 * (d_ + d_.conj().T) for d_ in ds]
            return dx, dy, ds

        try:
            ls = [_chol_factor(ss) for ss in s_mat]
        except np.linalg.LinAlgError:
            break

        def steps(dx, ds):
            ap = min([1.0] + [_max_step(lx[k], dx[k]) for k in range(nb)])
            ad = min([1.0] + [_max_step(ls[k], ds[k]) for k in range(nb)])
            return ap, ad

        # predictor
        dx_a, dy_a, ds_a = direction([-xx for xx in x])
        ap_max, ad_max = steps(dx_a, ds_a)
        ap, ad = min(1.0, ap_max), min(1.0, ad_max)
        mu_aff = sum(
            float(np.real(np.vdot(x[k] + ap * dx_a[k], s_mat[k] + ad * ds_a[k]))) for k in range(nb)
        ) / n_total
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3

        # corrector in scaled coordinates
        rc = []
        for k in range(nb):
            gi = np.linalg.inv(g[k])
            dxt = gi @ dx_a[k] @ gi.conj().T
            dst = g[k].conj().T @ ds_a[k] @ g[k]
            prod = 0.5 * (dxt @ dst + dst @ dxt)
            h = sigma * mu * np.eye(sides[k]) - np.diag(lam[k] ** 2) - prod
            z = 2.0 * h / (lam[k][:, None] + lam[k][None, :])
            rc.append(g[k] @ z @ g[k].conj().T)
        dx, dy, ds = direction(rc)
        ap_max, ad_max = steps(dx, ds)
        ap = min(1.0, opts.step_fraction * ap_max)
        ad = min(1.0, opts.step_fraction * ad_max)
        if ap < 1e-12 and ad < 1e-12:
            break
        x = [x[k] + ap * dx[k] for k in range(nb)]
        y = y + ad * dy
        s_mat = [s_mat[k] + ad * ds[k] for k in range(nb)]
    else:
        it = opts.max_iter

    if status != "optimal" and best is not None and status != "infeasible":
        _, x, y, s_mat = best

    x = [0.5 * (xx + xx.conj().T) for xx in x]
    s_mat = [0.5 * (ss + ss.conj().T) for ss in s_mat]
    # multipliers for the original rows; dropped redundant rows get zero
    y_full = np.zeros(m_orig)
    if m:
        y_full[keep] = scipy.linalg.solve_triangular(r11, y)
    x_vec = np.concatenate([svec(xx) for xx in x])
    resid = vec.a @ x_vec - vec.b if m_orig else np.zeros(0)
    pobj = float(vec.c @ x_vec)
    dobj = float(vec.b @ y_full)
    aty = [np.tensordot(y, a_mats[k], axes=(0, 0)) if m else 0.0 for k in range(nb)]
    dres = max(float(np.max(np.abs(c_mats[k] - aty[k] - s_mat[k]))) for k in range(nb))
    if inconsistency > 1e-9 and status == "optimal":
        status = "infeasible"
    return SdpSolution(
        status=status,
        primal_value=pobj,
        dual_value=dobj,
        primal_blocks=x,
        dual_multipliers=y_full,
        iterations=it,
        dual_blocks=s_mat,
        primal_residual=float(np.max(np.abs(resid))) if m_orig else 0.0,
        dual_residual=dres,
        history=history,
    )


def write_history_csv(solution: SdpSolution, path) -> None:
    """Dump the iterate log (debug aid behind the CLI ``--sdp-trace`` flag)."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["iteration", "primal", "dual", "gap", "primal_res", "dual_res", "mu"])
        for row in solution.history:
            wr.writerow([row[0]] + [f"{v:.12g}" for v in row[1:]])
