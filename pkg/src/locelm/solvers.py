"""Dense least-squares solvers.

``lstsq_min_norm`` is the linear workhorse.  ``levenberg_marquardt`` is the
inner nonlinear solver, wrapped by ``nlsq_perturb`` (random restarts around
the best iterate) and complemented by ``newton_llsq`` (Newton steps obtained
by min-norm least squares on the rectangular Jacobian).

locELM matrices are block sparse by columns: the parameters of sub-domain
``s`` only touch the rows of ``s`` and of the faces it shares.  When such a
column block has fewer nonzero rows than columns, it can be replaced by the
thin factor ``A[:, s] V_s`` where ``V_s`` spans its row space.  Writing
``A = B V^T`` with ``V = blockdiag(V_s)`` orthonormal, the min-norm solution
is ``V B^+ b`` and the singular values of ``B`` equal those of ``A``, so the
compression is exact and only shrinks the dense factorisation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

XI2_MODES = ("random", "fixed_zero", "fixed_one")


class SolverError(RuntimeError):
    pass


def default_rcond(shape) -> float:
    return np.finfo(float).eps * max(shape)


# -- column-block compression --------------------------------------------


@dataclass
class _Compressed:
    B: np.ndarray
    bases: list  # (column slice in A, column slice in B, V_s or None)

    def expand(self, z: np.ndarray, n: int) -> np.ndarray:
        x = np.zeros(n)
        for sa, sb, V in self.bases:
            x[sa] = z[sb] if V is None else V @ z[sb]
        return x


def compress_columns(A: np.ndarray, blocks: Sequence[slice] | None) -> _Compressed | None:
    """Thin row-space factors of the column blocks that are wider than tall.

    Returns ``None`` when no block benefits.
    """
    if not blocks:
        return None
    pieces, bases, width = [], [], 0
    gain = False
    for sl in blocks:
        Ab = A[:, sl]
        nz = np.flatnonzero(np.any(Ab != 0.0, axis=1))
        k = Ab.shape[1]
        if len(nz) < k:
            gain = True
            # rows of Ab outside nz are zero, so the right singular vectors
            # of Ab[nz] span its full row space
            _, _, vt = np.linalg.svd(Ab[nz], full_matrices=False)
            V = vt.T
            pieces.append(Ab @ V)
            bases.append((sl, slice(width, width + V.shape[1]), V))
            width += V.shape[1]
        else:
            pieces.append(Ab)
            bases.append((sl, slice(width, width + k), None))
            width += k
    if not gain:
        return None
    return _Compressed(np.hstack(pieces), bases)


def lstsq_min_norm(A, b, rcond: float | None = None, blocks: Sequence[slice] | None = None) -> np.ndarray:
    """Minimum-norm least-squares solution of ``A x ~ b``.

    Singular values below ``rcond * sigma_max`` are treated as zero
    (default ``rcond = eps * max(A.shape)``).  ``blocks`` optionally lists
    the column blocks used for exact compression (see module notes).
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.size == 0:
        raise SolverError("A must be a non-empty matrix")
    if b.shape[0] != A.shape[0]:
        raise SolverError(f"rhs has {b.shape[0]} rows, matrix has {A.shape[0]}")
    if rcond is None:
        rcond = default_rcond(A.shape)
    if rcond < 0:
        raise SolverError("rcond must be non-negative")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise SolverError("non-finite entries in the least-squares system")
    comp = compress_columns(A, blocks)
    M = A if comp is None else comp.B
    try:
        x = scipy.linalg.lstsq(M, b, cond=rcond, lapack_driver="gelsd", check_finite=False)[0]
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"SVD did not converge: {exc}") from exc
    if comp is not None:
        x = comp.expand(x, A.shape[1]) if x.ndim == 1 else np.column_stack(
            [comp.expand(c, A.shape[1]) for c in x.T]
        )
    return x


# -- Levenberg-Marquardt --------------------------------------------------


@dataclass
class LmOptions:
    """Inner Levenberg-Marquardt settings.

    Iteration stops once ``cost <= cost_tol``, ``|J^T r|_inf <= gtol``, an
    accepted step satisfies ``|p| <= xtol (|x| + xtol)`` or reduces the cost
    by less than ``ftol * cost``, or after ``max_iter`` Jacobian evaluations.
    """

    max_iter: int = 100
    cost_tol: float = 1e-20
    gtol: float = 1e-14
    xtol: float = 1e-12
    ftol: float = 1e-12
    tau: float = 1e-12  # initial damping relative to sigma_max^2
    rcond: float | None = None


@dataclass
class LmResult:
    x: np.ndarray
    cost: float
    iterations: int
    reason: str
    history: list = field(default_factory=list)  # cost after every accepted step


def _cost(r: np.ndarray) -> float:
    return 0.5 * float(r @ r)


def _finite(r, what):
    if not np.all(np.isfinite(r)):
        raise SolverError(f"non-finite values in the {what}")


def levenberg_marquardt(
    residual_fn: Callable,
    jacobian_fn: Callable,
    x0,
    opts: LmOptions | None = None,
    blocks: Sequence[slice] | None = None,
) -> LmResult:
    """Minimise ``0.5 |r(x)|^2``.

    Each Jacobian is factored once by a thin SVD; trial steps for different
    damping values ``mu`` then cost a few matrix-vector products.  Damping
    follows the gain-ratio rule of Nielsen.
    """
    opts = opts or LmOptions()
    x = np.array(x0, dtype=float)
    r = np.asarray(residual_fn(x), dtype=float)
    _finite(r, "residual")
    cost = _cost(r)
    history = [cost]
    mu, nu = None, 2.0
    reason = "max_iter"
    it = 0
    while it < opts.max_iter:
        if cost <= opts.cost_tol:
            reason = "cost_tol"
            break
        J = np.asarray(jacobian_fn(x), dtype=float)
        _finite(J, "Jacobian")
        it += 1
        g = J.T @ r
        if np.max(np.abs(g)) <= opts.gtol:
            reason = "gtol"
            break
        comp = compress_columns(J, blocks)
        B = J if comp is None else comp.B
        try:
            U, s, Vt = scipy.linalg.svd(B, full_matrices=False, check_finite=False,
                                        lapack_driver="gesdd")
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"SVD did not converge: {exc}") from exc
        rc = default_rcond(J.shape) if opts.rcond is None else opts.rcond
        keep = s > rc * s[0]
        s, U, Vt = s[keep], U[:, keep], Vt[keep]
        Utr = U.T @ r
        if mu is None:
            mu = opts.tau * s[0] ** 2
        accepted = False
        while True:
            coef = s / (s * s + mu) * Utr
            z = -(Vt.T @ coef)
            p = z if comp is None else comp.expand(z, x.size)
            # predicted reduction of the linear model
            Jp_r = r - U @ (s * coef)
            pred = cost - _cost(Jp_r)
            x_new = x + p
            r_new = np.asarray(residual_fn(x_new), dtype=float)
            _finite(r_new, "residual")
            cost_new = _cost(r_new)
            pnorm = np.linalg.norm(p)
            small = pnorm <= opts.xtol * (np.linalg.norm(x) + opts.xtol)
            if cost_new < cost and pred > 0:
                rho = (cost - cost_new) / pred
                mu *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
                nu = 2.0
                drop = cost - cost_new
                x, r, cost = x_new, r_new, cost_new
                history.append(cost)
                accepted = True
                break
            if small or not np.isfinite(mu):
                break
            mu *= nu
            nu *= 2.0
        if not accepted:
            reason = "xtol"
            break
        if small:
            reason = "xtol"
            break
        if drop <= opts.ftol * (cost + drop):
            reason = "ftol"
            break
    else:
        if cost <= opts.cost_tol:
            reason = "cost_tol"
    return LmResult(x=x, cost=cost, iterations=it, reason=reason, history=history)


# -- NLSQ-perturb ---------------------------------------------------------


@dataclass
class NlsqOptions:
    delta: float = 0.5
    xi2_mode: str = "random"
    cost_threshold: float = 1e-3
    max_subiterations: int = 10
    inner: LmOptions = field(default_factory=LmOptions)
    seed: int = 0

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not self.cost_threshold > 0:
            raise ValueError(f"cost_threshold must be positive, got {self.cost_threshold}")
        if self.xi2_mode not in XI2_MODES:
            raise ValueError(f"xi2_mode must be one of {XI2_MODES}, got {self.xi2_mode!r}")
        if self.max_subiterations < 0:
            raise ValueError("max_subiterations must be >= 0")


@dataclass
class NlsqResult:
    x: np.ndarray
    cost: float
    subiterations: int
    converged: bool
    lm_iterations: int
    initial_cost: float


def nlsq_perturb(residual_fn, jacobian_fn, x0, opts: NlsqOptions | None = None,
                 blocks: Sequence[slice] | None = None) -> NlsqResult:
    """Nonlinear least squares with random restarts.

    A plain solve from ``x0`` is tried first.  While the best cost stays
    above ``cost_threshold``, a new start ``xi2 * x + dx`` is drawn, with
    ``dx`` uniform on ``[-xi1 delta, xi1 delta]^n`` and ``xi1`` uniform on
    ``[0, 1]``; ``xi2`` is random on ``[0, 1]`` or fixed at 0 or 1.  The
    best solution found is returned; ``converged`` is False if the
    threshold was never met.
    """
    opts = opts or NlsqOptions()
    rng = np.random.default_rng(opts.seed)
    res = levenberg_marquardt(residual_fn, jacobian_fn, x0, opts.inner, blocks)
    x, c = res.x, res.cost
    initial_cost = c
    lm_its = res.iterations
    used = 0
    if c <= opts.cost_threshold:
        return NlsqResult(x, c, 0, True, lm_its, initial_cost)
    for _ in range(opts.max_subiterations):
        used += 1
        xi1 = rng.uniform(0.0, 1.0)
        d1 = xi1 * opts.delta
        dx = rng.uniform(-d1, d1, size=x.shape)
        if opts.xi2_mode == "random":
            xi2 = rng.uniform(0.0, 1.0)
        else:
            xi2 = 0.0 if opts.xi2_mode == "fixed_zero" else 1.0
        y0 = xi2 * x + dx
        res = levenberg_marquardt(residual_fn, jacobian_fn, y0, opts.inner, blocks)
        lm_its += res.iterations
        if res.cost < c:
            x, c = res.x, res.cost
        if res.cost <= opts.cost_threshold:
            return NlsqResult(x, c, used, True, lm_its, initial_cost)
    return NlsqResult(x, c, used, False, lm_its, initial_cost)


# -- Newton-LLSQ ----------------------------------------------------------


@dataclass
class NewtonResult:
    x: np.ndarray
    iterations: int
    cost: float
    converged: bool


def newton_llsq(residual_fn, jacobian_fn, x0, max_iter: int = 20, tol: float = 1e-10,
                rcond: float | None = None, blocks: Sequence[slice] | None = None) -> NewtonResult:
    """Newton iteration with min-norm least-squares updates ``J dx = -G``."""
    x = np.array(x0, dtype=float)
    G = np.asarray(residual_fn(x), dtype=float)
    _finite(G, "residual")
    for k in range(1, max_iter + 1):
        if np.max(np.abs(G)) <= tol:
            return NewtonResult(x, k - 1, _cost(G), True)
        J = np.asarray(jacobian_fn(x), dtype=float)
        _finite(J, "Jacobian")
        dx = lstsq_min_norm(J, -G, rcond=rcond, blocks=blocks)
        x = x + dx
        G = np.asarray(residual_fn(x), dtype=float)
        _finite(G, "residual")
        if np.linalg.norm(dx) <= tol * (1.0 + np.linalg.norm(x)) or np.max(np.abs(G)) <= tol:
            return NewtonResult(x, k, _cost(G), True)
    return NewtonResult(x, max_iter, _cost(G), False)
