"""Block time marching.

``[0, t_f]`` is cut into ``N_b`` blocks of length ``Gamma = t_f / N_b``.
Block ``k`` is solved on the shifted time ``xi = t - k Gamma`` in
``[0, Gamma]``; its problem data are evaluated at ``xi + k Gamma`` and its
initial condition is block ``k - 1`` evaluated at ``xi = Gamma``.  Steady
problems are handled as a single block without a time axis.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .assembly import Assembler, ProblemSpec
from .mesh import DomainPartition, collocation, partition
from .network import LocalNetwork, evaluate, feature_jet, new_local_network, set_output_weights
from .solvers import (
    NlsqOptions,
    SolverError,
    lstsq_min_norm,
    newton_llsq,
    nlsq_perturb,
)

SOLVERS = ("linear", "nlsq_perturb", "newton_llsq")


class BlockError(SolverError):
    """A block solve failed; ``partial`` holds the blocks completed before it."""

    def __init__(self, block_index: int, cause: Exception, partial=None):
        super().__init__(f"time block {block_index} failed: {cause}")
        self.block_index = block_index
        self.partial = partial


@dataclass
class BlockConfig:
    """Discretisation and solver settings shared by every block.

    ``counts`` and ``q`` list one entry per axis, time last.  Hidden
    coefficients of block ``k`` are drawn from a generator seeded with
    ``seed + k``, sub-domain by sub-domain.
    """

    counts: tuple[int, ...]
    q: tuple[int, ...]
    hidden_widths: tuple[int, ...] = (100,)
    r_m: float = 1.0
    seed: int = 1
    distribution: str = "uniform"
    solver: str = "linear"
    nlsq: NlsqOptions = field(default_factory=NlsqOptions)
    newton_max_iter: int = 20
    newton_tol: float = 1e-10
    rcond: float | None = None
    compress: bool = True
    row_scale: dict | None = None

    def __post_init__(self):
        self.counts = tuple(int(c) for c in np.atleast_1d(self.counts))
        self.q = tuple(int(c) for c in np.atleast_1d(self.q))
        self.hidden_widths = tuple(int(w) for w in np.atleast_1d(self.hidden_widths))
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}, got {self.solver!r}")


@dataclass
class BlockSolution:
    block_index: int
    gamma: float | None
    t_offset: float
    partition: DomainPartition
    networks: list[LocalNetwork]
    cost: float
    solve_time: float  # assembly + solve, seconds
    iterations: int = 0
    subiterations: int = 0
    converged: bool = True
    initial_residual: float = 0.0  # max |row| over the initial-condition rows

    def weights(self) -> np.ndarray:
        return np.concatenate([n.output_weights for n in self.networks])

    def evaluate(self, local_points) -> np.ndarray:
        """Evaluate at points in block-local coordinates."""
        pts = np.atleast_2d(np.asarray(local_points, dtype=float))
        owner = self.partition.locate(pts)
        out = np.empty(pts.shape[0])
        for s in np.unique(owner):
            sel = owner == s
            out[sel] = evaluate(self.networks[s], pts[sel])
        return out

    def time_derivative(self, local_points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(local_points, dtype=float))
        owner = self.partition.locate(pts)
        out = np.empty(pts.shape[0])
        for s in np.unique(owner):
            sel = owner == s
            net = self.networks[s]
            out[sel] = feature_jet(net, pts[sel]).grad[-1] @ net.output_weights
        return out


@dataclass
class MarchResult:
    problem: ProblemSpec
    blocks: list[BlockSolution]
    t_final: float | None
    block_errors: list[tuple[float, float]] = field(default_factory=list)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def gamma(self) -> float | None:
        return self.blocks[0].gamma if self.blocks else None

    @property
    def solve_time(self) -> float:
        return sum(b.solve_time for b in self.blocks)

    @property
    def cost(self) -> float:
        return max(b.cost for b in self.blocks)


def _block_networks(part: DomainPartition, cfg: BlockConfig, block_index: int) -> list[LocalNetwork]:
    rng = np.random.default_rng(cfg.seed + block_index)
    return [
        new_local_network(part.ndim, cfg.hidden_widths, cfg.r_m, rng, part.box(s))
        for s in range(part.n_subdomains)
    ]


def solve_block(
    problem: ProblemSpec,
    cfg: BlockConfig,
    block_index: int = 0,
    gamma: float | None = None,
    initial_field: Callable | None = None,
    initial_velocity: Callable | None = None,
) -> BlockSolution:
    """Build and train the networks of one time block.

    ``initial_field`` / ``initial_velocity`` map spatial points to the block's
    initial data; by default the problem's own data are used.
    """
    bounds = [tuple(b) for b in problem.spatial_bounds]
    t_offset = 0.0
    if problem.time_order:
        if gamma is None:
            gamma = float(problem.t_final)
        bounds.append((0.0, gamma))
        t_offset = block_index * gamma
    else:
        gamma = None
    part = partition(bounds, cfg.counts)
    colloc = collocation(part, cfg.q, cfg.distribution, seed=cfg.seed + block_index)
    nets = _block_networks(part, cfg, block_index)

    t0 = time.perf_counter()
    asm = Assembler(problem, part, colloc, nets, t_offset=t_offset, initial=initial_field,
                    initial_velocity=initial_velocity, row_scale=cfg.row_scale)
    sysm = asm.system
    blocks = sysm.column_blocks() if cfg.compress else None
    its, subits, converged = 0, 0, True
    if problem.is_nonlinear:
        x0 = np.zeros(sysm.shape[1])
        if cfg.solver == "newton_llsq":
            res = newton_llsq(asm.residual, asm.jacobian, x0, cfg.newton_max_iter,
                              cfg.newton_tol, rcond=cfg.rcond, blocks=blocks)
            w, its, converged = res.x, res.iterations, res.converged
        else:
            res = nlsq_perturb(asm.residual, asm.jacobian, x0, cfg.nlsq, blocks=blocks)
            w, its, subits, converged = res.x, res.lm_iterations, res.subiterations, res.converged
        r = asm.residual(w)
    else:
        w = lstsq_min_norm(sysm.matrix, sysm.rhs, rcond=cfg.rcond, blocks=blocks)
        r = sysm.matrix @ w - sysm.rhs
    elapsed = time.perf_counter() - t0
    cost = 0.5 * float(r @ r)

    M = sysm.n_features
    for s, net in enumerate(nets):
        set_output_weights(net, w[s * M:(s + 1) * M])
    init_rows = sysm.rows("initial")
    init_res = float(np.max(np.abs(r[init_rows]))) if init_rows.size else 0.0

    if problem.is_nonlinear and cost > cfg.nlsq.cost_threshold:
        warnings.warn(
            f"time block {block_index}: nonlinear cost {cost:.3e} is above "
            f"{cfg.nlsq.cost_threshold:g}; reduce Γ (use more, shorter time blocks)",
            RuntimeWarning,
            stacklevel=2,
        )
    return BlockSolution(
        block_index=block_index,
        gamma=gamma,
        t_offset=t_offset,
        partition=part,
        networks=nets,
        cost=cost,
        solve_time=elapsed,
        iterations=its,
        subiterations=subits,
        converged=converged,
        initial_residual=init_res,
    )


def _end_state(block: BlockSolution, derivative: bool = False) -> Callable:
    def call(xs):
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        pts = np.column_stack([xs, np.full(xs.shape[0], block.gamma)])
        return block.time_derivative(pts) if derivative else block.evaluate(pts)
    return call


def march(problem: ProblemSpec, t_final: float | None, n_blocks: int, cfg: BlockConfig,
          compute_errors: bool = False) -> MarchResult:
    """Solve block after block, chaining terminal states into initial data."""
    if n_blocks < 1:
        raise ValueError(f"n_blocks must be >= 1, got {n_blocks}")
    if not problem.time_order:
        if n_blocks != 1:
            raise ValueError("steady problems are solved as a single block")
        t_final = None
        gamma = None
    else:
        t_final = float(problem.t_final if t_final is None else t_final)
        if not t_final > 0:
            raise ValueError(f"t_final must be positive, got {t_final}")
        gamma = t_final / n_blocks
    result = MarchResult(problem=problem, blocks=[], t_final=t_final)
    init, vel = None, None
    for k in range(n_blocks):
        try:
            blk = solve_block(problem, cfg, k, gamma, init, vel)
        except (SolverError, np.linalg.LinAlgError, FloatingPointError) as exc:
            raise BlockError(k, exc, partial=result) from exc
        result.blocks.append(blk)
        if problem.time_order:
            init = _end_state(blk)
            vel = _end_state(blk, derivative=True) if problem.time_order == 2 else None
    if compute_errors and problem.exact is not None:
        from .metrics import error_report

        result.block_errors = error_report(result).per_block
    return result


def route(result: MarchResult, points) -> tuple[np.ndarray, np.ndarray]:
    """Owning block of each point and the point in block-local coordinates."""
    pts = np.array(np.atleast_2d(points), dtype=float)
    if not result.problem.time_order:
        return np.zeros(pts.shape[0], dtype=int), pts
    t = pts[:, -1]
    tf, gamma = result.t_final, result.gamma
    slack = 1e-12 * tf
    if np.any((t < -slack) | (t > tf + slack)):
        bad = int(np.flatnonzero((t < -slack) | (t > tf + slack))[0])
        raise ValueError(f"point {bad} has t={t[bad]} outside [0, {tf}]")
    starts = np.arange(result.n_blocks) * gamma
    k = np.clip(np.searchsorted(starts, t, side="left") - 1, 0, result.n_blocks - 1)
    pts[:, -1] = np.clip(t - starts[k], 0.0, gamma)
    return k, pts


def evaluate_solution(result: MarchResult, points) -> np.ndarray:
    """Evaluate the marched solution at physical points.

    Points on a block or sub-domain boundary belong to the lower index.
    """
    k, local = route(result, points)
    out = np.empty(local.shape[0])
    for b in np.unique(k):
        sel = k == b
        out[sel] = result.blocks[b].evaluate(local[sel])
    return out
