"""Maximum and rms errors against an exact solution on a uniform grid."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .timemarch import MarchResult, evaluate_solution, route

SPATIAL_POINTS = 201
TIME_POINTS_PER_UNIT = 200
MAX_TIME_POINTS = 2001


@dataclass
class ErrorReport:
    max_error: float
    rms_error: float
    grid_shape: tuple[int, ...]
    per_block: list[tuple[float, float]] = field(default_factory=list)


def default_grid(bounds, time_dependent: bool, n_space: int = SPATIAL_POINTS) -> list[np.ndarray]:
    """Per-axis sample coordinates: 201 per spatial axis; 200 intervals per time unit, at most 2001 samples."""
    axes = []
    for d, (lo, hi) in enumerate(bounds):
        if time_dependent and d == len(bounds) - 1:
            n = int(min(MAX_TIME_POINTS, max(2, round(TIME_POINTS_PER_UNIT * (hi - lo)) + 1)))
        else:
            n = n_space
        axes.append(np.linspace(lo, hi, n))
    return axes


def grid_points(axes) -> np.ndarray:
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def errors(computed, exact) -> tuple[float, float]:
    e = np.abs(np.asarray(computed, dtype=float) - np.asarray(exact, dtype=float))
    if e.size == 0:
        return 0.0, 0.0
    return float(e.max()), float(np.sqrt(np.mean(e * e)))


def error_report(solution: MarchResult | Callable, exact: Callable | None = None,
                 grid=None, bounds=None) -> ErrorReport:
    """Errors of ``solution`` against ``exact`` on a uniform grid.

    Parameters
    ----------
    solution : MarchResult or callable
        A marched solution, or any callable of ``(n, ndim)`` points.
    exact : callable, optional
        Defaults to the problem's exact solution.
    grid : sequence of arrays, optional
        Per-axis sample coordinates; defaults to :func:`default_grid`.
    bounds : sequence of (lo, hi), optional
        Domain for the default grid when ``solution`` is a plain callable.
    """
    if isinstance(solution, MarchResult):
        problem = solution.problem
        exact = exact if exact is not None else problem.exact
        bounds = problem.domain_bounds(solution.t_final)
        time_dependent = bool(problem.time_order)
        fn = lambda p: evaluate_solution(solution, p)  # noqa: E731
    else:
        if bounds is None and grid is None:
            raise ValueError("bounds or grid are required for a plain callable")
        time_dependent = False
        fn = solution
    if exact is None:
        raise ValueError("no exact solution available for error measurement")
    axes = grid if grid is not None else default_grid(bounds, time_dependent)
    pts = grid_points(axes)
    u_hat = fn(pts)
    u = exact(pts)
    mx, rms = errors(u_hat, u)
    per_block = []
    if isinstance(solution, MarchResult) and time_dependent:
        k, _ = route(solution, pts)
        for b in range(solution.n_blocks):
            sel = k == b
            per_block.append(errors(u_hat[sel], u[sel]))
    return ErrorReport(mx, rms, tuple(len(a) for a in axes), per_block)
