"""Benchmark problems with closed-form solutions.

Each exact solution is written once with the functions of :mod:`locelm.dual`,
so it can be evaluated on arrays and differentiated to machine precision.
The forcing is obtained by applying the operator to the exact solution.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import dual as D
from .assembly import Nonlinearity, ProblemSpec, face_name

PI = np.pi


def _columns(pts) -> list[np.ndarray]:
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    return [pts[:, k] for k in range(pts.shape[1])]


def exact_derivatives(fn: Callable, pts) -> dict[tuple[int, int | None], np.ndarray]:
    """Value and pure first/second derivatives of ``fn(*columns)``.

    Keys are ``(order, axis)``; the value is stored under ``(0, None)``.
    """
    cols = _columns(pts)
    out = {(0, None): np.asarray(D.value(fn(*cols)), dtype=float)}
    for k in range(len(cols)):
        args = list(cols)
        args[k] = D.Jet.variable(cols[k])
        j = fn(*args)
        if not isinstance(j, D.Jet):
            j = D.Jet.constant(np.broadcast_to(j, cols[0].shape))
        out[(1, k)] = np.array(np.broadcast_to(j.d, cols[0].shape))
        out[(2, k)] = np.array(np.broadcast_to(j.dd, cols[0].shape))
    return out


def apply_operator(problem: ProblemSpec, pts, derivs) -> np.ndarray:
    """``sum_k c_k D_k u + F(u, u_x, u_y)`` from precomputed derivatives."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    out = np.zeros(pts.shape[0])
    for term, c in problem.operator.items():
        coef = c(pts) if callable(c) else c
        out = out + coef * derivs[problem.term_axis(term)]
    nl = problem.nonlinearity
    if nl is not None:
        u, ux = derivs[(0, None)], derivs[(1, 0)]
        uy = derivs[(1, 1)] if problem.n_space == 2 else np.zeros_like(u)
        out = out + nl.F(u, ux, uy)
    return out


def _vectorised(fn: Callable) -> Callable:
    def call(pts):
        return np.asarray(D.value(fn(*_columns(pts))), dtype=float) * np.ones(
            np.atleast_2d(pts).shape[0]
        )
    return call


def _build(name, spatial_bounds, time_order, operator, u, continuity, *, periodic=None,
           nonlinearity=None, t_final=None, initial=None, initial_velocity=None,
           zero_forcing=False) -> ProblemSpec:
    n_space = len(spatial_bounds)
    exact = _vectorised(u)
    periodic = dict(periodic or {})
    boundary = {}
    for d in range(n_space):
        if d in periodic:
            continue
        for side in (0, 1):
            boundary[face_name(d, side)] = exact

    def spatial_restriction(fn):
        def call(xs):
            xs = np.atleast_2d(np.asarray(xs, dtype=float))
            full = np.column_stack([xs, np.zeros(xs.shape[0])])
            return fn(full)
        return call

    if time_order:
        if initial is None:
            initial = spatial_restriction(exact)
        if time_order == 2 and initial_velocity is None:
            def v0(full):
                return exact_derivatives(u, full)[(1, n_space)]
            initial_velocity = spatial_restriction(v0)

    spec_holder = {}

    def forcing(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if zero_forcing:
            return np.zeros(pts.shape[0])
        return apply_operator(spec_holder["p"], pts, exact_derivatives(u, pts))

    p = ProblemSpec(
        name=name,
        spatial_bounds=tuple(tuple(map(float, b)) for b in spatial_bounds),
        time_order=time_order,
        operator=operator,
        forcing=forcing,
        continuity=tuple(continuity),
        boundary=boundary,
        periodic=periodic,
        nonlinearity=nonlinearity,
        initial=initial,
        initial_velocity=initial_velocity,
        exact=exact,
        exact_fn=u,
        t_final=t_final,
    )
    spec_holder["p"] = p
    return p


def helmholtz_1d(lam: float = 10.0, a: float = 0.0, b: float = 8.0) -> ProblemSpec:
    """``u'' - lam u = f`` on ``[a, b]`` with Dirichlet ends."""
    def u(x):
        return D.sin(3 * PI * x + 3 * PI / 20) * D.cos(2 * PI * x + PI / 10) + 2.0

    return _build("helmholtz1d", [(a, b)], 0, {"u_xx": 1.0, "u": -lam}, u, (1,))


def helmholtz_2d(lam: float = 10.0, a: float = 0.0, b: float = 3.6) -> ProblemSpec:
    """``u_xx + u_yy - lam u = f`` on ``[a, b]^2`` with Dirichlet faces."""
    def g(z):
        return 1.5 * D.cos(PI * z + 2 * PI / 5) + 2.0 * D.cos(2 * PI * z - PI / 5)

    def u(x, y):
        return -1.0 * (g(x) * g(y))

    return _build(
        "helmholtz2d", [(a, b), (a, b)], 0,
        {"u_xx": 1.0, "u_yy": 1.0, "u": -lam}, u, (1, 1),
    )


def _sech_wave(z, L, x0, delta0):
    """``sech(3/delta0 (-L/2 + mod(z - x0 + L/2, L)))``."""
    xi = D.mod(z - x0 + L / 2, L)
    return D.sech(3.0 / delta0 * (xi - L / 2))


def advection_1d(c: float = -2.0, a: float = 0.0, b: float = 5.0, x0: float = 2.5,
                 delta0: float = 1.0, t_final: float = 2.0) -> ProblemSpec:
    """``u_t - c u_x = 0``, periodic in ``x``, sech initial profile of height 2."""
    L = b - a

    def u(x, t):
        return 2.0 * _sech_wave(x + c * t, L, x0, delta0)

    return _build(
        "advection1d", [(a, b)], 1, {"u_t": 1.0, "u_x": -c}, u, (0, 0),
        periodic={0: 0}, t_final=t_final, zero_forcing=True,
    )


def wave2_1d(c: float = 2.0, a: float = 0.0, b: float = 5.0, x0: float = 3.0,
             delta0: float = 1.0, t_final: float = 1.0) -> ProblemSpec:
    """``u_tt - c^2 u_xx = 0``, periodic in ``u`` and ``u_x``, released from rest."""
    L = b - a

    def u(x, t):
        return _sech_wave(x + c * t, L, x0, delta0) + _sech_wave(x - c * t, L, x0, delta0)

    def v0(xs):
        return np.zeros(np.atleast_2d(xs).shape[0])

    return _build(
        "wave2nd1d", [(a, b)], 2, {"u_tt": 1.0, "u_xx": -c * c}, u, (1, 1),
        periodic={0: 1}, t_final=t_final, initial_velocity=v0,
        zero_forcing=True,
    )


def diffusion_1d(nu: float = 0.01, a: float = 0.0, b: float = 5.0,
                 t_final: float = 1.0) -> ProblemSpec:
    """``u_t - nu u_xx = f`` with Dirichlet ends."""
    def g(z):
        return 2.0 * D.cos(PI * z + PI / 5) + 1.5 * D.cos(2 * PI * z - 3 * PI / 5)

    def u(x, t):
        return g(x) * g(t)

    return _build(
        "diffusion1d", [(a, b)], 1, {"u_t": 1.0, "u_xx": -nu}, u, (1, 0),
        t_final=t_final,
    )


def nonlinear_helmholtz_1d(lam: float = 50.0, beta: float = 10.0, a: float = 0.0,
                           b: float = 8.0) -> ProblemSpec:
    """``u'' - lam u + beta sin(u) = f`` with Dirichlet ends."""
    def u(x):
        return D.sin(3 * PI * x + 3 * PI / 20) * D.cos(4 * PI * x - 2 * PI / 5) + 1.5 + x / 10

    nl = Nonlinearity(
        F=lambda u, ux, uy: beta * np.sin(u),
        F_u=lambda u, ux, uy: beta * np.cos(u),
        F_ux=lambda u, ux, uy: np.zeros_like(u),
        F_uy=lambda u, ux, uy: np.zeros_like(u),
    )
    return _build(
        "nlhelmholtz1d", [(a, b)], 0, {"u_xx": 1.0, "u": -lam}, u, (1,),
        nonlinearity=nl,
    )


def burgers_1d(nu: float = 0.01, a: float = 0.0, b: float = 5.0,
               t_final: float = 0.25) -> ProblemSpec:
    """``u_t + u u_x - nu u_xx = f`` with Dirichlet ends."""
    def g(z):
        return 2.0 * D.cos(PI * z + 2 * PI / 5) + 1.5 * D.cos(2 * PI * z - 3 * PI / 5)

    def u(x, t):
        return (1 + x / 10) * (1 + t / 10) * g(x) * g(t)

    nl = Nonlinearity(
        F=lambda u, ux, uy: u * ux,
        F_u=lambda u, ux, uy: ux,
        F_ux=lambda u, ux, uy: u,
        F_uy=lambda u, ux, uy: np.zeros_like(u),
    )
    return _build(
        "burgers1d", [(a, b)], 1, {"u_t": 1.0, "u_xx": -nu}, u, (1, 0),
        nonlinearity=nl, t_final=t_final,
    )


PROBLEMS: dict[str, Callable[..., ProblemSpec]] = {
    "helmholtz1d": helmholtz_1d,
    "helmholtz2d": helmholtz_2d,
    "advection1d": advection_1d,
    "wave2nd1d": wave2_1d,
    "diffusion1d": diffusion_1d,
    "nlhelmholtz1d": nonlinear_helmholtz_1d,
    "burgers1d": burgers_1d,
}


def get_problem(name: str, **params) -> ProblemSpec:
    try:
        ctor = PROBLEMS[name]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    return ctor(**params)
