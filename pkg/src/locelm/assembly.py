"""Collocation least-squares systems for locELM.

Rows come in six families, always emitted in this order and, within a
family, by sub-domain index and then point index:

``pde``
    The differential equation at every collocation point.
``boundary``
    Dirichlet data on domain faces, or value (and first derivative)
    differences between the two faces of a periodic direction.
``initial``
    ``u = h`` on the ``t = 0`` face of the first time layer.
``initial_velocity``
    ``u_t = v`` on the same face, for second-order-in-time problems.
``continuity_value`` / ``continuity_derivative``
    Matching of value and normal derivative across every interface.  Each
    shared face is emitted once, owned by the lower-indexed sub-domain.

Callables in a :class:`ProblemSpec` receive physical points as an
``(n, ndim)`` array with the spatial coordinates first and ``t`` last.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .mesh import CollocationSet, DomainPartition
from .network import FeatureJet, LocalNetwork, feature_jet

TAGS = (
    "pde",
    "boundary",
    "initial",
    "initial_velocity",
    "continuity_value",
    "continuity_derivative",
)
TERMS = ("u", "u_x", "u_y", "u_xx", "u_yy", "u_t", "u_tt")
FACE_NAMES = ("x", "y")


class AssemblyError(ValueError):
    pass


@dataclass(frozen=True)
class Nonlinearity:
    """``F(u, u_x, u_y)`` and its partial derivatives (vectorised callables)."""

    F: Callable
    F_u: Callable
    F_ux: Callable
    F_uy: Callable


def face_name(dim: int, side: int) -> str:
    return f"{FACE_NAMES[dim]}_{'low' if side == 0 else 'high'}"


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """A PDE ``sum_k c_k D_k u + F(u, u_x, u_y) = f`` on a box.

    Parameters
    ----------
    operator : mapping
        Coefficient of each term in ``TERMS``; a float or a callable of the
        points.  Absent terms are zero.
    boundary : mapping
        Dirichlet data keyed by face name (``"x_low"``, ``"x_high"``, ...).
    periodic : mapping
        Spatial axis -> highest matched derivative (0: value, 1: value and
        first derivative).  Periodic axes take no Dirichlet data.
    continuity : sequence of int
        Continuity order (0 or 1) across interfaces for every axis, time last.
    """

    name: str
    spatial_bounds: tuple[tuple[float, float], ...]
    time_order: int
    operator: Mapping[str, float | Callable]
    forcing: Callable
    continuity: tuple[int, ...]
    boundary: Mapping[str, Callable] = field(default_factory=dict)
    periodic: Mapping[int, int] = field(default_factory=dict)
    nonlinearity: Nonlinearity | None = None
    initial: Callable | None = None
    initial_velocity: Callable | None = None
    exact: Callable | None = None
    exact_fn: Callable | None = None  # exact solution on coordinate columns, dual-number friendly
    t_final: float | None = None

    def __post_init__(self):
        if self.time_order not in (0, 1, 2):
            raise AssemblyError(f"time_order must be 0, 1 or 2, got {self.time_order}")
        n_space = len(self.spatial_bounds)
        if n_space not in (1, 2):
            raise AssemblyError("only one or two spatial dimensions are supported")
        for k in self.operator:
            if k not in TERMS:
                raise AssemblyError(f"unknown operator term {k!r}")
        if n_space == 1 and any(k in self.operator for k in ("u_y", "u_yy")):
            raise AssemblyError("y-derivative terms need two spatial dimensions")
        if self.time_order == 0 and any(k in self.operator for k in ("u_t", "u_tt")):
            raise AssemblyError("time-derivative terms need time_order >= 1")
        if len(self.continuity) != self.ndim:
            raise AssemblyError(f"continuity needs {self.ndim} entries, got {len(self.continuity)}")
        if self.time_order >= 1 and self.initial is None:
            raise AssemblyError("time-dependent problems need initial data")
        if self.time_order == 2 and self.initial_velocity is None:
            raise AssemblyError("second-order-in-time problems need initial velocity data")

    @property
    def n_space(self) -> int:
        return len(self.spatial_bounds)

    @property
    def ndim(self) -> int:
        return self.n_space + (1 if self.time_order else 0)

    @property
    def is_nonlinear(self) -> bool:
        return self.nonlinearity is not None

    def domain_bounds(self, t_final: float | None = None) -> list[tuple[float, float]]:
        b = [tuple(map(float, x)) for x in self.spatial_bounds]
        if self.time_order:
            tf = self.t_final if t_final is None else t_final
            if tf is None:
                raise AssemblyError("t_final is required for a time-dependent problem")
            b.append((0.0, float(tf)))
        return b

    def term_axis(self, term: str) -> tuple[int, int | None]:
        """(derivative order, axis) of an operator term."""
        if term == "u":
            return 0, None
        var = term.split("_")[1]
        axis = self.n_space if var[0] == "t" else FACE_NAMES.index(var[0])
        return len(var), axis


@dataclass
class LeastSquaresSystem:
    """Dense system ``A w ~ b`` with per-row provenance.

    ``row_tags[i]`` indexes ``TAGS``; ``row_subdomain[i]`` is the owning
    sub-domain and ``row_point[i]`` the collocation point within it.
    """

    matrix: np.ndarray
    rhs: np.ndarray
    row_tags: np.ndarray
    row_subdomain: np.ndarray
    row_point: np.ndarray
    n_features: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def rows(self, tag: str) -> np.ndarray:
        return np.flatnonzero(self.row_tags == TAGS.index(tag))

    def column_blocks(self) -> list[slice]:
        M = self.n_features
        return [slice(s * M, (s + 1) * M) for s in range(self.matrix.shape[1] // M)]


def _coef(c, pts):
    return c(pts) if callable(c) else c


class Assembler:
    """Builds rows for one ``(problem, partition, collocation, networks)`` set.

    The linear part of the system is assembled once on construction.

    Parameters
    ----------
    t_offset : float
        Physical start time of the block; problem data are evaluated at
        ``t_local + t_offset``.
    initial, initial_velocity : callable, optional
        Override the problem's initial data (used by time marching).
        Called with spatial points of shape ``(n, n_space)``.
    row_scale : mapping, optional
        Multiply every row of a tag by a factor (default 1).
    """

    def __init__(
        self,
        problem: ProblemSpec,
        part: DomainPartition,
        colloc: CollocationSet,
        networks: Sequence[LocalNetwork],
        t_offset: float = 0.0,
        initial: Callable | None = None,
        initial_velocity: Callable | None = None,
        row_scale: Mapping[str, float] | None = None,
    ):
        if part.ndim != problem.ndim:
            raise AssemblyError(
                f"partition has {part.ndim} axes but the problem needs {problem.ndim}"
            )
        if len(networks) != part.n_subdomains:
            raise AssemblyError(
                f"need {part.n_subdomains} networks, got {len(networks)}"
            )
        M = networks[0].n_features
        if any(n.n_features != M for n in networks):
            raise AssemblyError("all networks must have the same number of output weights")
        for k in (row_scale or {}):
            if k not in TAGS:
                raise AssemblyError(f"unknown row tag {k!r}")
        self.problem = problem
        self.partition = part
        self.colloc = colloc
        self.networks = list(networks)
        self.M = M
        self.t_offset = float(t_offset)
        self.initial = initial if initial is not None else problem.initial
        self.initial_velocity = (
            initial_velocity if initial_velocity is not None else problem.initial_velocity
        )
        self.row_scale = dict(row_scale or {})
        self.jets: list[FeatureJet] = [
            feature_jet(net, pts) for net, pts in zip(self.networks, colloc.points)
        ]
        self.system = self._assemble()

    # -- helpers ---------------------------------------------------------
    def physical(self, pts: np.ndarray) -> np.ndarray:
        if self.problem.time_order and self.t_offset:
            pts = pts.copy()
            pts[:, -1] += self.t_offset
        return pts

    def _derivative(self, s: int, order: int, axis: int | None, idx=None) -> np.ndarray:
        jet = self.jets[s]
        if order == 0:
            block = jet.values
        elif order == 1:
            block = jet.grad[axis]
        else:
            block = jet.second[axis]
        return block if idx is None else block[idx]

    def _check_faces(self):
        p = self.problem
        for d in range(p.n_space):
            if d in p.periodic:
                continue
            for side in (0, 1):
                if face_name(d, side) not in p.boundary:
                    raise AssemblyError(f"missing boundary data for face {face_name(d, side)}")

    # -- assembly --------------------------------------------------------
    def _assemble(self) -> LeastSquaresSystem:
        self._check_faces()
        p, part, cs, M = self.problem, self.partition, self.colloc, self.M
        Ne = part.n_subdomains
        ncol = Ne * M
        tdim = p.n_space if p.time_order else None
        blocks: list[tuple[int, int, np.ndarray, np.ndarray, list]] = []
        # each entry: (tag index, sub-domain, point idx, rhs, [(column sub-domain, coeff block)])

        def add(tag, s, pidx, rhs, parts):
            blocks.append((TAGS.index(tag), s, np.asarray(pidx), np.asarray(rhs, dtype=float), parts))

        # pde rows
        all_idx = np.arange(cs.points_per_subdomain)
        for s in range(Ne):
            pts = self.physical(np.asarray(cs.points[s]))
            row = np.zeros((len(all_idx), M))
            for term, c in p.operator.items():
                order, axis = p.term_axis(term)
                coef = _coef(c, pts)
                row += np.reshape(coef, (-1, 1)) * self._derivative(s, order, axis)
            add("pde", s, all_idx, p.forcing(pts), [(s, row)])

        # boundary rows: Dirichlet faces, then periodic pairs, per sub-domain
        for s in range(Ne):
            for d in range(p.n_space):
                for side in (0, 1):
                    if not cs.on_domain_boundary(s, d, side):
                        continue
                    fidx = cs.face(d, side)
                    if d in p.periodic:
                        if side == 1:
                            continue
                        mi = list(part.multi_index(s))
                        mi[d] = part.counts[d] - 1
                        partner = part.linear_index(mi)
                        hidx = cs.face(d, 1)
                        for order in range(p.periodic[d] + 1):
                            add("boundary", s, fidx, np.zeros(len(fidx)), [
                                (s, self._derivative(s, order, d, fidx)),
                                (partner, -self._derivative(partner, order, d, hidx)),
                            ])
                    else:
                        g = p.boundary[face_name(d, side)]
                        pts = self.physical(np.asarray(cs.points[s][fidx]))
                        add("boundary", s, fidx, g(pts), [(s, self._derivative(s, 0, None, fidx))])

        # initial rows
        if tdim is not None:
            fidx = cs.face(tdim, 0)
            for tag, data, order in (
                ("initial", self.initial, 0),
                ("initial_velocity", self.initial_velocity, 1),
            ):
                if order == 1 and p.time_order < 2:
                    continue
                for s in range(Ne):
                    if not cs.on_domain_boundary(s, tdim, 0):
                        continue
                    xs = np.asarray(cs.points[s][fidx][:, :tdim])
                    add(tag, s, fidx, data(xs), [(s, self._derivative(s, order, tdim, fidx))])

        # continuity rows
        for tag, order in (("continuity_value", 0), ("continuity_derivative", 1)):
            for s in range(Ne):
                for d in range(part.ndim):
                    if order > p.continuity[d]:
                        continue
                    n = part.neighbor(s, d, +1)
                    if n is None:
                        continue
                    hi, lo = cs.face(d, 1), cs.face(d, 0)
                    axis = d if order else None
                    add(tag, s, hi, np.zeros(len(hi)), [
                        (s, self._derivative(s, order, axis, hi)),
                        (n, -self._derivative(n, order, axis, lo)),
                    ])

        # stable sort by (tag, sub-domain); emission order keeps points ordered
        blocks.sort(key=lambda b: (b[0], b[1]))
        nrow = sum(len(b[2]) for b in blocks)
        A = np.zeros((nrow, ncol))
        rhs = np.zeros(nrow)
        tags = np.empty(nrow, dtype=np.int8)
        sub = np.empty(nrow, dtype=np.int64)
        pnt = np.empty(nrow, dtype=np.int64)
        r0 = 0
        for tag, s, pidx, b, parts in blocks:
            r1 = r0 + len(pidx)
            scale = self.row_scale.get(TAGS[tag], 1.0)
            for col_s, coeff in parts:
                A[r0:r1, col_s * M:(col_s + 1) * M] += scale * coeff
            rhs[r0:r1] = scale * np.broadcast_to(b, (len(pidx),))
            tags[r0:r1] = tag
            sub[r0:r1] = s
            pnt[r0:r1] = pidx
            r0 = r1
        return LeastSquaresSystem(A, rhs, tags, sub, pnt, M)

    # -- nonlinear -------------------------------------------------------
    def _pde_fields(self, w: np.ndarray):
        M, p = self.M, self.problem
        w = np.asarray(w, dtype=float)
        if w.shape != (self.partition.n_subdomains * M,):
            raise AssemblyError(
                f"expected {self.partition.n_subdomains * M} parameters, got {w.size}"
            )
        rows = self.system.rows("pde")
        out = []
        for s, jet in enumerate(self.jets):
            ws = w[s * M:(s + 1) * M]
            u = jet.values @ ws
            ux = jet.grad[0] @ ws
            uy = jet.grad[1] @ ws if p.n_space == 2 else np.zeros_like(u)
            out.append((u, ux, uy))
        return rows, out

    def residual(self, w) -> np.ndarray:
        sysm = self.system
        r = sysm.matrix @ w - sysm.rhs
        nl = self.problem.nonlinearity
        if nl is None:
            return r
        rows, fields = self._pde_fields(w)
        scale = self.row_scale.get("pde", 1.0)
        Q = self.colloc.points_per_subdomain
        for s, (u, ux, uy) in enumerate(fields):
            r[rows[s * Q:(s + 1) * Q]] += scale * nl.F(u, ux, uy)
        return r

    def jacobian(self, w) -> np.ndarray:
        sysm = self.system
        nl = self.problem.nonlinearity
        if nl is None:
            return sysm.matrix.copy()
        J = sysm.matrix.copy()
        rows, fields = self._pde_fields(w)
        scale = self.row_scale.get("pde", 1.0)
        Q, M = self.colloc.points_per_subdomain, self.M
        for s, (u, ux, uy) in enumerate(fields):
            jet = self.jets[s]
            blk = np.reshape(nl.F_u(u, ux, uy), (-1, 1)) * jet.values
            blk = blk + np.reshape(nl.F_ux(u, ux, uy), (-1, 1)) * jet.grad[0]
            if self.problem.n_space == 2:
                blk = blk + np.reshape(nl.F_uy(u, ux, uy), (-1, 1)) * jet.grad[1]
            J[rows[s * Q:(s + 1) * Q], s * M:(s + 1) * M] += scale * blk
        return J


def assemble_linear(problem, part, colloc, networks, **kw) -> LeastSquaresSystem:
    """Linear least-squares system; rejects problems with a nonlinearity."""
    if problem.is_nonlinear:
        raise AssemblyError(f"{problem.name} is nonlinear; use residual/jacobian")
    return Assembler(problem, part, colloc, networks, **kw).system


def residual(problem, part, colloc, networks, w, **kw) -> np.ndarray:
    return Assembler(problem, part, colloc, networks, **kw).residual(w)


def jacobian(problem, part, colloc, networks, w, **kw) -> np.ndarray:
    return Assembler(problem, part, colloc, networks, **kw).jacobian(w)
