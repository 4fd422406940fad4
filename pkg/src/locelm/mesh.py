"""Rectangular domain partitions and collocation point sets."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

DISTRIBUTIONS = ("uniform", "gauss-lobatto-legendre", "random")
MAX_QUADRATURE_POINTS = 100


class MeshError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DomainPartition:
    """Tensor-product split of a box into ``prod(counts)`` sub-domains.

    Sub-domains are numbered in C order over ``counts``; for ``(N_x, N_y, N_t)``
    the zero-based index of ``(m, n, l)`` is ``m*N_y*N_t + n*N_t + l``.
    """

    bounds: tuple[tuple[float, float], ...]
    counts: tuple[int, ...]
    boundary_coords: tuple[np.ndarray, ...]

    @property
    def ndim(self) -> int:
        return len(self.counts)

    @property
    def n_subdomains(self) -> int:
        return int(np.prod(self.counts))

    def multi_index(self, s: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(s, self.counts))

    def linear_index(self, idx: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(idx), self.counts))

    def element_id(self, idx: Sequence[int]) -> int:
        """One-based element number ``e``."""
        return self.linear_index(idx) + 1

    def box(self, s: int) -> np.ndarray:
        idx = self.multi_index(s)
        return np.array(
            [[c[i], c[i + 1]] for c, i in zip(self.boundary_coords, idx)]
        )

    def neighbor(self, s: int, dim: int, step: int, periodic: bool = False) -> int | None:
        idx = list(self.multi_index(s))
        idx[dim] += step
        if not 0 <= idx[dim] < self.counts[dim]:
            if not periodic:
                return None
            idx[dim] %= self.counts[dim]
        return self.linear_index(idx)

    def locate(self, points) -> np.ndarray:
        """Owning sub-domain of each point; ties on interfaces go to the lower index."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.ndim:
            raise MeshError(f"points must have {self.ndim} coordinates")
        idx = []
        for d, c in enumerate(self.boundary_coords):
            lo, hi = self.bounds[d]
            slack = 1e-12 * (hi - lo)
            col = pts[:, d]
            if np.any((col < lo - slack) | (col > hi + slack)):
                bad = int(np.flatnonzero((col < lo - slack) | (col > hi + slack))[0])
                raise MeshError(f"point {bad} lies outside the domain along axis {d}")
            i = np.searchsorted(c, col, side="left") - 1
            idx.append(np.clip(i, 0, self.counts[d] - 1))
        return np.ravel_multi_index(tuple(idx), self.counts)


def partition(bounds, counts) -> DomainPartition:
    """Uniform partition of ``bounds`` (one ``[lo, hi]`` per axis)."""
    bounds = np.asarray(bounds, dtype=float).reshape(-1, 2)
    counts = tuple(int(c) for c in np.atleast_1d(counts))
    if len(counts) != len(bounds):
        raise MeshError(f"got {len(counts)} counts for {len(bounds)} axes")
    for d, ((lo, hi), n) in enumerate(zip(bounds, counts)):
        if n < 1:
            raise MeshError(f"counts[{d}] must be >= 1, got {n}")
        if not hi > lo:
            raise MeshError(f"bounds[{d}] has non-positive extent: [{lo}, {hi}]")
    coords = []
    for (lo, hi), n in zip(bounds, counts):
        c = np.linspace(lo, hi, n + 1)
        c[0], c[-1] = lo, hi
        c.flags.writeable = False
        coords.append(c)
    return DomainPartition(
        bounds=tuple((float(lo), float(hi)) for lo, hi in bounds),
        counts=counts,
        boundary_coords=tuple(coords),
    )


def gauss_lobatto_legendre(n: int, tol: float = 1e-15, max_iter: int = 100) -> np.ndarray:
    """The ``n`` Gauss-Lobatto-Legendre nodes on ``[-1, 1]``, ascending.

    Newton iteration on ``(1 - x^2) P'_{n-1}(x)`` started from the
    Chebyshev-Gauss-Lobatto points.
    """
    if n < 2:
        raise MeshError("Gauss-Lobatto-Legendre rules need at least 2 points")
    N = n - 1
    x = -np.cos(np.pi * np.arange(n) / N)
    P = np.zeros((n, n))
    x_old = np.full_like(x, 2.0)
    for _ in range(max_iter):
        if np.max(np.abs(x - x_old)) <= tol:
            break
        x_old = x.copy()
        P[:, 0] = 1.0
        P[:, 1] = x
        for k in range(2, n):
            P[:, k] = ((2 * k - 1) * x * P[:, k - 1] - (k - 1) * P[:, k - 2]) / k
        x = x_old - (x * P[:, N] - P[:, N - 1]) / (n * P[:, N])
    x[0], x[-1] = -1.0, 1.0
    if n % 2 == 1:
        x[N // 2] = 0.0
    # enforce exact symmetry
    x = 0.5 * (x - x[::-1])
    return x


def _direction_nodes(lo: float, hi: float, q: int, distribution: str, rng) -> np.ndarray:
    if distribution == "uniform":
        ref = np.linspace(-1.0, 1.0, q)
    elif distribution == "gauss-lobatto-legendre":
        ref = gauss_lobatto_legendre(q)
    else:
        ref = np.concatenate(([-1.0], np.sort(rng.uniform(-1.0, 1.0, q - 2)), [1.0]))
    pts = lo + (ref + 1.0) * 0.5 * (hi - lo)
    pts[0], pts[-1] = lo, hi
    return pts


@dataclass(frozen=True, eq=False)
class CollocationSet:
    """Tensor-product collocation points on every sub-domain.

    ``points[s]`` has shape ``(prod(q), ndim)`` in C order over the per-axis
    node indices.  ``face(d, side)`` gives the indices of the points on the
    low (``side=0``) or high (``side=1``) face normal to axis ``d``; the same
    index array applies to every sub-domain, and the face points of two
    neighbours coincide point by point.
    """

    partition: DomainPartition
    q: tuple[int, ...]
    distribution: str
    points: tuple[np.ndarray, ...]

    @property
    def points_per_subdomain(self) -> int:
        return int(np.prod(self.q))

    @property
    def total_points(self) -> int:
        return self.points_per_subdomain * self.partition.n_subdomains

    @cached_property
    def _faces(self) -> dict[tuple[int, int], np.ndarray]:
        grid = np.arange(self.points_per_subdomain).reshape(self.q)
        faces = {}
        for d, qd in enumerate(self.q):
            faces[(d, 0)] = np.take(grid, 0, axis=d).ravel()
            faces[(d, 1)] = np.take(grid, qd - 1, axis=d).ravel()
        return faces

    def face(self, dim: int, side: int) -> np.ndarray:
        return self._faces[(dim, side)]

    def face_points(self, s: int, dim: int, side: int) -> np.ndarray:
        return self.points[s][self.face(dim, side)]

    def on_domain_boundary(self, s: int, dim: int, side: int) -> bool:
        i = self.partition.multi_index(s)[dim]
        return i == (0 if side == 0 else self.partition.counts[dim] - 1)

    def interfaces(self, dim: int) -> list[tuple[int, int]]:
        """(lower, upper) sub-domain pairs sharing a face normal to ``dim``."""
        pairs = []
        for s in range(self.partition.n_subdomains):
            n = self.partition.neighbor(s, dim, +1)
            if n is not None:
                pairs.append((s, n))
        return pairs


def collocation(part: DomainPartition, q_per_direction, distribution: str = "uniform",
                seed=0) -> CollocationSet:
    """Collocation points for every sub-domain of ``part``.

    ``"uniform"`` and ``"gauss-lobatto-legendre"`` place ``q`` nodes per axis
    including both end points.  ``"random"`` draws the per-axis face nodes at
    random (shared between sub-domains in the same slab so interface points
    still coincide) and replaces every point off the sub-domain boundary by a
    uniformly random interior point.
    """
    if distribution not in DISTRIBUTIONS:
        raise MeshError(f"unknown distribution {distribution!r}; choose from {DISTRIBUTIONS}")
    q = tuple(int(v) for v in np.atleast_1d(q_per_direction))
    if len(q) == 1 and part.ndim > 1:
        q = q * part.ndim
    if len(q) != part.ndim:
        raise MeshError(f"got {len(q)} point counts for {part.ndim} axes")
    if any(v < 2 for v in q):
        raise MeshError(f"need at least 2 collocation points per direction, got {q}")
    if distribution == "gauss-lobatto-legendre" and max(q) > MAX_QUADRATURE_POINTS:
        raise MeshError(
            f"quadrature points are limited to {MAX_QUADRATURE_POINTS} per direction, got {max(q)}"
        )

    rng = np.random.default_rng(seed)
    axis_nodes = [
        [
            _direction_nodes(c[i], c[i + 1], qd, distribution, rng)
            for i in range(n)
        ]
        for c, n, qd in zip(part.boundary_coords, part.counts, q)
    ]
    on_face = None
    if distribution == "random":
        idx = np.indices(q).reshape(part.ndim, -1)
        on_face = np.any(
            [(idx[d] == 0) | (idx[d] == q[d] - 1) for d in range(part.ndim)], axis=0
        )

    points = []
    for s in range(part.n_subdomains):
        mi = part.multi_index(s)
        axes = [axis_nodes[d][mi[d]] for d in range(part.ndim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        if on_face is not None:
            box = part.box(s)
            inner = ~on_face
            pts[inner] = rng.uniform(box[:, 0], box[:, 1], size=(int(inner.sum()), part.ndim))
        pts.flags.writeable = False
        points.append(pts)
    return CollocationSet(partition=part, q=q, distribution=distribution, points=tuple(points))
