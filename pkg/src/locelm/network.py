"""Local extreme learning machines.

Each sub-domain carries a small feed-forward tanh network whose hidden
weights and biases are drawn once, uniformly on ``[-r_m, r_m]``, and never
change.  Only the bias-free linear output layer (``output_weights``) is
trained.  Inputs pass through a fixed affine map that sends the sub-domain
box onto ``[-1, 1]^d``.

Derivatives of the last-hidden-layer features are obtained by propagating
forward-mode jets (value, first and pure second derivative per input
direction) through the layers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Relative (to box extent) slack for points sitting on the box boundary.
BOX_TOLERANCE = 1e-12


class DomainError(ValueError):
    """A point lies outside a network's sub-domain box."""


@dataclass
class FeatureJet:
    """Last-hidden-layer features and their derivatives at a set of points.

    ``values`` has shape ``(n_points, M)``. ``grad[d]`` and ``second[d]`` hold
    the first and pure second derivatives with respect to physical input
    ``d``, with the same shape.
    """

    values: np.ndarray
    grad: list[np.ndarray]
    second: list[np.ndarray]


@dataclass(eq=False)
class LocalNetwork:
    input_dim: int
    hidden_widths: tuple[int, ...]
    hidden_weights: tuple[np.ndarray, ...]
    hidden_biases: tuple[np.ndarray, ...]
    box: np.ndarray  # (input_dim, 2) lower/upper corner per input
    r_m: float
    output_weights: np.ndarray | None = None

    def __post_init__(self):
        if self.output_weights is None:
            self.output_weights = np.zeros(self.n_features)

    @property
    def n_features(self) -> int:
        return self.hidden_widths[-1]

    @property
    def scale(self) -> np.ndarray:
        """Per-input slope of the affine normalisation."""
        lo, hi = self.box[:, 0], self.box[:, 1]
        return 2.0 / (hi - lo)

    @property
    def shift(self) -> np.ndarray:
        lo = self.box[:, 0]
        return -1.0 - lo * self.scale

    def normalize(self, points) -> np.ndarray:
        """Map physical points into ``[-1, 1]^d``; corners land on exactly +-1."""
        pts = _as_points(points, self.input_dim)
        lo, hi = self.box[:, 0], self.box[:, 1]
        width = hi - lo
        slack = BOX_TOLERANCE * width
        bad = np.any((pts < lo - slack) | (pts > hi + slack), axis=1)
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise DomainError(
                f"point {i} ({pts[i].tolist()}) lies outside the sub-domain box "
                f"{self.box.tolist()}"
            )
        pts = np.clip(pts, lo, hi)
        return (pts - lo) * 2.0 / width - 1.0

    def fingerprint(self) -> int:
        """Hash of the fixed hidden coefficients."""
        return hash(
            b"".join(w.tobytes() for w in self.hidden_weights)
            + b"".join(b.tobytes() for b in self.hidden_biases)
        )


def _as_points(points, input_dim: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1) if input_dim == 1 else pts.reshape(1, -1)
    if pts.ndim != 2 or pts.shape[1] != input_dim:
        raise DomainError(
            f"expected points of shape (n, {input_dim}), got {np.shape(points)}"
        )
    return pts


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def new_local_network(
    input_dim: int,
    hidden_widths: Sequence[int],
    r_m: float,
    seed,
    subdomain_box,
) -> LocalNetwork:
    """Build a local network with fixed random hidden layers.

    Parameters
    ----------
    input_dim : int
        Number of inputs, 1 to 3.
    hidden_widths : sequence of int
        Width of every hidden layer; the last one is the number of trainable
        output weights ``M``.
    r_m : float
        Hidden weights and biases are drawn uniformly on ``[-r_m, r_m]``.
    seed : int, sequence of int or numpy Generator
        Seed for the generator (numpy PCG64).  Coefficients are drawn layer
        by layer, weights before biases.
    subdomain_box : array_like
        ``[lo, hi]`` for a 1-input network, otherwise shape ``(input_dim, 2)``.
    """
    if input_dim not in (1, 2, 3):
        raise ValueError(f"input_dim must be 1, 2 or 3, got {input_dim}")
    widths = tuple(int(w) for w in hidden_widths)
    if not widths or any(w < 1 for w in widths):
        raise ValueError(f"hidden_widths must be non-empty positive integers, got {hidden_widths}")
    if not r_m > 0:
        raise ValueError(f"r_m must be positive, got {r_m}")
    box = np.array(subdomain_box, dtype=float).reshape(-1, 2)
    if box.shape != (input_dim, 2):
        raise ValueError(
            f"subdomain_box must have {input_dim} [lo, hi] pairs, got shape {box.shape}"
        )
    if np.any(box[:, 1] <= box[:, 0]):
        raise ValueError(f"subdomain_box has non-positive extent: {box.tolist()}")

    rng = _rng(seed)
    weights, biases = [], []
    fan_in = input_dim
    for w in widths:
        W = rng.uniform(-r_m, r_m, size=(fan_in, w))
        b = rng.uniform(-r_m, r_m, size=w)
        W.flags.writeable = False
        b.flags.writeable = False
        weights.append(W)
        biases.append(b)
        fan_in = w
    box.flags.writeable = False
    return LocalNetwork(
        input_dim=input_dim,
        hidden_widths=widths,
        hidden_weights=tuple(weights),
        hidden_biases=tuple(biases),
        box=box,
        r_m=float(r_m),
    )


def feature_jet(net: LocalNetwork, points) -> FeatureJet:
    """Evaluate the last hidden layer and its first/second derivatives."""
    xh = net.normalize(points)
    n, d = xh.shape
    # Jets over normalised inputs; the input layer has unit derivatives.
    val = xh
    grad = [np.zeros((n, d)) for _ in range(d)]
    sec = [np.zeros((n, d)) for _ in range(d)]
    for k in range(d):
        grad[k][:, k] = 1.0

    for W, b in zip(net.hidden_weights, net.hidden_biases):
        z = val @ W + b
        dz = [g @ W for g in grad]
        d2z = [s @ W for s in sec]
        t = np.tanh(z)
        s1 = 1.0 - t * t
        s2 = -2.0 * t * s1
        val = t
        grad = [s1 * dzk for dzk in dz]
        sec = [s2 * dzk * dzk + s1 * d2zk for dzk, d2zk in zip(dz, d2z)]

    scale = net.scale
    grad = [scale[k] * grad[k] for k in range(d)]
    sec = [scale[k] ** 2 * sec[k] for k in range(d)]
    return FeatureJet(values=val, grad=grad, second=sec)


def evaluate(net: LocalNetwork, points) -> np.ndarray:
    """Network output ``sum_j V_j(x) w_j`` at the given points."""
    xh = net.normalize(points)
    h = xh
    for W, b in zip(net.hidden_weights, net.hidden_biases):
        h = np.tanh(h @ W + b)
    return h @ net.output_weights


def set_output_weights(net: LocalNetwork, w) -> LocalNetwork:
    """Replace the trainable output weights in place and return the network."""
    w = np.array(w, dtype=float).ravel()
    if w.shape != (net.n_features,):
        raise ValueError(
            f"expected {net.n_features} output weights, got {w.size}"
        )
    net.output_weights = w
    return net
