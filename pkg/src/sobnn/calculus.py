"""Sobolev error measurement on tensor-product Gauss-Legendre grids.

Norms are measured, not bounded: W^{k,p} distance between two functions is
the sum over multi-indices |alpha| <= k of the L^p distance between the
corresponding derivatives, each estimated by composite Gauss-Legendre
quadrature on a cube (p < infinity) or by a dense-grid maximum (p =
infinity, a lower bound on the true sup).  Nodes carry a small per-axis
irrational offset so they never hit kink preimages of the piecewise
activations; weights are unchanged.  Reductions use numpy's pairwise
summation in a fixed order, so results are bit-stable run to run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import numpy as np

from . import _kernels
from .activations import Activation

__all__ = [
    "CallableJetSource",
    "Jet",
    "NetworkJetSource",
    "QuadratureEvalError",
    "QuadratureGrid",
    "SobolevSpec",
    "diff_quotient_error",
    "lp_error",
    "make_grid",
    "multi_indices",
    "sobolev_error",
]

# Offset unit keeping nodes off axis-aligned kink preimages; irrational so no
# rational node pattern can land back on a kink after affine layers.
_OFFSET_UNIT = math.sqrt(2.0) * 1e-7

MAX_GRID_DIM = 3


class QuadratureEvalError(ArithmeticError):
    """An integrand came back non-finite at a quadrature node."""


@dataclass(frozen=True)
class Jet:
    """Value and directional derivatives at a point: component j is d^j/dt^j."""

    components: tuple[float, ...]

    @property
    def order(self) -> int:
        return len(self.components) - 1

    def component(self, j: int) -> float:
        return self.components[j]

    @property
    def value(self) -> float:
        return self.components[0]


@dataclass(frozen=True)
class SobolevSpec:
    """Smoothness order k and integrability p (math.inf for the sup norm)."""

    k: int
    p: float

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("order k must be nonnegative")
        if not (self.p >= 1):
            raise ValueError("integrability p must satisfy p >= 1")


@dataclass(frozen=True)
class QuadratureGrid:
    """Flattened tensor-product nodes over [-B, B]^d with matching weights."""

    nodes: np.ndarray  # (npts, d)
    weights: np.ndarray  # (npts,)
    box: float
    dim: int
    panels: int
    nodes_per_panel: int

    @property
    def size(self) -> int:
        return self.nodes.shape[0]


def make_grid(box: tuple[float, int], resolution: tuple[int, int]) -> QuadratureGrid:
    """Composite Gauss-Legendre grid on [-B, B]^d.

    ``box`` is (B, d) with d <= 3; ``resolution`` is (panels per axis, nodes
    per panel).  Per-axis offsets are multiples of sqrt(2) * 1e-7, capped at
    a thousandth of the panel width, so no node sits on a kink preimage.
    """
    b, dim = float(box[0]), int(box[1])
    panels, nodes_per_panel = int(resolution[0]), int(resolution[1])
    if b <= 0:
        raise ValueError("box half-width must be positive")
    if not 1 <= dim <= MAX_GRID_DIM:
        raise ValueError(f"dimension {dim} outside [1, {MAX_GRID_DIM}]")
    if panels < 1 or nodes_per_panel < 1:
        raise ValueError("resolution must be positive")
    ref, ref_w = np.polynomial.legendre.leggauss(nodes_per_panel)
    width = 2.0 * b / panels
    centers = -b + width * (np.arange(panels) + 0.5)
    axis_nodes = (centers[:, None] + 0.5 * width * ref[None, :]).ravel()
    axis_weights = np.tile(0.5 * width * ref_w, panels)
    per_axis = []
    for axis in range(dim):
        offset = min((axis + 1) * _OFFSET_UNIT, width / 1000.0)
        per_axis.append(axis_nodes + offset)
    mesh = np.meshgrid(*per_axis, indexing="ij")
    nodes = np.ascontiguousarray(np.stack([m.ravel() for m in mesh], axis=1))
    wmesh = np.meshgrid(*([axis_weights] * dim), indexing="ij")
    weights = np.ones(nodes.shape[0])
    for wm in wmesh:
        weights = weights * wm.ravel()
    return QuadratureGrid(nodes, weights, b, dim, panels, nodes_per_panel)


def _check_finite(values: np.ndarray, grid: QuadratureGrid, label: str) -> None:
    bad = ~np.isfinite(values)
    if bad.any():
        idx = int(np.argmax(bad))
        raise QuadratureEvalError(f"{label} is non-finite at node {grid.nodes[idx]}")


def _lp_of_values(diff: np.ndarray, p: float, grid: QuadratureGrid) -> float:
    absdiff = np.abs(diff)
    if math.isinf(p):
        return float(absdiff.max())
    return float(np.sum(grid.weights * absdiff**p) ** (1.0 / p))


def lp_error(f: Callable, g: Callable, p: float, grid: QuadratureGrid) -> float:
    """L^p distance of two functions of (npts, d) point arrays."""
    fv = np.asarray(f(grid.nodes), dtype=np.float64).reshape(-1)
    gv = np.asarray(g(grid.nodes), dtype=np.float64).reshape(-1)
    if fv.shape[0] != grid.size or gv.shape[0] != grid.size:
        raise ValueError("function output length does not match grid size")
    _check_finite(fv, grid, "first function")
    _check_finite(gv, grid, "second function")
    return _lp_of_values(fv - gv, p, grid)


def multi_indices(dim: int, k: int) -> list[tuple[int, ...]]:
    """All derivative multi-indices with |alpha| <= k, ordered by total order."""
    if not 1 <= dim <= MAX_GRID_DIM:
        raise ValueError(f"dimension {dim} outside [1, {MAX_GRID_DIM}]")
    out: list[tuple[int, ...]] = []
    for total in range(k + 1):
        level = [()]
        for _ in range(dim):
            level = [t + (j,) for t in level for j in range(total - sum(t) + 1)]
        out.extend(t for t in level if sum(t) == total)
    return out


class JetSource(Protocol):
    """Anything that can report derivative values on point batches."""

    def deriv_many(self, points: np.ndarray, alphas: Sequence[tuple[int, ...]]) -> np.ndarray: ...


class CallableJetSource:
    """Adapts a plain function f(points, alpha) -> values."""

    def __init__(self, fn: Callable[[np.ndarray, tuple[int, ...]], np.ndarray]):
        self._fn = fn

    def deriv(self, points: np.ndarray, alpha: tuple[int, ...]) -> np.ndarray:
        return np.asarray(self._fn(points, alpha), dtype=np.float64).reshape(-1)

    def deriv_many(self, points: np.ndarray, alphas: Sequence[tuple[int, ...]]) -> np.ndarray:
        return np.stack([self.deriv(points, a) for a in alphas])


class NetworkJetSource:
    """Derivatives of a scalar-output network realization.

    Pure-axis multi-indices come from one directional jet per axis (shared
    across orders); the lone supported mixed case, one derivative along each
    of two axes, comes from a nested first-order jet.  Deeper mixed
    derivatives are out of scope and raise.
    """

    def __init__(self, net, act: Activation):
        if net.arch.output_dim != 1:
            raise ValueError("jets are defined for scalar-output networks")
        self.net = net
        self.act = act

    def deriv_many(self, points: np.ndarray, alphas: Sequence[tuple[int, ...]]) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != self.net.arch.input_dim:
            raise ValueError(f"points must have shape (n, {self.net.arch.input_dim})")
        X = np.ascontiguousarray(points.T)
        dim = self.net.arch.input_dim
        out = np.empty((len(alphas), points.shape[0]))
        axis_order: dict[int, int] = {}
        for alpha in alphas:
            live = [i for i, a in enumerate(alpha) if a > 0]
            if len(live) > 2 or (len(live) == 2 and (alpha[live[0]] > 1 or alpha[live[1]] > 1)):
                raise ValueError(f"mixed derivative {alpha} not supported (only first-order pairs)")
            axis = live[0] if live else 0
            axis_order[axis] = max(axis_order.get(axis, 0), sum(alpha))
        cache: dict[int, np.ndarray] = {}
        for axis, order in axis_order.items():
            v = np.zeros(dim)
            v[axis] = 1.0
            cache[axis] = _kernels.jet_forward(self.net.layers, self.act.plan, X, v, order)[:, 0, :]
        for row, alpha in enumerate(alphas):
            live = [i for i, a in enumerate(alpha) if a > 0]
            if len(live) == 2:
                lanes = _kernels.cross_forward(self.net.layers, self.act.plan, X, live[0], live[1])
                out[row] = lanes[3, 0, :]
            else:
                axis = live[0] if live else 0
                order = sum(alpha)
                out[row] = cache[axis][order] * math.factorial(order)
        return out


def sobolev_error(f: JetSource, g: JetSource, spec: SobolevSpec, grid: QuadratureGrid) -> float:
    """Sum over |alpha| <= k of the L^p distance between derivatives."""
    alphas = multi_indices(grid.dim, spec.k)
    fv = f.deriv_many(grid.nodes, alphas)
    gv = g.deriv_many(grid.nodes, alphas)
    total = 0.0
    for row, alpha in enumerate(alphas):
        _check_finite(fv[row], grid, f"first function, derivative {alpha}")
        _check_finite(gv[row], grid, f"second function, derivative {alpha}")
        total += _lp_of_values(fv[row] - gv[row], spec.p, grid)
    return total


def diff_quotient_error(act: Activation, l: int, n: int, p: float, grid: QuadratureGrid) -> float:
    """L^p distance between n(rho^(l)(x + 1/n) - rho^(l)(x)) and rho^(l+1)(x)."""
    if grid.dim != 1:
        raise ValueError("difference-quotient errors are one-dimensional")
    if n < 1:
        raise ValueError("step index n must be a positive integer")
    x = grid.nodes[:, 0]
    step = 1.0 / n
    left = act.eval_jet(x, l)[l]
    shifted = act.eval_jet(x + step, l)[l]
    target = act.eval_jet(x, l + 1)[l + 1]
    quotient = n * (shifted - left)
    _check_finite(quotient, grid, "difference quotient")
    _check_finite(target, grid, "derivative")
    return _lp_of_values(quotient - target, p, grid)
