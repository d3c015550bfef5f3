"""Explicit network constructions and their limit targets.

The central object is the difference-quotient pair: a two-layer network
realizing n * (rho(x + 1/n) - rho(x)), which tends to rho' pointwise while
its total norm stays below 2n.  Composing it with a range-covering chain
lifts the construction to d inputs and any depth; swapping the ratio the
other way (rho(x) + n * rho(x/n + z0) - n * rho(z0)) produces realizations
converging to the sum of the activation and a straight line, a function no
fixed-size network with a bounded activation can realize.  Coordinate
projections built from one nearly-linear activation window supply the depth
and input-dimension padding.

Every constructor returns plain networks; limit targets are jet sources
with closed-form derivatives, evaluated independently of the networks they
are compared against (the covering chain's own jets are the one shared
ingredient, since the target is defined through it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .activations import Activation, DegenerateActivationError, find_z0
from .calculus import (
    NetworkJetSource,
    QuadratureGrid,
    SobolevSpec,
    make_grid,
    sobolev_error,
)
from .networks import NeuralNetwork, concat, network, realize_batch

__all__ = [
    "ActivationDerivative",
    "ChainedDerivativeTarget",
    "ConstructionError",
    "CoordinateTarget",
    "PairRealization",
    "ProjectionResult",
    "UnboundedTarget",
    "coordinate_projection_net",
    "derivative_limit_sequence",
    "diff_quotient_net",
    "diff_quotient_pair",
    "range_covering_net",
    "unbounded_limit_sequence",
]

# Cap for the projection scale search; beyond this the activation window is
# numerically flat and the construction has failed.
_MAX_PROJECTION_SCALE = 1.0e12


class ConstructionError(RuntimeError):
    """A constructive search did not reach its target accuracy."""


def diff_quotient_net(n: int) -> NeuralNetwork:
    """Two-layer net realizing n * (rho(x + 1/n) - rho(x)).

    Total norm is n + 1/n < 2n, while the realization approaches rho'.
    """
    if n < 1:
        raise ValueError("step index n must be a positive integer")
    step = 1.0 / n
    return network([
        (np.array([[1.0], [1.0]]), np.array([step, 0.0])),
        (np.array([[float(n), -float(n)]]), np.array([0.0])),
    ])


def diff_quotient_pair(act: Activation, n: int, z0: float | None = None) -> NeuralNetwork:
    """Two-layer net realizing rho(x) + n * rho(x/n + z0) - n * rho(z0).

    The second unit flattens as n grows, so the realization tends to
    rho(x) + rho'(z0) x: a straight line plus the activation.
    """
    if n < 1:
        raise ValueError("step index n must be a positive integer")
    if z0 is None:
        z0 = find_z0(act)
    rho0 = float(act(np.float64(z0)))
    return network([
        (np.array([[1.0], [1.0 / n]]), np.array([0.0, z0])),
        (np.array([[1.0, float(n)]]), np.array([-n * rho0])),
    ])


def range_covering_net(act: Activation, d: int, layers_count: int, b: float, r: float) -> NeuralNetwork:
    """Width-1 chain of ``layers_count`` layers mapping [-b, b]^d onto [-r, r].

    Only the first coordinate enters.  With a single affine layer the map is
    x -> (r/b) x_1; deeper chains squeeze x_1 into a window around the point
    of steepest activation slope, re-normalize after each activation, and
    rescale at the end, growing the final scale until dense samples of the
    realized range bracket [-r, r].
    """
    if layers_count < 1:
        raise ValueError("covering chains need at least one layer")
    if b <= 0 or r <= 0:
        raise ValueError("domain and range half-widths must be positive")
    first_row = np.zeros((1, d))
    if layers_count == 1:
        first_row[0, 0] = r / b
        return network([(first_row, np.array([0.0]))])
    z0 = find_z0(act)
    window = 1.0
    lo, hi = act(np.array([z0 - window, z0 + window]))
    if not hi > lo:
        raise DegenerateActivationError(f"{act.name} is flat around its steepest point")
    first_row[0, 0] = window / b
    layers: list[tuple[np.ndarray, np.ndarray]] = [(first_row, np.array([z0]))]
    for _ in range(layers_count - 2):
        scale = 2.0 * window / (hi - lo)
        layers.append((np.array([[scale]]), np.array([z0 - scale * 0.5 * (lo + hi)])))
    final_scale = 2.0 * r / (hi - lo)
    final_bias_factor = -0.5 * (lo + hi)
    probe = np.zeros((d, 4001))
    probe[0] = np.linspace(-b, b, 4001)
    for _ in range(64):
        candidate = network(layers + [(np.array([[final_scale]]), np.array([final_scale * final_bias_factor]))])
        values = realize_batch(candidate, act, probe)[0]
        if values.min() <= -r and values.max() >= r:
            return candidate
        final_scale *= 1.0 + 2.0**-40
    raise ConstructionError(f"could not cover [-{r}, {r}] with {act.name} (range search stalled)")


class CoordinateTarget:
    """The projection x -> x_i (``i`` is 1-based)."""

    def __init__(self, d: int, i: int = 1):
        if not 1 <= i <= d:
            raise ValueError(f"coordinate {i} outside 1..{d}")
        self.d = d
        self.i = i

    def deriv_many(self, points: np.ndarray, alphas: Sequence[tuple[int, ...]]) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        out = np.zeros((len(alphas), points.shape[0]))
        unit = tuple(1 if ax == self.i - 1 else 0 for ax in range(self.d))
        for row, alpha in enumerate(alphas):
            if sum(alpha) == 0:
                out[row] = points[:, self.i - 1]
            elif tuple(alpha) == unit:
                out[row] = 1.0
        return out


class ActivationDerivative:
    """The activation's derivative rho' as a one-dimensional jet source."""

    def __init__(self, act: Activation):
        self.act = act

    def deriv_many(self, points: np.ndarray, alphas: Sequence[tuple[int, ...]]) -> np.ndarray:
        x = np.asarray(points, dtype=np.float64).reshape(-1)
        top = 1 + max(sum(a) for a in alphas)
        jets = self.act.eval_jet(x, top)
        return np.stack([jets[1 + sum(a)] for a in alphas])


def _compose_scalar_jets(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """Derivatives of g(J(x)) from derivatives of g at J and of J at x.

    Both arguments have shape (r+1, n) holding derivatives 0..r; so does the
    result.  Standard truncated-series composition.
    """
    r = outer.shape[0] - 1
    n = outer.shape[1]
    fact = [math.factorial(j) for j in range(r + 1)]
    s = np.zeros_like(inner)
    for j in range(1, r + 1):
        s[j] = inner[j] / fact[j]
    spow = np.zeros((r + 1, r + 1, n))
    spow[0, 0] = 1.0
    for l in range(1, r + 1):
        for j in range(l, r + 1):
            acc = np.zeros(n)
            for i in range(l - 1, j):
                acc += spow[l - 1, i] * s[j - i]
            spow[l, j] = acc
    out = np.zeros((r + 1, n))
    for l in range(r + 1):
        c = outer[l] / fact[l]
        for j in range(r + 1):
            out[j] += c * spow[l, j]
    for j in range(r + 1):
        out[j] *= fact[j]
    return out


class ChainedDerivativeTarget:
    """rho' composed with a scalar chain network that reads only x_1."""

    def __init__(self, act: Activation, chain: NeuralNetwork):
        if chain.arch.output_dim != 1:
            raise ValueError("chain must have scalar output")
        self.act = act
        self.chain = chain
        self._source = NetworkJetSource(chain, act)

    def deriv_many(self, points: np.ndarray, alphas: Sequence[tuple[int, ...]]) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        out = np.zeros((len(alphas), points.shape[0]))
        top = max((sum(a) for a in alphas if not any(a[1:])), default=0)
        pure = [(j,) + (0,) * (self.chain.arch.input_dim - 1) for j in range(top + 1)]
        inner = self._source.deriv_many(points, pure)
        outer = self.act.eval_jet(inner[0], top + 1)[1:]
        chained = _compose_scalar_jets(outer, inner)
        for row, alpha in enumerate(alphas):
            if any(alpha[1:]):
                continue  # the chain ignores every other coordinate
            out[row] = chained[alpha[0]]
        return out


class PairRealization:
    """Closed-form jets of rho(x) + n * rho(x/n + z0) - n * rho(z0)."""

    def __init__(self, act: Activation, n: int, z0: float):
        self.act = act
        self.n = n
        self.z0 = z0

    def deriv_many(self, points: np.ndarray, alphas: Sequence[tuple[int, ...]]) -> np.ndarray:
        x = np.asarray(points, dtype=np.float64).reshape(-1)
        top = max(sum(a) for a in alphas)
        n = float(self.n)
        base = self.act.eval_jet(x, top)
        shifted = self.act.eval_jet(x / n + self.z0, top)
        rho0 = float(self.act(np.float64(self.z0)))
        out = np.empty((len(alphas), x.shape[0]))
        for row, alpha in enumerate(alphas):
            j = sum(alpha)
            if j == 0:
                out[row] = base[0] + n * shifted[0] - n * rho0
            else:
                out[row] = base[j] + shifted[j] / n ** (j - 1)
        return out


class UnboundedTarget:
    """rho(x_1) + rho'(z0) x_1; grows without bound, unlike any realization."""

    def __init__(self, act: Activation, z0: float, d: int = 1):
        self.act = act
        self.z0 = z0
        self.d = d
        self.slope = float(act.derivative(np.float64(z0)))

    def deriv_many(self, points: np.ndarray, alphas: Sequence[tuple[int, ...]]) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        x1 = points[:, 0]
        top = max(sum(a) for a in alphas)
        jets = self.act.eval_jet(x1, top)
        out = np.zeros((len(alphas), points.shape[0]))
        for row, alpha in enumerate(alphas):
            if any(alpha[1:]):
                continue
            j = alpha[0]
            out[row] = jets[j]
            if j == 0:
                out[row] = out[row] + self.slope * x1
            elif j == 1:
                out[row] = out[row] + self.slope
        return out


def derivative_limit_sequence(
    act: Activation, d: int, depth: int, b: float, n: int, r: float = 1.0
) -> tuple[NeuralNetwork, ChainedDerivativeTarget]:
    """Element n of the sequence converging to rho' of a covering chain.

    The returned net is the difference-quotient net composed with a covering
    chain J, so it has architecture (d, 1, ..., 1, 2, 1) and realizes
    n * (rho(J(x) + 1/n) - rho(J(x))); the target is rho'(J(x)).
    """
    if depth < 2:
        raise ValueError("the sequence needs depth >= 2")
    chain = range_covering_net(act, d, depth - 1, b, r)
    net = concat(diff_quotient_net(n), chain)
    return net, ChainedDerivativeTarget(act, chain)


@dataclass(frozen=True)
class ProjectionResult:
    net: NeuralNetwork
    scale: float
    error: float
    grid: QuadratureGrid


def _projection_block(act: Activation, d: int, i: int, z0: float, scale: float) -> NeuralNetwork:
    rho0 = float(act(np.float64(z0)))
    rho1 = float(act.derivative(np.float64(z0)))
    row = np.zeros((1, d))
    row[0, i - 1] = 1.0 / scale
    return network([
        (row, np.array([z0])),
        (np.array([[scale / rho1]]), np.array([-scale * rho0 / rho1])),
    ])


def _default_projection_grid(b: float, d: int) -> QuadratureGrid:
    if d == 1:
        return make_grid((b, 1), (250, 3))
    if d == 2:
        return make_grid((b, 2), (80, 2))
    return make_grid((b, 3), (24, 2))


def coordinate_projection_net(
    act: Activation,
    d: int,
    depth: int,
    i: int,
    b: float,
    k: int,
    p: float,
    eps: float,
    grid: QuadratureGrid | None = None,
) -> ProjectionResult:
    """Depth-``depth`` width-1 net within ``eps`` of x -> x_i in W^{k,p}.

    A single layer is the exact projection.  Deeper nets squeeze the
    coordinate through the activation's steepest window, undo the distortion
    affinely, and chain that block once per extra layer; the window scale
    doubles from 1 until the measured error on ``grid`` drops below ``eps``.
    """
    if not 1 <= i <= d:
        raise ValueError(f"coordinate {i} outside 1..{d}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    target = CoordinateTarget(d, i)
    if depth == 1:
        row = np.zeros((1, d))
        row[0, i - 1] = 1.0
        net = network([(row, np.array([0.0]))])
        used = grid if grid is not None else _default_projection_grid(b, d)
        return ProjectionResult(net, 0.0, 0.0, used)
    z0 = find_z0(act)
    rho1 = float(act.derivative(np.float64(z0)))
    if abs(rho1) < 1e-12:
        raise DegenerateActivationError(f"{act.name} has no usable slope at z0 = {z0}")
    if grid is None:
        grid = _default_projection_grid(b, d)
    spec = SobolevSpec(k, p)
    scale = 1.0
    best: tuple[float, float] | None = None
    while scale <= _MAX_PROJECTION_SCALE:
        net = _projection_block(act, d, i, z0, scale)
        for _ in range(depth - 2):
            net = concat(_projection_block(act, 1, 1, z0, scale), net)
        err = sobolev_error(NetworkJetSource(net, act), target, spec, grid)
        if err <= eps:
            return ProjectionResult(net, scale, err, grid)
        if best is None or err < best[1]:
            best = (scale, err)
        scale *= 2.0
    raise ConstructionError(
        f"projection onto x_{i} with {act.name} (depth {depth}, d={d}, k={k}, p={p}) "
        f"did not reach {eps}; best error {best[1]:.3e} at scale {best[0]:.3e}"
    )


def unbounded_limit_sequence(
    act: Activation, d: int, depth: int, b: float, k: int, p: float, n: int
) -> tuple[NeuralNetwork, UnboundedTarget, ProjectionResult]:
    """Element n of the sequence converging to rho(x_1) + rho'(z0) x_1.

    The flattening pair is composed with a coordinate projection accurate to
    1/n, giving architecture (d, 1, ..., 1, 2, 1).  The limit grows without
    bound although every element is a fixed-architecture realization.
    """
    z0 = find_z0(act)
    proj = coordinate_projection_net(act, d, depth - 1, 1, b, k, p, 1.0 / n)
    net = concat(diff_quotient_pair(act, n, z0), proj.net)
    return net, UnboundedTarget(act, z0, d), proj
