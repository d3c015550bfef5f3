"""Training under discrete Sobolev losses, with norm tracking.

The loss on a batch X of uniform samples is the mean over X of the summed
squared derivative mismatches up to order k: an empirical W^{k,2} squared
distance.  Gradients are exact: every derivative of the realization that
enters the loss is produced by the jet kernels, and the matching
vector-Jacobian products propagate the residual cotangents back to the
parameters.  The optimizer is plain bias-corrected Adam, pure functions of
(parameters, gradient, state).

Each trial draws its own target, initialization, and batch stream from a
counter-based generator keyed by (seed, trial, channel), so runs reproduce
bit-for-bit regardless of execution order, and clamped/unclamped pairs with
the same seed see identical data.

Per-epoch records track the pre-step batch loss, the best loss so far, and
the post-step total norm; the motivating phenomenon is visible right in
those columns: driving the Sobolev loss down drags the total norm up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from numpy.random import Generator, Philox

from . import _kernels
from .activations import Activation, get_activation
from .calculus import multi_indices
from .constructions import ActivationDerivative, CoordinateTarget
from .networks import Architecture, NeuralNetwork, network, random_init

__all__ = [
    "AdamState",
    "ExperimentResult",
    "PRESETS",
    "PiecewiseLinear",
    "PiecewiseQuadratic",
    "TrainConfig",
    "TrainingSummary",
    "TrialResult",
    "adam_step",
    "loss_gradient",
    "preset",
    "random_piecewise_linear",
    "random_piecewise_quadratic",
    "run_experiment",
    "run_trial",
    "scatter_rows",
    "sobolev_loss",
    "summary_medians",
]

_TARGET_KINDS = ("piecewise-linear", "piecewise-quadratic", "coordinate", "activation-derivative")


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function on [knots[0], knots[-1]].

    Derivatives take the slope of the segment to the right of a knot, the
    same convention the kinked activations use at zero.
    """

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.knots.ndim != 1 or self.knots.shape != self.values.shape or self.knots.size < 2:
            raise ValueError("knots and values must be equal-length vectors with at least two entries")
        if not np.all(np.diff(self.knots) > 0):
            raise ValueError("knots must be strictly increasing")

    def _segment(self, x: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.knots, x, side="right") - 1
        return np.clip(idx, 0, self.knots.size - 2)

    def deriv_many(self, points: np.ndarray, alphas: Sequence[tuple[int, ...]]) -> np.ndarray:
        x = np.asarray(points, dtype=np.float64).reshape(-1)
        out = np.zeros((len(alphas), x.size))
        slopes = np.diff(self.values) / np.diff(self.knots)
        for row, alpha in enumerate(alphas):
            j = sum(alpha)
            if j == 0:
                out[row] = np.interp(x, self.knots, self.values)
            elif j == 1:
                out[row] = slopes[self._segment(x)]
        return out


@dataclass(frozen=True)
class PiecewiseQuadratic:
    """Antiderivative of a piecewise-linear slope, zero at the left endpoint."""

    knots: np.ndarray
    slopes: np.ndarray
    heights: np.ndarray

    @classmethod
    def from_slopes(cls, knots: np.ndarray, slopes: np.ndarray) -> "PiecewiseQuadratic":
        gaps = np.diff(knots)
        heights = np.concatenate([[0.0], np.cumsum(0.5 * (slopes[:-1] + slopes[1:]) * gaps)])
        return cls(knots, slopes, heights)

    def _segment(self, x: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.knots, x, side="right") - 1
        return np.clip(idx, 0, self.knots.size - 2)

    def deriv_many(self, points: np.ndarray, alphas: Sequence[tuple[int, ...]]) -> np.ndarray:
        x = np.asarray(points, dtype=np.float64).reshape(-1)
        out = np.zeros((len(alphas), x.size))
        curv = np.diff(self.slopes) / np.diff(self.knots)
        seg = self._segment(x)
        for row, alpha in enumerate(alphas):
            j = sum(alpha)
            if j == 0:
                t = x - self.knots[seg]
                out[row] = self.heights[seg] + self.slopes[seg] * t + 0.5 * curv[seg] * t**2
            elif j == 1:
                out[row] = np.interp(x, self.knots, self.slopes)
            elif j == 2:
                out[row] = curv[seg]
        return out


def _draw_knots(rng: Generator, b: float, interior: int, min_gap: float) -> np.ndarray:
    inner = np.sort(rng.uniform(-b, b, interior))
    kept = [-b]
    for x in inner:
        if x - kept[-1] >= min_gap and b - x >= min_gap:
            kept.append(x)
    kept.append(b)
    return np.array(kept)


def random_piecewise_linear(
    rng: Generator, b: float, interior: int = 6, value_bound: float = 3.0
) -> PiecewiseLinear:
    """Random target with ``interior`` knots, gaps >= b/50, values in [-bound, bound]."""
    knots = _draw_knots(rng, b, interior, b / 50.0)
    return PiecewiseLinear(knots, rng.uniform(-value_bound, value_bound, knots.size))


def random_piecewise_quadratic(
    rng: Generator, b: float, interior: int = 6, slope_bound: float = 3.0
) -> PiecewiseQuadratic:
    """Antiderivative of a random piecewise-linear slope profile."""
    knots = _draw_knots(rng, b, interior, b / 50.0)
    return PiecewiseQuadratic.from_slopes(knots, rng.uniform(-slope_bound, slope_bound, knots.size))


@dataclass(frozen=True)
class TrainConfig:
    act_name: str
    arch: tuple[int, ...]
    k: int
    b: float
    target_kind: str
    epochs: int = 2000
    batch_size: int = 256
    lr: float = 5e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    init_scale: float = 1.0
    clamp: float | None = None
    trials: int = 10
    seed: int = 3
    interior_knots: int = 6
    value_bound: float = 3.0

    def __post_init__(self):
        if len(self.arch) < 2 or self.arch[-1] != 1:
            raise ValueError("architecture must end in one output unit")
        d = self.arch[0]
        if d < 1:
            raise ValueError("input dimension must be positive")
        if not 0 <= self.k <= (2 if d > 1 else 4):
            raise ValueError(f"order k={self.k} unsupported for input dimension {d}")
        if self.target_kind not in _TARGET_KINDS:
            raise ValueError(f"unknown target kind {self.target_kind!r}")
        if self.target_kind != "coordinate" and d != 1:
            raise ValueError(f"{self.target_kind} targets are one-dimensional")
        if self.epochs < 1 or self.batch_size < 1 or self.trials < 1:
            raise ValueError("epochs, batch size, and trials must be positive")
        if self.clamp is not None and self.clamp <= 0:
            raise ValueError("clamp bound must be positive")

    @property
    def input_dim(self) -> int:
        return self.arch[0]


# rate-softsign runs longer than the generic default: its purpose (the
# error-vs-norm scatter and the clamped-vs-free comparison) needs the run to
# reach the regime where weight growth is what buys further error decay, and
# at 2000 epochs a (1,2,1) net's norm has barely moved.
PRESETS: dict[str, TrainConfig] = {
    "elu-pwl": TrainConfig("elu", (1, 10, 1), 1, 5.0, "piecewise-linear", trials=20),
    "isrlu-pwq": TrainConfig("isrlu", (1, 10, 1), 2, 5.0, "piecewise-quadratic", trials=20),
    "sigmoid-proj": TrainConfig("sigmoid", (2, 10, 1), 2, 5.0, "coordinate", trials=10),
    "rate-softsign": TrainConfig("softsign", (1, 2, 1), 1, 5.0, "activation-derivative", epochs=10000, trials=10),
}


def preset(name: str) -> TrainConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def _make_target(cfg: TrainConfig, act: Activation, rng: Generator):
    if cfg.target_kind == "piecewise-linear":
        return random_piecewise_linear(rng, cfg.b, cfg.interior_knots, cfg.value_bound)
    if cfg.target_kind == "piecewise-quadratic":
        return random_piecewise_quadratic(rng, cfg.b, cfg.interior_knots, cfg.value_bound)
    if cfg.target_kind == "coordinate":
        return CoordinateTarget(cfg.input_dim, 1)
    return ActivationDerivative(act)


@dataclass(frozen=True)
class _LossPlan:
    alphas: tuple[tuple[int, ...], ...]
    jets: tuple[tuple[int, int, tuple[tuple[int, int], ...]], ...]  # (axis, order, ((lane, row), ...))
    crosses: tuple[tuple[int, int, int], ...]  # (axis_i, axis_j, row)


_PLAN_CACHE: dict[tuple[int, int], _LossPlan] = {}


def _loss_plan(d: int, k: int) -> _LossPlan:
    """Assign every multi-index of order <= k to a jet lane or a cross pair.

    Pure derivatives along one axis share a single directional jet; the value
    rides on axis 0's lane 0.  Mixed first-order pairs get the dedicated
    cross evaluation.  Anything else (order >= 2 in two directions at once)
    is out of scope, which caps k at 2 for multivariate inputs.
    """
    key = (d, k)
    if key in _PLAN_CACHE:
        return _PLAN_CACHE[key]
    alphas = tuple(multi_indices(d, k))
    per_axis: dict[int, list[tuple[int, int]]] = {0: []}
    crosses = []
    for row, alpha in enumerate(alphas):
        live = [ax for ax, o in enumerate(alpha) if o > 0]
        if len(live) == 0:
            per_axis[0].append((0, row))
        elif len(live) == 1:
            per_axis.setdefault(live[0], []).append((alpha[live[0]], row))
        elif len(live) == 2 and alpha[live[0]] == 1 and alpha[live[1]] == 1:
            crosses.append((live[0], live[1], row))
        else:
            raise ValueError(f"no evaluation path for mixed derivative {alpha}")
    jets = tuple(
        (axis, max(lane for lane, _ in assignments), tuple(assignments))
        for axis, assignments in sorted(per_axis.items())
    )
    plan = _LossPlan(alphas, jets, tuple(crosses))
    _PLAN_CACHE[key] = plan
    return plan


_FACT = tuple(float(math.factorial(j)) for j in range(9))


def _axis_direction(d: int, axis: int) -> np.ndarray:
    v = np.zeros(d)
    v[axis] = 1.0
    return v


def _loss_core(layers, act_plan, target, d: int, k: int, X: np.ndarray, want_grad: bool):
    plan = _loss_plan(d, k)
    rows = np.asarray(target.deriv_many(np.ascontiguousarray(X.T), plan.alphas))
    npts = X.shape[1]
    loss = 0.0
    grad = None
    for axis, order, assignments in plan.jets:
        v = _axis_direction(d, axis)
        lanes = _kernels.jet_forward(layers, act_plan, X, v, order)
        cot = np.zeros((order + 1, npts)) if want_grad else None
        for lane, row in assignments:
            r = _FACT[lane] * lanes[lane, 0] - rows[row]
            loss += float(r @ r)
            if want_grad:
                cot[lane] = (2.0 / npts) * _FACT[lane] * r
        if want_grad:
            g = _kernels.jet_vjp(layers, act_plan, X, v, order, cot)
            grad = g if grad is None else grad + g
    for axis_i, axis_j, row in plan.crosses:
        lanes = _kernels.cross_forward(layers, act_plan, X, axis_i, axis_j)
        r = lanes[3, 0] - rows[row]
        loss += float(r @ r)
        if want_grad:
            cot = np.zeros((4, npts))
            cot[3] = (2.0 / npts) * r
            g = _kernels.cross_vjp(layers, act_plan, X, axis_i, axis_j, cot)
            grad = grad + g
    return loss / npts, grad


def sobolev_loss(net: NeuralNetwork, act: Activation, target, k: int, X: np.ndarray) -> float:
    """Mean over the batch of summed squared derivative mismatches up to order k.

    ``X`` has shape (input_dim, batch); ``target`` provides closed-form rows
    through ``deriv_many``.
    """
    return _loss_core(net.layers, act.plan, target, net.arch.input_dim, k, X, False)[0]


def loss_gradient(net: NeuralNetwork, act: Activation, target, k: int, X: np.ndarray):
    """The loss and its exact parameter gradient, flattened like the parameters."""
    return _loss_core(net.layers, act.plan, target, net.arch.input_dim, k, X, True)


@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int
    lr: float
    beta1: float
    beta2: float
    eps: float

    @classmethod
    def fresh(cls, nparams: int, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        return cls(np.zeros(nparams), np.zeros(nparams), 0, lr, beta1, beta2, eps)


def adam_step(theta: np.ndarray, grad: np.ndarray, state: AdamState):
    """One bias-corrected Adam update; returns (new theta, new state)."""
    t = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    new_theta = theta - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return new_theta, replace(state, m=m, v=v, step=t)


def _param_slices(arch: Architecture):
    slices = []
    pos = 0
    dims = arch.dims()
    for l in range(arch.depth):
        rows, cols = dims[l + 1], dims[l]
        a = slice(pos, pos + rows * cols)
        pos += rows * cols
        b = slice(pos, pos + rows)
        pos += rows
        slices.append((a, (rows, cols), b))
    return slices, pos


def _layers_of(theta: np.ndarray, slices) -> list[tuple[np.ndarray, np.ndarray]]:
    return [(theta[a].reshape(shape), theta[b]) for a, shape, b in slices]


def _layers_norm(layers) -> float:
    a_max = max(float(np.abs(A).max()) for A, _ in layers)
    b_max = max(float(np.abs(b).max()) for _, b in layers)
    return a_max + b_max


@dataclass(frozen=True)
class TrialResult:
    records: np.ndarray  # columns: epoch, batch loss, best loss so far, total norm
    initial_norm: float
    net: NeuralNetwork
    diverged: bool


def run_trial(cfg: TrainConfig, trial: int) -> TrialResult:
    """One full optimization run; everything it consumes is keyed by (seed, trial)."""
    act = get_activation(cfg.act_name)
    base = cfg.seed
    target_rng = Generator(Philox(key=np.array([base, 4 * trial], dtype=np.uint64)))
    target = _make_target(cfg, act, target_rng)
    init = random_init(Architecture(cfg.arch[0], cfg.arch[1:]), base, cfg.init_scale, stream=4 * trial + 1)
    batch_rng = Generator(Philox(key=np.array([base, 4 * trial + 2], dtype=np.uint64)))

    slices, nparams = _param_slices(init.arch)
    theta = np.concatenate([np.concatenate([A.ravel(), b]) for A, b in init.layers])
    if cfg.clamp is not None:
        theta = np.clip(theta, -cfg.clamp, cfg.clamp)
    layers = _layers_of(theta, slices)
    d = cfg.input_dim
    state = AdamState.fresh(nparams, cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps)

    records = np.empty((cfg.epochs + 1, 4))
    probe = batch_rng.uniform(-cfg.b, cfg.b, size=(d, cfg.batch_size))
    loss0, _ = _loss_core(layers, act.plan, target, d, cfg.k, probe, False)
    initial_norm = _layers_norm(layers)
    records[0] = (0.0, loss0, loss0, initial_norm)
    best = loss0
    diverged = False
    rows = 1
    for epoch in range(1, cfg.epochs + 1):
        X = batch_rng.uniform(-cfg.b, cfg.b, size=(d, cfg.batch_size))
        loss, grad = _loss_core(layers, act.plan, target, d, cfg.k, X, True)
        if not (math.isfinite(loss) and np.isfinite(grad).all()):
            diverged = True
            break
        theta, state = adam_step(theta, grad, state)
        if cfg.clamp is not None:
            np.clip(theta, -cfg.clamp, cfg.clamp, out=theta)
        layers = _layers_of(theta, slices)
        best = min(best, loss)
        records[epoch] = (float(epoch), loss, best, _layers_norm(layers))
        rows = epoch + 1
    return TrialResult(records[:rows], initial_norm, network(layers), diverged)


@dataclass(frozen=True)
class ExperimentResult:
    config: TrainConfig
    trials: tuple[TrialResult, ...]
    table: np.ndarray | None  # epoch, mean loss, mean best, mean norm, norm band lo, hi
    diverged: tuple[int, ...]


def run_experiment(cfg: TrainConfig) -> ExperimentResult:
    """All trials of a configuration plus per-epoch aggregates.

    The norm band is a normal 95% interval for the mean across trials; the
    aggregate table is omitted when any trial diverged, since the trials no
    longer share a common epoch range.
    """
    trials = tuple(run_trial(cfg, t) for t in range(cfg.trials))
    diverged = tuple(t for t, r in enumerate(trials) if r.diverged)
    table = None
    if not diverged:
        stack = np.stack([r.records for r in trials])  # (trials, epochs+1, 4)
        n = stack.shape[0]
        mean = stack.mean(axis=0)
        if n > 1:
            half = 1.96 * stack[:, :, 3].std(axis=0, ddof=1) / math.sqrt(n)
        else:
            half = np.zeros(stack.shape[1])
        table = np.column_stack([
            mean[:, 0],
            mean[:, 1],
            mean[:, 2],
            mean[:, 3],
            mean[:, 3] - half,
            mean[:, 3] + half,
        ])
    return ExperimentResult(cfg, trials, table, diverged)


@dataclass(frozen=True)
class TrainingSummary:
    epoch1_loss: float
    final_best: float
    initial_norm: float
    final_norm: float


def summary_medians(result: ExperimentResult) -> TrainingSummary:
    """Across-trial medians of the gate quantities (diverged trials excluded)."""
    live = [r for r in result.trials if not r.diverged]
    if not live:
        raise RuntimeError("every trial diverged")
    return TrainingSummary(
        float(np.median([r.records[1, 1] for r in live])),
        float(np.median([r.records[-1, 2] for r in live])),
        float(np.median([r.initial_norm for r in live])),
        float(np.median([r.records[-1, 3] for r in live])),
    )


def scatter_rows(result: ExperimentResult, stride: int = 50) -> np.ndarray:
    """(trial, epoch, loss, norm) rows sampled every ``stride`` epochs plus the last."""
    if stride < 1:
        raise ValueError("stride must be positive")
    out = []
    for t, r in enumerate(result.trials):
        last = r.records.shape[0] - 1
        picks = sorted(set(range(0, last + 1, stride)) | {last})
        for e in picks:
            out.append((float(t), r.records[e, 0], r.records[e, 1], r.records[e, 3]))
    return np.array(out)
