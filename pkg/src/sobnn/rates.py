"""Convergence-rate bounds for the difference-quotient approximation of rho'.

For each supported activation the W^{1,p} distance between the realized
quotient n (rho(x + 1/n) - rho(x)) and rho' on an interval decays like K/n,
with K explicit.  ELU and softsign admit exact piecewise error formulas;
activations with a continuous second derivative get the generic bound
sup|rho''| / (2n) (times |interval|^(1/p) for finite p), where the sup runs
over the interval widened by one unit to the right so it contains every
shifted argument x + 1/n.  Since the quotient net's total norm is n + 1/n,
any K/n bound doubles into a 2K / total-norm bound.

ReLU is excluded: its quotient error is a plateau of height ~1 near the
kink, so the sup distance never decays and the L^p distance decays at a
different rate than 1/n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .activations import Activation
from .calculus import QuadratureGrid, make_grid
from .constructions import diff_quotient_net
from .networks import realize_batch, total_norm

__all__ = [
    "RateBound",
    "RateRecord",
    "UnsupportedRateError",
    "bound_constant",
    "elu_quotient_error",
    "fit_decay_slope",
    "softsign_quotient_error",
    "verify_rate",
]


class UnsupportedRateError(ValueError):
    """No 1/n rate statement is available for this activation."""


@dataclass(frozen=True)
class RateBound:
    """Coefficient K of an error bound K/n on a fixed symmetric interval."""

    act_name: str
    p: float
    b: float
    coefficient: float
    case: str

    def bound(self, n: int) -> float:
        return self.coefficient / n

    @property
    def norm_coefficient(self) -> float:
        """C with error <= C / total_norm; the quotient net's norm is < 2n."""
        return 2.0 * self.coefficient


@dataclass(frozen=True)
class RateRecord:
    n: int
    net_norm: float
    measured: float
    bound: float
    passed: bool


def bound_constant(act: Activation, p: float, b: float = 5.0) -> RateBound:
    """Rate coefficient K for the interval [-b, b] and exponent p.

    Softsign and ELU use their sharp closed-form constants; any activation
    that is at least twice continuously differentiable falls back to the
    second-derivative bound.  ReLU has no 1/n rate and is rejected.
    """
    if b <= 0:
        raise ValueError("interval half-width must be positive")
    if not (p == math.inf or p >= 1):
        raise ValueError(f"exponent p must be in [1, inf], got {p}")
    if act.name == "relu":
        raise UnsupportedRateError("relu's quotient error has a unit-height plateau; no 1/n rate")
    if act.name == "softsign":
        if p == math.inf:
            return RateBound(act.name, p, b, 64.0 / 27.0, "softsign-exact")
        k = ((2.0 + 2.0 * (64.0 / 27.0) ** p) / (3.0 * p - 1.0)) ** (1.0 / p)
        return RateBound(act.name, p, b, k, "softsign-exact")
    if act.name == "elu":
        if p == math.inf:
            return RateBound(act.name, p, b, 1.0, "elu-exact")
        k = (1.0 / (p + 1.0) + 1.0 / (2.0**p * p)) ** (1.0 / p)
        return RateBound(act.name, p, b, k, "elu-exact")
    if act.smoothness is not None and act.smoothness < 2:
        raise UnsupportedRateError(f"{act.name} lacks a continuous second derivative")
    sup2 = act.second_derivative_sup(-b, b + 1.0)
    k = sup2 / 2.0
    if p != math.inf:
        k *= (2.0 * b) ** (1.0 / p)
    return RateBound(act.name, p, b, k, "second-derivative")


def verify_rate(
    act: Activation,
    p: float,
    b: float,
    ns: list[int],
    grid: QuadratureGrid | None = None,
    tol: float = 1e-6,
) -> list[RateRecord]:
    """Measure realized quotient nets against the K/n bound on [-b, b].

    Each record compares the L^p distance between the realized two-layer net
    and rho' with ``bound(n) + tol``; the measurement goes through the same
    evaluation path as any other network, not through the error formulas.
    For the sup norm the default sample is a dense uniform grid, fine enough
    to resolve the error peak of width ~1/n next to a kink for n up to ~10^3.
    """
    rb = bound_constant(act, p, b)
    if p == math.inf:
        xs = np.linspace(-b, b, 200001) if grid is None else grid.nodes[:, 0]
        weights = None
    else:
        if grid is None:
            grid = make_grid((b, 1), (2000, 2))
        xs = grid.nodes[:, 0]
        weights = grid.weights
    deriv = act.derivative(xs)
    records = []
    for n in ns:
        net = diff_quotient_net(n)
        realized = realize_batch(net, act, xs[None, :])[0]
        if weights is None:
            measured = float(np.abs(realized - deriv).max())
        else:
            measured = float((weights @ np.abs(realized - deriv) ** p) ** (1.0 / p))
        bound = rb.bound(n)
        records.append(RateRecord(n, total_norm(net), measured, bound, measured <= bound + tol))
    return records


def elu_quotient_error(x: np.ndarray, n: int) -> np.ndarray:
    """Pointwise |quotient - rho'| for ELU, from the piecewise closed form.

    Identically zero on x >= 0, where both branches are affine.
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    mid = (x >= -1.0 / n) & (x < 0.0)
    xm = x[mid]
    out[mid] = np.abs((n + 1.0) * (1.0 - np.exp(xm)) + n * xm)
    left = x < -1.0 / n
    out[left] = np.exp(x[left]) * abs(n * math.expm1(1.0 / n) - 1.0)
    return out


def softsign_quotient_error(x: np.ndarray, n: int) -> np.ndarray:
    """Pointwise |quotient - rho'| for softsign, from the piecewise closed form."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    step = 1.0 / n
    right = x >= 0.0
    xr = x[right]
    out[right] = 1.0 / (n * (1.0 + xr + step) * (1.0 + xr) ** 2)
    mid = (x >= -step) & (x < 0.0)
    xm = x[mid]
    q = 2.0 * n * xm**3 + 2.0 * (1.0 - n) * xm**2 - 4.0 * xm - step
    out[mid] = np.abs(q) / ((1.0 + xm + step) * (1.0 - xm) ** 2)
    left = x < -step
    xl = x[left]
    out[left] = 1.0 / (n * (1.0 - xl - step) * (1.0 - xl) ** 2)
    return out


def fit_decay_slope(norms: np.ndarray, errors: np.ndarray) -> float:
    """Least-squares slope of log(error) against log(network norm)."""
    norms = np.asarray(norms, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    if norms.shape != errors.shape or norms.size < 2:
        raise ValueError("need two or more (norm, error) pairs")
    if np.any(norms <= 0.0) or np.any(errors <= 0.0):
        raise ValueError("log-log regression needs positive norms and errors")
    lx = np.log(norms)
    ly = np.log(errors)
    lx = lx - lx.mean()
    if float(lx @ lx) == 0.0:
        raise ValueError("norms are all equal; slope is undefined")
    return float((lx @ (ly - ly.mean())) / (lx @ lx))
