"""Activation catalog with closed-form derivatives of every order.

Each activation knows how to evaluate its value together with all derivatives
up to a requested order in one call (``eval_jet``).  Derivatives are
closed-form per branch rather than numerical:

* sigmoid and tanh use the polynomial recurrences sigma' = sigma(1 - sigma)
  and tanh' = 1 - tanh^2, so the l-th derivative is a fixed polynomial in the
  function value,
* arctan uses the rational recurrence S_{l+1} = S_l'(1+x^2) - 2lx S_l with
  the l-th derivative equal to S_l(x) / (1+x^2)^l,
* ISRU (and the negative branch of ISRLU) uses polynomials times powers of
  (1 + a x^2)^{-1/2},
* ELU, softsign, ReLU and the identity have direct per-branch formulas.

Functions with a kink (ReLU at 0; higher orders of ELU, softsign and ISRLU
at 0) evaluate the right-hand branch at the kink itself.  Quadrature grids
elsewhere in the package avoid kink preimages, so integral estimates never
depend on this convention; pointwise jets at the kink do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Activation",
    "CATALOG",
    "DegenerateActivationError",
    "MAX_DERIV_ORDER",
    "eval_jet_plan",
    "get_activation",
    "find_z0",
]

# Highest derivative order served by closed forms.  Order-(k+1) data is
# needed to differentiate an order-k jet with respect to parameters, and the
# package uses k <= 4 throughout, so 8 leaves ample headroom.
MAX_DERIV_ORDER = 8

# Branch-dispatch ids shared with the compiled kernels.  Values are part of
# the kernel ABI; append only.
KIND_LINEAR = 0
KIND_RELU = 1
KIND_ELU = 2
KIND_SOFTSIGN = 3
KIND_ISRLU = 4
KIND_ISRU = 5
KIND_SIGMOID = 6
KIND_TANH = 7
KIND_ARCTAN = 8

# Table row width: polynomial degree never exceeds order + 1.
_TABLE_COLS = MAX_DERIV_ORDER + 2


class DegenerateActivationError(ValueError):
    """Raised when an activation cannot serve the requested construction."""


def _poly_derivative(coeffs: np.ndarray) -> np.ndarray:
    out = np.zeros_like(coeffs)
    for j in range(1, coeffs.size):
        out[j - 1] = j * coeffs[j]
    return out


def _poly_mul_trunc(p: np.ndarray, q: np.ndarray, width: int) -> np.ndarray:
    full = np.convolve(p, q)
    out = np.zeros(width)
    keep = min(width, full.size)
    out[:keep] = full[:keep]
    return out


def _sigmoid_table() -> np.ndarray:
    # Row l holds the coefficients of Q_l with sigma^{(l)} = Q_l(sigma);
    # Q_0(t) = t and Q_{l+1} = Q_l' * (t - t^2).
    tab = np.zeros((MAX_DERIV_ORDER + 1, _TABLE_COLS))
    tab[0, 1] = 1.0
    gen = np.zeros(_TABLE_COLS)
    gen[1], gen[2] = 1.0, -1.0
    for l in range(MAX_DERIV_ORDER):
        tab[l + 1] = _poly_mul_trunc(_poly_derivative(tab[l]), gen, _TABLE_COLS)
    return tab


def _tanh_table() -> np.ndarray:
    # tanh^{(l)} = R_l(tanh) with R_0(t) = t and R_{l+1} = R_l' * (1 - t^2).
    tab = np.zeros((MAX_DERIV_ORDER + 1, _TABLE_COLS))
    tab[0, 1] = 1.0
    gen = np.zeros(_TABLE_COLS)
    gen[0], gen[2] = 1.0, -1.0
    for l in range(MAX_DERIV_ORDER):
        tab[l + 1] = _poly_mul_trunc(_poly_derivative(tab[l]), gen, _TABLE_COLS)
    return tab


def _arctan_table() -> np.ndarray:
    # arctan^{(l)}(x) = S_l(x) / (1+x^2)^l for l >= 1, S_1 = 1 and
    # S_{l+1} = S_l' * (1+x^2) - 2 l x S_l.  Row 0 is unused (value is atan).
    tab = np.zeros((MAX_DERIV_ORDER + 1, _TABLE_COLS))
    tab[1, 0] = 1.0
    u = np.zeros(_TABLE_COLS)
    u[0], u[2] = 1.0, 1.0
    x = np.zeros(_TABLE_COLS)
    x[1] = 1.0
    for l in range(1, MAX_DERIV_ORDER):
        tab[l + 1] = _poly_mul_trunc(_poly_derivative(tab[l]), u, _TABLE_COLS)
        tab[l + 1] -= 2.0 * l * _poly_mul_trunc(x, tab[l], _TABLE_COLS)
    return tab


def _isru_table(a: float) -> np.ndarray:
    # ISRU^{(l)}(x) = P_l(x) * (1+a x^2)^{-(2l+1)/2} with P_0 = x and
    # P_{l+1} = P_l' * (1+a x^2) - (2l+1) a x P_l.
    tab = np.zeros((MAX_DERIV_ORDER + 1, _TABLE_COLS))
    tab[0, 1] = 1.0
    u = np.zeros(_TABLE_COLS)
    u[0], u[2] = 1.0, a
    ax = np.zeros(_TABLE_COLS)
    ax[1] = a
    for l in range(MAX_DERIV_ORDER):
        tab[l + 1] = _poly_mul_trunc(_poly_derivative(tab[l]), u, _TABLE_COLS)
        tab[l + 1] -= (2 * l + 1) * _poly_mul_trunc(ax, tab[l], _TABLE_COLS)
    return tab


def _polyval_rows(tab: np.ndarray, t: np.ndarray, rows) -> np.ndarray:
    """Horner-evaluate table rows at ``t``; returns (len(rows), *t.shape)."""
    out = np.empty((len(rows),) + t.shape)
    for i, l in enumerate(rows):
        acc = np.full_like(t, tab[l, _TABLE_COLS - 1])
        for j in range(_TABLE_COLS - 2, -1, -1):
            acc = acc * t + tab[l, j]
        out[i] = acc
    return out


def eval_jet_plan(kind: int, a: float, table: np.ndarray, x, order: int) -> np.ndarray:
    """Value and derivatives through ``order``, dispatched on a kernel plan.

    Shared by ``Activation.eval_jet`` and the pure-python compute backend so
    both see identical branch arithmetic.  Returns (order+1,) + shape(x);
    slot l is the l-th derivative.
    """
    if not 0 <= order <= MAX_DERIV_ORDER:
        raise ValueError(f"derivative order {order} outside [0, {MAX_DERIV_ORDER}]")
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros((order + 1,) + x.shape)
    if kind == KIND_LINEAR:
        out[0] = x
        if order >= 1:
            out[1] = 1.0
    elif kind == KIND_RELU:
        pos = x >= 0.0
        out[0] = np.where(pos, x, 0.0)
        if order >= 1:
            out[1] = np.where(pos, 1.0, 0.0)
    elif kind == KIND_ELU:
        pos = x >= 0.0
        ex = np.exp(np.where(pos, 0.0, x))
        out[0] = np.where(pos, x, ex - 1.0)
        if order >= 1:
            out[1] = np.where(pos, 1.0, ex)
        for l in range(2, order + 1):
            out[l] = np.where(pos, 0.0, ex)
    elif kind == KIND_SOFTSIGN:
        pos = x >= 0.0
        w = np.where(pos, 1.0 + x, 1.0 - x)
        out[0] = x / w
        pw = w * w
        sign = 1.0
        for l in range(1, order + 1):
            out[l] = np.where(pos, sign, 1.0) * (math.factorial(l) / pw)
            pw = pw * w
            sign = -sign
    elif kind in (KIND_ISRU, KIND_ISRLU):
        u = 1.0 + a * x * x
        w = 1.0 / np.sqrt(u)
        vals = _polyval_rows(table, x, range(order + 1))
        wp = w.copy()
        vals[0] *= wp
        for l in range(1, order + 1):
            wp = wp * (w * w)
            vals[l] *= wp
        if kind == KIND_ISRU:
            out[:] = vals
        else:
            pos = x >= 0.0
            out[0] = np.where(pos, x, vals[0])
            if order >= 1:
                out[1] = np.where(pos, 1.0, vals[1])
            for l in range(2, order + 1):
                out[l] = np.where(pos, 0.0, vals[l])
    elif kind == KIND_SIGMOID:
        ex = np.exp(-np.abs(x))
        t = np.where(x >= 0.0, 1.0 / (1.0 + ex), ex / (1.0 + ex))
        out[:] = _polyval_rows(table, t, range(order + 1))
    elif kind == KIND_TANH:
        t = np.tanh(x)
        out[:] = _polyval_rows(table, t, range(order + 1))
    elif kind == KIND_ARCTAN:
        out[0] = np.arctan(x)
        if order >= 1:
            w = 1.0 / (1.0 + x * x)
            vals = _polyval_rows(table, x, range(1, order + 1))
            wp = np.ones_like(x)
            for l in range(1, order + 1):
                wp = wp * w
                out[l] = vals[l - 1] * wp
    else:  # pragma: no cover - catalog is closed
        raise ValueError(f"unknown activation kind {kind}")
    return out


@dataclass(frozen=True)
class Activation:
    """One catalog entry: the function plus everything known about it.

    ``smoothness`` is the largest m with the function in C^m(R); ``None``
    means real-analytic.  ``sup_abs`` bounds |value| on all of R when the
    function is bounded.  ``deriv_sup`` maps derivative order to its exact
    global sup-norm where a closed form is known.
    """

    name: str
    kind: int
    a: float = 0.0
    smoothness: int | None = None
    bounded: bool = False
    sup_abs: float | None = None
    deriv_sup: dict[int, float] = field(default_factory=dict)
    table: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)), repr=False)

    def eval_jet(self, x, order: int) -> np.ndarray:
        """Value and derivatives through ``order`` at ``x``.

        Returns an array of shape (order+1,) + shape(x); slot l is the l-th
        derivative (slot 0 the value).  At a kink the right-hand branch is
        used.
        """
        return eval_jet_plan(self.kind, self.a, self.table, x, order)

    def __call__(self, x):
        return self.eval_jet(x, 0)[0]

    def derivative(self, x, order: int = 1):
        return self.eval_jet(x, order)[order]

    def second_derivative_sup(self, lo: float, hi: float, samples: int = 200001) -> float:
        """Grid estimate of sup |rho''| over [lo, hi] (lower bound on the sup)."""
        grid = np.linspace(lo, hi, samples)
        return float(np.abs(self.eval_jet(grid, 2)[2]).max())

    @property
    def plan(self) -> tuple[int, float, np.ndarray]:
        """Kernel dispatch triple (kind, shape parameter, coefficient table)."""
        tab = self.table if self.table.size else np.zeros((MAX_DERIV_ORDER + 1, _TABLE_COLS))
        return self.kind, self.a, np.ascontiguousarray(tab)


def _catalog() -> dict[str, Activation]:
    sq3 = math.sqrt(3.0)
    entries = [
        Activation("linear", KIND_LINEAR, smoothness=None, deriv_sup={1: 1.0}),
        Activation("relu", KIND_RELU, smoothness=0, deriv_sup={1: 1.0}),
        Activation("elu", KIND_ELU, smoothness=1, deriv_sup={1: 1.0, 2: 1.0}),
        Activation(
            "softsign",
            KIND_SOFTSIGN,
            smoothness=1,
            bounded=True,
            sup_abs=1.0,
            deriv_sup={1: 1.0, 2: 2.0},
        ),
        Activation("isrlu", KIND_ISRLU, a=1.0, smoothness=2, deriv_sup={1: 1.0}, table=_isru_table(1.0)),
        Activation(
            "isru",
            KIND_ISRU,
            a=1.0,
            smoothness=None,
            bounded=True,
            sup_abs=1.0,
            deriv_sup={1: 1.0},
            table=_isru_table(1.0),
        ),
        Activation(
            "sigmoid",
            KIND_SIGMOID,
            smoothness=None,
            bounded=True,
            sup_abs=1.0,
            deriv_sup={1: 0.25, 2: 1.0 / (6.0 * sq3)},
            table=_sigmoid_table(),
        ),
        Activation(
            "tanh",
            KIND_TANH,
            smoothness=None,
            bounded=True,
            sup_abs=1.0,
            deriv_sup={1: 1.0, 2: 4.0 / (3.0 * sq3)},
            table=_tanh_table(),
        ),
        Activation(
            "arctan",
            KIND_ARCTAN,
            smoothness=None,
            bounded=True,
            sup_abs=math.pi / 2.0,
            deriv_sup={1: 1.0, 2: 3.0 * sq3 / 8.0},
            table=_arctan_table(),
        ),
    ]
    return {e.name: e for e in entries}


CATALOG: dict[str, Activation] = _catalog()


def get_activation(name: str, a: float | None = None) -> Activation:
    """Look up a catalog entry, optionally overriding the shape parameter."""
    key = name.strip().lower()
    if key not in CATALOG:
        raise KeyError(f"unknown activation {name!r}; have {sorted(CATALOG)}")
    act = CATALOG[key]
    if a is not None and act.kind in (KIND_ISRU, KIND_ISRLU):
        if a <= 0.0:
            raise ValueError("ISRU/ISRLU shape parameter must be positive")
        return Activation(
            act.name,
            act.kind,
            a=a,
            smoothness=act.smoothness,
            bounded=act.bounded,
            sup_abs=(1.0 / math.sqrt(a)) if act.kind == KIND_ISRU else None,
            deriv_sup={1: 1.0},
            table=_isru_table(a),
        )
    return act


def find_z0(act: Activation, lo: float = -10.0, hi: float = 10.0, step: float = 1e-3) -> float:
    """Grid point in [lo, hi] maximizing |rho'| (first hit wins on ties)."""
    n_lo = int(round(lo / step))
    n_hi = int(round(hi / step))
    grid = np.arange(n_lo, n_hi + 1, dtype=np.float64) * step
    slopes = np.abs(act.eval_jet(grid, 1)[1])
    if float(slopes.max()) <= 0.0:
        raise DegenerateActivationError(f"{act.name} has vanishing derivative on [{lo}, {hi}]")
    return float(grid[int(np.argmax(slopes))])
