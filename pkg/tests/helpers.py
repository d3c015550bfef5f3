"""Finite-difference oracles shared across test modules.

Central stencils with one Richardson step: the h^2 error term cancels, so
the estimates carry O(h^4) truncation error and stay well clear of the
1e-6 relative tolerances used against exact jet values.
"""

import numpy as np


def _central(f, x, order, h):
    if order == 1:
        return (f(x + h) - f(x - h)) / (2.0 * h)
    if order == 2:
        return (f(x + h) - 2.0 * f(x) + f(x - h)) / h**2
    if order == 3:
        return (f(x + 2 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2 * h)) / (2.0 * h**3)
    if order == 4:
        return (f(x + 2 * h) - 4.0 * f(x + h) + 6.0 * f(x) - 4.0 * f(x - h) + f(x - 2 * h)) / h**4
    raise ValueError(f"no stencil for order {order}")


def fd_derivative(f, x, order, h=None):
    """Richardson-extrapolated central difference of a scalar function."""
    if h is None:
        # balance truncation against eps/h^order roundoff
        h = 1e-3 if order <= 2 else (1e-2 if order == 3 else 2e-2)
    coarse = _central(f, x, order, h)
    fine = _central(f, x, order, h / 2.0)
    return (4.0 * fine - coarse) / 3.0


def fd_gradient(f, theta, h=1e-6):
    """Componentwise central-difference gradient of f: R^m -> R."""
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.empty_like(theta)
    for i in range(theta.size):
        bump = np.zeros_like(theta)
        bump[i] = h
        grad[i] = (f(theta + bump) - f(theta - bump)) / (2.0 * h)
    return grad


def rel_err(approx, exact, floor=1e-12):
    return abs(approx - exact) / max(abs(exact), floor)
