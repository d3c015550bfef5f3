"""Agreement between the compiled kernels and the numpy fallback.

The two implementations share semantics but not instruction order, so
comparisons allow a small relative slack while re-runs of a single backend
must be bit-identical.
"""

import numpy as np
import pytest

from sobnn import get_activation
from sobnn._kernels import BACKEND_NAME, available_backends, backend_module

HAVE_COMPILED = "compiled" in available_backends()
needs_compiled = pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernels not built")


def _net_layers(rng, dims, spread=0.9):
    layers = []
    for din, dout in zip(dims[:-1], dims[1:]):
        layers.append((rng.uniform(-spread, spread, (dout, din)),
                       rng.uniform(-spread, spread, dout)))
    return layers


def _close(a, b, tol=1e-10):
    a = np.asarray(a)
    b = np.asarray(b)
    scale = max(1.0, float(np.max(np.abs(a))))
    return float(np.max(np.abs(a - b))) / scale < tol


def test_backend_registry():
    assert "python" in available_backends()
    assert BACKEND_NAME in available_backends()
    assert backend_module("python").BACKEND_NAME == "python"
    with pytest.raises(KeyError):
        backend_module("fortran")


@needs_compiled
def test_jet_forward_agrees():
    py = backend_module("python")
    cy = backend_module("compiled")
    rng = np.random.default_rng(5)
    for name in ("sigmoid", "tanh", "elu", "softsign", "isrlu", "isru", "arctan", "relu", "linear"):
        act = get_activation(name)
        layers = _net_layers(rng, (2, 5, 4, 1))
        X = rng.uniform(-2.0, 2.0, (2, 17))
        v = rng.normal(size=2)
        for m in (0, 1, 2, 3, 4):
            a = py.jet_forward(layers, act.plan, X, v, m)
            b = cy.jet_forward(layers, act.plan, X, v, m)
            assert a.shape == b.shape == (m + 1, 1, 17)
            assert _close(a, b), (name, m)


@needs_compiled
def test_jet_vjp_agrees():
    py = backend_module("python")
    cy = backend_module("compiled")
    rng = np.random.default_rng(6)
    for name in ("sigmoid", "elu", "isrlu", "softsign"):
        act = get_activation(name)
        layers = _net_layers(rng, (1, 6, 1))
        X = rng.uniform(-3.0, 3.0, (1, 11))
        v = np.ones(1)
        for m in (0, 1, 2):
            cot = rng.normal(size=(m + 1, 11))
            a = py.jet_vjp(layers, act.plan, X, v, m, cot)
            b = cy.jet_vjp(layers, act.plan, X, v, m, cot)
            assert a.shape == b.shape
            assert _close(a, b), (name, m)


@needs_compiled
def test_cross_kernels_agree():
    py = backend_module("python")
    cy = backend_module("compiled")
    rng = np.random.default_rng(7)
    for name in ("sigmoid", "tanh", "isru"):
        act = get_activation(name)
        layers = _net_layers(rng, (3, 4, 1))
        X = rng.uniform(-1.5, 1.5, (3, 9))
        for (i, j) in ((0, 1), (0, 2), (1, 2)):
            a = py.cross_forward(layers, act.plan, X, i, j)
            b = cy.cross_forward(layers, act.plan, X, i, j)
            assert a.shape == b.shape == (4, 1, 9)
            assert _close(a, b), (name, i, j)
            cot = rng.normal(size=(4, 9))
            ga = py.cross_vjp(layers, act.plan, X, i, j, cot)
            gb = cy.cross_vjp(layers, act.plan, X, i, j, cot)
            assert _close(ga, gb), (name, i, j)


def test_single_backend_reruns_are_bitwise():
    rng = np.random.default_rng(8)
    act = get_activation("tanh")
    layers = _net_layers(rng, (2, 4, 1))
    X = rng.uniform(-2.0, 2.0, (2, 13))
    v = np.array([0.6, -0.8])
    for name in available_backends():
        mod = backend_module(name)
        first = mod.jet_forward(layers, act.plan, X, v, 3)
        again = mod.jet_forward(layers, act.plan, X, v, 3)
        assert np.array_equal(first, again), name
        cot = rng.normal(size=(4, 13))
        g1 = mod.jet_vjp(layers, act.plan, X, v, 3, cot)
        g2 = mod.jet_vjp(layers, act.plan, X, v, 3, cot)
        assert np.array_equal(g1, g2), name


@needs_compiled
def test_vjp_matches_finite_difference_of_forward_both_backends():
    # the vjp of each backend is checked against ITS OWN forward, so a shared
    # systematic error in one backend's derivatives would still be caught by
    # the cross-backend forward agreement above
    rng = np.random.default_rng(9)
    act = get_activation("sigmoid")
    layers = _net_layers(rng, (1, 3, 1))
    X = rng.uniform(-1.0, 1.0, (1, 5))
    v = np.ones(1)
    cot = rng.normal(size=(2, 5))
    h = 1e-6

    def flat(ls):
        return np.concatenate([np.concatenate([A.ravel(), b]) for A, b in ls])

    def unflat(theta):
        out, pos = [], 0
        for A, b in layers:
            A2 = theta[pos:pos + A.size].reshape(A.shape)
            pos += A.size
            b2 = theta[pos:pos + b.size]
            pos += b.size
            out.append((A2, b2))
        return out

    for name in available_backends():
        mod = backend_module(name)

        def obj(theta):
            lanes = mod.jet_forward(unflat(theta), act.plan, X, v, 1)
            return float(np.sum(cot * lanes[:, 0, :]))

        g = mod.jet_vjp(layers, act.plan, X, v, 1, cot)
        theta0 = flat(layers)
        fd = np.empty_like(theta0)
        for i in range(theta0.size):
            up = theta0.copy()
            dn = theta0.copy()
            up[i] += h
            dn[i] -= h
            fd[i] = (obj(up) - obj(dn)) / (2 * h)
        assert np.max(np.abs(fd - g)) < 1e-6, name
