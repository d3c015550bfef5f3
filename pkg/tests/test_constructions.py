import math

import numpy as np
import pytest

from sobnn import (
    CATALOG,
    ChainedDerivativeTarget,
    ConstructionError,
    CoordinateTarget,
    NetworkJetSource,
    PairRealization,
    SobolevSpec,
    coordinate_projection_net,
    derivative_limit_sequence,
    diff_quotient_net,
    diff_quotient_pair,
    find_z0,
    get_activation,
    make_grid,
    range_covering_net,
    realize,
    realize_batch,
    realize_jet,
    sobolev_error,
    total_norm,
    unbounded_limit_sequence,
)

from helpers import fd_derivative


def test_diff_quotient_net_structure():
    for n in (1, 3, 10):
        net = diff_quotient_net(n)
        assert net.arch.dims() == (1, 2, 1)
        assert total_norm(net) == n + 1.0 / n
    with pytest.raises(ValueError):
        diff_quotient_net(0)


def test_diff_quotient_net_realizes_quotient():
    xs = np.linspace(-4.0, 4.0, 23)
    for name in ("softsign", "elu", "sigmoid", "isrlu"):
        act = get_activation(name)
        for n in (1, 5, 40):
            net = diff_quotient_net(n)
            got = realize_batch(net, act, xs[None, :])[0]
            step = 1.0 / n
            expect = n * (np.array([float(act(np.float64(x + step))) for x in xs])
                          - np.array([float(act(np.float64(x))) for x in xs]))
            assert np.max(np.abs(got - expect)) <= 1e-10 * n, (name, n)


def test_diff_quotient_net_approaches_derivative():
    act = get_activation("softsign")
    xs = np.linspace(-5.0, 5.0, 20001)
    sups = []
    for n in (1, 4, 16, 64):
        got = realize_batch(diff_quotient_net(n), act, xs[None, :])[0]
        sups.append(float(np.abs(got - act.derivative(xs)).max()))
    assert all(b < a for a, b in zip(sups, sups[1:]))
    assert sups[-1] < sups[0] / 30.0


def test_diff_quotient_pair_realizes_flattening():
    for name in ("sigmoid", "tanh", "softsign"):
        act = get_activation(name)
        z0 = find_z0(act)
        rho_z0 = float(act(np.float64(z0)))
        xs = np.linspace(-5.0, 5.0, 17)
        for n in (1, 8, 64):
            net = diff_quotient_pair(act, n)
            assert net.arch.dims() == (1, 2, 1)
            got = realize_batch(net, act, xs[None, :])[0]
            expect = np.array([
                float(act(np.float64(x))) + n * float(act(np.float64(x / n + z0))) - n * rho_z0
                for x in xs
            ])
            assert np.max(np.abs(got - expect)) <= 1e-9, (name, n)


def test_pair_realization_matches_network_jets():
    act = get_activation("sigmoid")
    z0 = find_z0(act)
    for n in (1, 4, 32):
        net = diff_quotient_pair(act, n, z0)
        pair = PairRealization(act, n, z0)
        xs = np.linspace(-4.0, 4.0, 9)
        rows = pair.deriv_many(xs[:, None], [(0,), (1,), (2,), (3,)])
        for col, x in enumerate(xs):
            jet = realize_jet(net, act, [x], 0, 3)
            for order in range(4):
                scale = max(abs(jet.component(order)), 1.0)
                assert abs(jet.component(order) - rows[order, col]) <= 1e-10 * scale


def test_range_covering_net_covers_all_catalog_entries():
    b, r = 5.0, 1.0
    line = np.linspace(-b, b, 4001)
    for act in CATALOG.values():
        for d in (1, 2):
            for layers_count in (1, 2, 3):
                net = range_covering_net(act, d, layers_count, b, r)
                assert net.arch.dims() == (d,) + (1,) * layers_count
                X = np.zeros((d, line.size))
                X[0] = line
                vals = realize_batch(net, act, X)[0]
                assert vals.min() <= -r and vals.max() >= r, (act.name, d, layers_count)


def test_coordinate_target():
    tgt = CoordinateTarget(3, 2)
    pts = np.array([[0.5, -1.5, 2.0], [1.0, 3.0, -1.0]])
    rows = tgt.deriv_many(pts, [(0, 0, 0), (0, 1, 0), (1, 0, 0), (0, 0, 1), (0, 2, 0)])
    assert np.array_equal(rows[0], pts[:, 1])
    assert np.array_equal(rows[1], np.ones(2))
    assert np.array_equal(rows[2:], np.zeros((3, 2)))
    with pytest.raises(ValueError):
        CoordinateTarget(2, 3)


def test_chained_target_matches_finite_differences():
    act = get_activation("softsign")
    chain = range_covering_net(act, 1, 2, 5.0, 1.0)
    target = ChainedDerivativeTarget(act, chain)

    def rho_prime_of_chain(x):
        inner = realize(chain, act, [x])[0]
        return float(act.derivative(np.float64(inner)))

    xs = np.array([-3.2, -0.7, 1.1, 4.0])
    rows = target.deriv_many(xs[:, None], [(0,), (1,)])
    for col, x in enumerate(xs):
        assert rows[0, col] == pytest.approx(rho_prime_of_chain(x), rel=1e-13)
        fd = fd_derivative(rho_prime_of_chain, x, 1)
        assert rows[1, col] == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_chained_target_off_axis_derivatives_vanish():
    act = get_activation("sigmoid")
    chain = range_covering_net(act, 2, 2, 5.0, 1.0)
    target = ChainedDerivativeTarget(act, chain)
    pts = np.array([[0.3, -2.0], [1.0, 4.0]])
    rows = target.deriv_many(pts, [(0, 1), (1, 1), (0, 2)])
    assert np.array_equal(rows, np.zeros((3, 2)))


def test_derivative_limit_sequence_shape_and_decay():
    act = get_activation("softsign")
    net, target = derivative_limit_sequence(act, 2, 4, 5.0, 8)
    assert net.arch.dims() == (2, 1, 1, 2, 1)
    grid = make_grid((5.0, 1), (500, 2))
    spec = SobolevSpec(1, 2.0)
    errs = []
    for n in (1, 8, 64):
        net1, tgt1 = derivative_limit_sequence(act, 1, 3, 5.0, n)
        errs.append(sobolev_error(NetworkJetSource(net1, act), tgt1, spec, grid))
    assert errs[2] < errs[1] < errs[0]
    assert errs[2] < 0.2 * errs[0]
    with pytest.raises(ValueError):
        derivative_limit_sequence(act, 1, 1, 5.0, 4)


def test_projection_depth_one_is_exact():
    res = coordinate_projection_net(get_activation("tanh"), 3, 1, 2, 5.0, 1, 2.0, 0.5)
    assert res.error == 0.0 and res.scale == 0.0
    pts = np.array([[1.0, -2.0, 0.5]])
    assert realize(res.net, get_activation("tanh"), pts[0])[0] == -2.0


def test_projection_postconditions():
    act = get_activation("sigmoid")
    eps = 0.1
    res = coordinate_projection_net(act, 2, 3, 1, 5.0, 2, 2.0, eps)
    assert res.net.arch.dims() == (2, 1, 1, 1)
    assert res.error <= eps
    assert res.scale >= 1.0
    refined = make_grid((5.0, 2), (2 * res.grid.panels, res.grid.nodes_per_panel))
    err2 = sobolev_error(NetworkJetSource(res.net, act), CoordinateTarget(2, 1),
                         SobolevSpec(2, 2.0), refined)
    assert err2 <= 2.0 * eps


def test_projection_validation_and_failure():
    act = get_activation("sigmoid")
    with pytest.raises(ValueError):
        coordinate_projection_net(act, 2, 2, 3, 5.0, 1, 2.0, 0.1)
    with pytest.raises(ValueError):
        coordinate_projection_net(act, 1, 2, 1, 5.0, 1, 2.0, 0.0)
    with pytest.raises(ConstructionError) as info:
        coordinate_projection_net(act, 1, 2, 1, 5.0, 2, 2.0, 1e-12)
    assert "best error" in str(info.value)


def test_unbounded_target_values():
    act = get_activation("sigmoid")
    target_net, target, proj = unbounded_limit_sequence(act, 1, 2, 5.0, 1, 2.0, 4)
    assert target.z0 == 0.0 and target.slope == 0.25
    rows = target.deriv_many(np.array([[1.0e6]]), [(0,)])
    assert rows[0, 0] == pytest.approx(250001.0, rel=1e-12)
    # off-axis derivatives vanish in higher dimension
    _, t2, _ = unbounded_limit_sequence(act, 2, 2, 5.0, 1, 2.0, 4)
    rows2 = t2.deriv_many(np.array([[1.0, 2.0]]), [(0, 1), (1, 1)])
    assert np.array_equal(rows2, np.zeros((2, 1)))


def test_unbounded_limit_sequence_decay():
    act = get_activation("sigmoid")
    grid = make_grid((5.0, 1), (500, 2))
    spec = SobolevSpec(1, 2.0)
    errs = []
    for n in (1, 4, 16, 64):
        net, target, proj = unbounded_limit_sequence(act, 1, 3, 5.0, 1, 2.0, n)
        assert net.arch.dims() == (1, 1, 2, 1)
        assert proj.error <= 1.0 / n
        errs.append(sobolev_error(NetworkJetSource(net, act), target, spec, grid))
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 0.1 * errs[0]


def test_composition_stability():
    # replacing the exact coordinate by its projection approximation
    # perturbs the flattening pair less and less as the tolerance shrinks;
    # the block error falls 4x per scale doubling, so consecutive powers of
    # two can share one scale - step n by 4x so the tolerance binds each time
    act = get_activation("sigmoid")
    grid = make_grid((5.0, 1), (500, 2))
    spec = SobolevSpec(1, 2.0)
    errs = []
    scales = []
    for n in (2, 8, 32, 128):
        net, target, proj = unbounded_limit_sequence(act, 1, 3, 5.0, 1, 2.0, n)
        pair = PairRealization(act, n, target.z0)
        scales.append(proj.scale)
        errs.append(sobolev_error(NetworkJetSource(net, act), pair, spec, grid))
    assert all(b > a for a, b in zip(scales, scales[1:]))
    assert all(b < a for a, b in zip(errs, errs[1:]))
