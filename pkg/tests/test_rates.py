import math

import numpy as np
import pytest

from sobnn import (
    UnsupportedRateError,
    bound_constant,
    diff_quotient_net,
    elu_quotient_error,
    fit_decay_slope,
    get_activation,
    make_grid,
    realize_batch,
    softsign_quotient_error,
    verify_rate,
)

NS = (1, 2, 5, 10, 50, 100, 500, 1000)


def test_frozen_constants():
    assert bound_constant(get_activation("softsign"), math.inf).coefficient == pytest.approx(64.0 / 27.0, rel=1e-15)
    assert bound_constant(get_activation("softsign"), 1.0).coefficient == pytest.approx(91.0 / 27.0, rel=1e-14)
    assert bound_constant(get_activation("softsign"), 2.0).coefficient == pytest.approx(
        math.sqrt((2.0 + 2.0 * (64.0 / 27.0) ** 2) / 5.0), rel=1e-14)
    assert bound_constant(get_activation("elu"), math.inf).coefficient == pytest.approx(1.0, rel=1e-15)
    assert bound_constant(get_activation("elu"), 1.0).coefficient == pytest.approx(1.0, rel=1e-14)
    assert bound_constant(get_activation("elu"), 2.0).coefficient == pytest.approx(
        math.sqrt(11.0 / 24.0), rel=1e-14)
    # C^2 route: half the second-derivative sup over the stretched interval
    assert bound_constant(get_activation("sigmoid"), math.inf, 5.0).coefficient == pytest.approx(
        1.0 / (12.0 * math.sqrt(3.0)), rel=1e-6)
    assert bound_constant(get_activation("tanh"), math.inf, 5.0).coefficient == pytest.approx(
        2.0 / (3.0 * math.sqrt(3.0)), rel=1e-6)


def test_bound_and_norm_coefficient():
    rb = bound_constant(get_activation("elu"), 2.0)
    assert rb.bound(10) == pytest.approx(math.sqrt(11.0 / 24.0) / 10.0, rel=1e-14)
    assert rb.norm_coefficient == pytest.approx(2.0 * rb.coefficient, rel=1e-15)


def test_unsupported_activations():
    with pytest.raises(UnsupportedRateError):
        bound_constant(get_activation("relu"), math.inf)
    with pytest.raises(UnsupportedRateError):
        verify_rate(get_activation("relu"), math.inf, 5.0, [1, 10])


def test_sup_rate_softsign():
    records = verify_rate(get_activation("softsign"), math.inf, 5.0, NS)
    assert [r.n for r in records] == list(NS)
    for r in records:
        assert r.passed
        assert r.net_norm == r.n + 1.0 / r.n
        # the sup sits at the kink: 1/(n+1) exactly, hit by the dense grid
        assert r.measured == pytest.approx(1.0 / (r.n + 1.0), rel=1e-9)
        assert r.bound == pytest.approx(64.0 / (27.0 * r.n), rel=1e-15)


def test_sup_rate_elu_and_c2():
    for name in ("elu", "sigmoid", "tanh", "isrlu"):
        records = verify_rate(get_activation(name), math.inf, 5.0, (1, 10, 100))
        assert all(r.passed for r in records), name


def test_finite_p_rates():
    grid = make_grid((5.0, 1), (2000, 2))
    for name in ("softsign", "elu"):
        for p in (1.0, 2.0):
            records = verify_rate(get_activation(name), p, 5.0, (1, 10, 100), grid)
            assert all(r.passed for r in records), (name, p)
            meas = [r.measured for r in records]
            assert meas[2] < meas[1] < meas[0]


def test_closed_forms_match_network_route():
    xs = np.linspace(-5.0, 5.0, 4001)
    for n in (1, 7, 100):
        net = diff_quotient_net(n)
        for name, closed in (("elu", elu_quotient_error), ("softsign", softsign_quotient_error)):
            act = get_activation(name)
            quotient = realize_batch(net, act, xs[None, :])[0]
            direct = np.abs(quotient - act.derivative(xs))
            formula = closed(xs, n)
            assert formula.shape == xs.shape
            assert np.max(np.abs(direct - formula)) <= 1e-9, (name, n)


def test_elu_error_exactly_zero_on_right_half_line():
    xs = np.linspace(0.0, 5.0, 1001)
    for n in (1, 10, 1000):
        assert np.all(elu_quotient_error(xs, n) == 0.0)
        # realized network route agrees up to accumulated rounding
        net = diff_quotient_net(n)
        act = get_activation("elu")
        got = realize_batch(net, act, xs[None, :])[0]
        assert np.max(np.abs(got - act.derivative(xs))) <= 1e-11


def test_quotient_error_piecewise_structure():
    # the softsign error is continuous across both breakpoints
    for n in (2, 9):
        for edge in (0.0, -1.0 / n):
            left = softsign_quotient_error(np.array([edge - 1e-9]), n)[0]
            right = softsign_quotient_error(np.array([edge + 1e-9]), n)[0]
            assert abs(left - right) < 1e-6, (n, edge)


def test_fit_decay_slope():
    norms = np.array([2.0**k for k in range(8)])
    errors = 3.0 / norms
    assert fit_decay_slope(norms, errors) == pytest.approx(-1.0, abs=1e-12)
    errors2 = 5.0 / norms**2
    assert fit_decay_slope(norms, errors2) == pytest.approx(-2.0, abs=1e-12)
    with pytest.raises(ValueError):
        fit_decay_slope(norms[:1], errors[:1])


def test_verify_rate_reports_failures():
    # a single-node grid cannot resolve the width-1/n error spike, so the
    # measured value exceeds the bound and the record says so
    grid = make_grid((5.0, 1), (1, 1))
    records = verify_rate(get_activation("softsign"), 2.0, 5.0, (1, 1000), grid)
    assert records[0].passed
    assert not records[1].passed
