import numpy as np
import pytest

from sobnn import (
    InputShapeError,
    clamp_weights,
    concat,
    diff_quotient_net,
    flatten_params,
    get_activation,
    load_network,
    network,
    param_count,
    random_init,
    realize,
    realize_batch,
    realize_jet,
    save_network,
    total_norm,
    unflatten_params,
)

from helpers import fd_derivative

SIGMOID = get_activation("sigmoid")


def _random_net(rng, dims, spread=1.5):
    layers = []
    for din, dout in zip(dims[:-1], dims[1:]):
        layers.append((spread * rng.standard_normal((dout, din)), spread * rng.standard_normal(dout)))
    return network(layers)


def test_network_validation():
    with pytest.raises(ValueError):
        network([])
    A = np.ones((2, 3))
    with pytest.raises(ValueError):
        network([(A, np.ones(3))])  # bias length must match matrix rows
    with pytest.raises(ValueError):
        network([(A, np.ones(2)), (np.ones((1, 3)), np.ones(1))])  # width 2 feeds a 3-column layer
    with pytest.raises(ValueError):
        network([(np.array([[np.inf]]), np.zeros(1))])
    net = network([(A, np.ones(2)), (np.ones((1, 2)), np.ones(1))])
    assert net.arch.dims() == (3, 2, 1)


def test_realize_by_hand():
    layers = [
        (np.array([[2.0], [-1.0]]), np.array([0.5, 0.0])),
        (np.array([[1.0, 3.0]]), np.array([-0.25])),
    ]
    net = network(layers)
    x = np.array([0.8])
    hidden = 1.0 / (1.0 + np.exp(-(layers[0][0] @ x + layers[0][1])))
    expect = layers[1][0] @ hidden + layers[1][1]
    got = realize(net, SIGMOID, x)
    assert got == pytest.approx(expect, rel=1e-15)
    # no activation after the final layer: a 1-layer net is exactly affine
    aff = network([(np.array([[3.0]]), np.array([-2.0]))])
    assert realize(aff, SIGMOID, np.array([4.0]))[0] == 10.0


def test_realize_batch_matches_pointwise():
    rng = np.random.default_rng(11)
    net = _random_net(rng, (3, 4, 2))
    X = rng.standard_normal((3, 7))
    batch = realize_batch(net, SIGMOID, X)
    assert batch.shape == (2, 7)
    for j in range(7):
        assert np.array_equal(batch[:, j], realize(net, SIGMOID, X[:, j]))


def test_concat_single_affine_layers():
    phi1 = network([(np.array([[2.0]]), np.array([1.0]))])
    phi2 = network([(np.array([[3.0]]), np.array([0.0]))])
    merged = concat(phi1, phi2)
    assert merged.depth == 1
    assert np.array_equal(merged.layers[0][0], np.array([[6.0]]))
    assert np.array_equal(merged.layers[0][1], np.array([1.0]))


def test_concat_is_composition():
    rng = np.random.default_rng(5)
    for _ in range(20):
        mid = int(rng.integers(1, 4))
        phi2 = _random_net(rng, (2, 3, mid))
        phi1 = _random_net(rng, (mid, 3, 1))
        both = concat(phi1, phi2)
        assert both.depth == phi1.depth + phi2.depth - 1
        for _ in range(5):
            x = rng.standard_normal(2)
            inner = realize(phi2, SIGMOID, x)
            direct = realize(phi1, SIGMOID, inner)
            fused = realize(both, SIGMOID, x)
            assert np.max(np.abs(fused - direct)) <= 1e-12


def test_concat_dimension_mismatch():
    phi2 = network([(np.ones((2, 1)), np.zeros(2))])
    phi1 = network([(np.ones((1, 3)), np.zeros(1))])
    with pytest.raises(InputShapeError):
        concat(phi1, phi2)


def test_total_norm():
    net = network([
        (np.array([[-3.0, 1.0]]), np.array([0.5])),
        (np.array([[2.0]]), np.array([-0.25])),
    ])
    assert total_norm(net) == 3.5
    for n in (1, 2, 7, 100):
        assert total_norm(diff_quotient_net(n)) == n + 1.0 / n


def test_clamp_weights():
    net = network([(np.array([[5.0, -0.5]]), np.array([-9.0]))])
    cl = clamp_weights(net, 2.0)
    assert np.array_equal(cl.layers[0][0], np.array([[2.0, -0.5]]))
    assert np.array_equal(cl.layers[0][1], np.array([-2.0]))
    assert np.array_equal(net.layers[0][0], np.array([[5.0, -0.5]]))  # input untouched
    again = clamp_weights(cl, 2.0)
    assert np.array_equal(flatten_params(again), flatten_params(cl))
    zeroed = clamp_weights(net, 0.0)
    assert np.all(flatten_params(zeroed) == 0.0)
    with pytest.raises(ValueError):
        clamp_weights(net, -1.0)


def test_random_init_determinism():
    a = random_init(network([(np.zeros((4, 2)), np.zeros(4)), (np.zeros((1, 4)), np.zeros(1))]).arch, seed=9)
    b = random_init(a.arch, seed=9)
    c = random_init(a.arch, seed=9, stream=1)
    d = random_init(a.arch, seed=10)
    assert np.array_equal(flatten_params(a), flatten_params(b))
    assert not np.array_equal(flatten_params(a), flatten_params(c))
    assert not np.array_equal(flatten_params(a), flatten_params(d))
    doubled = random_init(a.arch, seed=9, scale=2.0)
    assert np.allclose(flatten_params(doubled), 2.0 * flatten_params(a), rtol=0, atol=0)


def test_flatten_round_trip():
    rng = np.random.default_rng(3)
    net = _random_net(rng, (2, 5, 3, 1))
    theta = flatten_params(net)
    assert theta.shape == (param_count(net),)
    assert param_count(net) == (5 * 2 + 5) + (3 * 5 + 3) + (1 * 3 + 1)
    back = unflatten_params(theta, net.arch)
    for (A1, b1), (A2, b2) in zip(net.layers, back.layers):
        assert np.array_equal(A1, A2) and np.array_equal(b1, b2)
    with pytest.raises(ValueError):
        unflatten_params(theta[:-1], net.arch)


def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(21)
    net = _random_net(rng, (3, 4, 1))
    path = tmp_path / "net.txt"
    save_network(net, path)
    loaded = load_network(path)
    assert loaded.arch.dims() == net.arch.dims()
    assert np.array_equal(flatten_params(loaded), flatten_params(net))
    # byte-stable: saving the loaded net reproduces the file exactly
    path2 = tmp_path / "net2.txt"
    save_network(loaded, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_load_rejects_garbage(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("not a network\n")
    with pytest.raises(ValueError):
        load_network(bad)


def test_realize_jet_component_zero_is_realize():
    rng = np.random.default_rng(7)
    net = _random_net(rng, (2, 6, 1))
    for _ in range(10):
        x = rng.standard_normal(2)
        jet = realize_jet(net, SIGMOID, x, 0, 3)
        assert jet.order == 3
        assert jet.value == realize(net, SIGMOID, x)[0]


def test_realize_jet_matches_finite_differences():
    rng = np.random.default_rng(13)
    for act_name in ("sigmoid", "tanh"):
        act = get_activation(act_name)
        net = _random_net(rng, (3, 5, 1), spread=0.8)
        for _ in range(5):
            x = rng.standard_normal(3)
            v = rng.standard_normal(3)
            v /= np.linalg.norm(v)
            jet = realize_jet(net, act, x, v, 3)

            def line(t):
                return realize(net, act, x + t * v)[0]

            for order in (1, 2, 3):
                fd = fd_derivative(line, 0.0, order)
                scale = max(abs(jet.component(order)), 1.0)
                assert abs(fd - jet.component(order)) / scale < 1e-6, (act_name, order)


def test_realize_jet_axis_direction():
    rng = np.random.default_rng(17)
    net = _random_net(rng, (3, 4, 1))
    x = rng.standard_normal(3)
    by_index = realize_jet(net, SIGMOID, x, 1, 2)
    by_vector = realize_jet(net, SIGMOID, x, np.array([0.0, 1.0, 0.0]), 2)
    assert by_index.components == by_vector.components


def test_input_shape_errors():
    rng = np.random.default_rng(1)
    net = _random_net(rng, (3, 4, 2))
    with pytest.raises(InputShapeError):
        realize(net, SIGMOID, np.zeros(2))
    with pytest.raises(InputShapeError):
        realize_batch(net, SIGMOID, np.zeros((2, 5)))
    with pytest.raises(InputShapeError):
        realize_jet(net, SIGMOID, np.zeros(3), 0, 2)  # jets need scalar output
