import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from locelm import (
    DomainError,
    evaluate,
    feature_jet,
    new_local_network,
    set_output_weights,
)

import _properties


def test_helmholtz_subdomain_network():
    net = new_local_network(1, [100], 3.0, 1, [0, 2])
    coeffs = np.concatenate([net.hidden_weights[0].ravel(), net.hidden_biases[0]])
    assert coeffs.size == 200
    assert np.all(np.abs(coeffs) <= 3.0)
    # x -> x - 1
    assert net.scale[0] == 1.0 and net.shift[0] == -1.0
    assert np.allclose(net.normalize([[0.0], [1.0], [2.0]]).ravel(), [-1, 0, 1])
    assert np.all(net.output_weights == 0) and net.output_weights.shape == (100,)


def test_identity_affine_map():
    net = new_local_network(1, [5], 1.0, 7, [-1, 1])
    assert net.scale[0] == 1.0 and net.shift[0] == 0.0
    pts = np.linspace(-1, 1, 7)[:, None]
    assert np.array_equal(net.normalize(pts), pts)


def test_two_layers_deterministic():
    box = [[0, 4], [0, 8]]
    a = new_local_network(2, [20, 300], 3.0, 1, box)
    b = new_local_network(2, [20, 300], 3.0, 1, box)
    assert a.n_features == 300
    assert [w.shape for w in a.hidden_weights] == [(2, 20), (20, 300)]
    for wa, wb in zip(a.hidden_weights + a.hidden_biases, b.hidden_weights + b.hidden_biases):
        assert wa.tobytes() == wb.tobytes()
    assert a.fingerprint() == b.fingerprint()


@pytest.mark.parametrize(
    "kwargs, field",
    [
        (dict(input_dim=4), "input_dim"),
        (dict(hidden_widths=[]), "hidden_widths"),
        (dict(hidden_widths=[3, 0]), "hidden_widths"),
        (dict(r_m=0.0), "r_m"),
        (dict(subdomain_box=[1, 1]), "subdomain_box"),
        (dict(subdomain_box=[[0, 1], [0, 1]]), "subdomain_box"),
    ],
)
def test_construction_errors_name_field(kwargs, field):
    args = dict(input_dim=1, hidden_widths=[4], r_m=1.0, seed=0, subdomain_box=[0, 1])
    args.update(kwargs)
    with pytest.raises(ValueError, match=field):
        new_local_network(**args)


def test_single_layer_closed_form():
    net = new_local_network(1, [6], 2.0, 3, [1, 5])
    x = np.array([[1.3], [2.0], [4.9]])
    xh = (x - 1) / 2 - 1
    w, b = net.hidden_weights[0][0], net.hidden_biases[0]
    th = np.tanh(xh * w + b)
    jet = feature_jet(net, x)
    s = net.scale[0]
    assert np.allclose(jet.values, th, atol=1e-15)
    assert np.allclose(jet.grad[0], s * w * (1 - th**2), atol=1e-14)
    assert np.allclose(jet.second[0], -2 * s**2 * w**2 * th * (1 - th**2), atol=1e-14)


def test_zero_weights_give_constant_features():
    net = new_local_network(2, [8], 1.0, 0, [[0, 1], [0, 1]])
    net.hidden_weights = (np.zeros((2, 8)),)
    jet = feature_jet(net, np.random.default_rng(0).uniform(0, 1, (5, 2)))
    assert np.allclose(jet.values, np.tanh(net.hidden_biases[0]))
    for g, s in zip(jet.grad, jet.second):
        assert np.all(g == 0) and np.all(s == 0)


def test_jet_shapes():
    net = new_local_network(3, [4, 7], 1.0, 0, [[0, 1]] * 3)
    jet = feature_jet(net, np.full((11, 3), 0.5))
    assert jet.values.shape == (11, 7)
    assert all(g.shape == (11, 7) for g in jet.grad + jet.second)
    assert len(jet.grad) == len(jet.second) == 3


def test_derivatives_match_finite_differences():
    ok, detail = _properties.check_network_fd(100)
    assert ok, detail


def test_out_of_box_point_reports_index():
    net = new_local_network(1, [3], 1.0, 0, [0, 1])
    with pytest.raises(DomainError, match="point 2"):
        feature_jet(net, [[0.0], [0.5], [1.1]])


def test_marginal_points_are_clamped():
    net = new_local_network(1, [3], 1.0, 0, [0, 1])
    xh = net.normalize([[-1e-14], [1 + 1e-14]])
    assert xh[0, 0] == -1.0 and xh[1, 0] == 1.0


def test_zero_output_weights_evaluate_to_zero():
    net = new_local_network(2, [10], 1.0, 0, [[0, 1], [0, 2]])
    assert np.all(evaluate(net, [[0.2, 0.3], [1.0, 2.0]]) == 0)


def test_output_linearity():
    rng = np.random.default_rng(1)
    net = new_local_network(2, [5, 12], 2.0, 4, [[0, 1], [0, 2]])
    pts = rng.uniform([0, 0], [1, 2], (20, 2))
    w1, w2 = rng.standard_normal(12), rng.standard_normal(12)
    e1 = evaluate(set_output_weights(net, w1), pts)
    e2 = evaluate(set_output_weights(net, w2), pts)
    e12 = evaluate(set_output_weights(net, w1 + w2), pts)
    assert np.max(np.abs(e12 - e1 - e2)) <= 1e-13
    assert np.allclose(e12, feature_jet(net, pts).values @ (w1 + w2), atol=1e-14)


def test_set_output_weights():
    net = new_local_network(1, [4], 1.0, 0, [0, 1])
    h = net.fingerprint()
    w = np.array([1.0, -2.0, 3.0, 0.5])
    set_output_weights(net, w)
    assert np.array_equal(net.output_weights, w)
    assert net.fingerprint() == h
    set_output_weights(net, np.zeros(4))
    assert np.all(evaluate(net, [[0.3]]) == 0)
    with pytest.raises(ValueError):
        set_output_weights(net, np.zeros(5))


def test_hidden_coefficients_are_read_only():
    net = new_local_network(1, [4], 1.0, 0, [0, 1])
    with pytest.raises(ValueError):
        net.hidden_weights[0][0, 0] = 1.0


@settings(max_examples=30, deadline=None)
@given(
    dim=st.integers(1, 3),
    widths=st.lists(st.integers(1, 12), min_size=1, max_size=3),
    r_m=st.floats(0.1, 10.0),
    seed=st.integers(0, 2**32 - 1),
)
def test_determinism_and_range(dim, widths, r_m, seed):
    box = [[0, 1]] * dim
    a = new_local_network(dim, widths, r_m, seed, box)
    b = new_local_network(dim, widths, r_m, seed, box)
    for wa, wb in zip(a.hidden_weights + a.hidden_biases, b.hidden_weights + b.hidden_biases):
        assert wa.tobytes() == wb.tobytes()
        assert np.all(np.abs(wa) <= r_m)


@settings(max_examples=50, deadline=None)
@given(
    lo=st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=3),
    width=st.floats(1e-3, 1e3),
)
def test_corners_map_to_unit_cube(lo, width):
    lo = np.array(lo)
    hi = lo + width
    net = new_local_network(len(lo), [2], 1.0, 0, np.column_stack([lo, hi]))
    xh = net.normalize(np.vstack([lo, hi]))
    assert np.array_equal(xh[0], -np.ones(len(lo)))
    assert np.array_equal(xh[1], np.ones(len(lo)))
