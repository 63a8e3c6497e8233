import numpy as np
import pytest

from ghosttype.gru import BiGru, GruDirection, GruParams, bidirectional_scan, gru_cell
from ghosttype.gradcheck import grad_check


def scalar_step(x, h, wr, wz, wh, ur, uz, uh, br, bz, bh):
    """Hand-evaluated cell equations for 1-unit, 1-input GRU."""
    sig = lambda v: 1.0 / (1.0 + np.exp(-v))
    r = sig(x * wr + h * ur + br)
    z = sig(x * wz + h * uz + bz)
    hc = np.tanh(x * wh + r * h * uh + bh)
    return (1.0 - z) * h + z * hc


def test_cell_matches_scalar_oracle():
    coeffs = dict(wr=0.7, wz=-0.4, wh=1.1, ur=0.3, uz=0.9, uh=-0.6, br=0.1, bz=-0.2, bh=0.05)
    p = GruParams.from_gates(
        w_r=[[coeffs["wr"]]], w_z=[[coeffs["wz"]]], w_h=[[coeffs["wh"]]],
        u_r=[[coeffs["ur"]]], u_z=[[coeffs["uz"]]], u_h=[[coeffs["uh"]]],
        b_r=[coeffs["br"]], b_z=[coeffs["bz"]], b_h=[coeffs["bh"]],
    )
    h = np.array([[0.0]])
    h_ref = 0.0
    for x in (0.5, -1.2, 2.0, 0.0):
        h = gru_cell(np.array([[x]]), h, p)
        h_ref = scalar_step(x, h_ref, **coeffs)
        assert h[0, 0] == pytest.approx(h_ref, rel=1e-12)


def test_cell_zero_weights_keep_zero_state():
    p = GruParams.from_gates(*(np.zeros((1, 1)),) * 6, *(np.zeros(1),) * 3)
    h = gru_cell(np.array([[3.0]]), np.array([[0.0]]), p)
    # z = 0.5, hc = 0 -> h' = 0.5 * 0 + 0.5 * 0
    assert h[0, 0] == 0.0


def test_cell_shape_mismatch():
    rng = np.random.default_rng(0)
    p = GruParams.init("g", 3, 4, rng)
    with pytest.raises(ValueError):
        gru_cell(np.zeros((2, 5)), np.zeros((2, 4)), p)


def _rand_params(rng, fan, units, name="g"):
    p = GruParams.init(name, fan, units, rng, dtype=np.float64)
    # nonzero biases exercise every term in backward
    p.b.value[:] = rng.uniform(-0.3, 0.3, size=p.b.value.shape)
    return p


def test_forward_scan_equals_cell_chain():
    rng = np.random.default_rng(1)
    p = _rand_params(rng, 3, 5)
    xs = rng.standard_normal((6, 2, 3))
    hs, _ = GruDirection(p).forward(xs)
    h = np.zeros((2, 5))
    for t in range(6):
        h = gru_cell(xs[t], h, p)
        assert np.allclose(hs[t], h, atol=1e-12)


def test_reverse_scan_is_flipped_forward_scan():
    rng = np.random.default_rng(2)
    p = _rand_params(rng, 2, 4)
    xs = rng.standard_normal((5, 3, 2))
    fwd, _ = GruDirection(p, reverse=False).forward(xs[::-1].copy())
    bwd, _ = GruDirection(p, reverse=True).forward(xs)
    assert np.allclose(bwd, fwd[::-1], atol=1e-12)


@pytest.mark.parametrize("reverse", [False, True])
def test_masked_batch_equals_per_sequence(reverse):
    rng = np.random.default_rng(3)
    p = _rand_params(rng, 2, 4)
    lengths = [5, 2, 4]
    t_max, b = max(lengths), len(lengths)
    xs = np.zeros((t_max, b, 2))
    mask = np.zeros((t_max, b, 1))
    seqs = []
    for k, n in enumerate(lengths):
        seq = rng.standard_normal((n, 1, 2))
        seqs.append(seq)
        xs[:n, k : k + 1, :] = seq
        mask[:n, k, 0] = 1.0
    batched, _ = GruDirection(p, reverse=reverse).forward(xs, mask)
    for k, n in enumerate(lengths):
        solo, _ = GruDirection(p, reverse=reverse).forward(seqs[k])
        assert np.allclose(batched[:n, k], solo[:, 0], atol=1e-12)


@pytest.mark.parametrize("reverse", [False, True])
def test_direction_gradients_match_fd(reverse):
    rng = np.random.default_rng(4)
    p = _rand_params(rng, 2, 3)
    xs = rng.standard_normal((4, 2, 2))
    mask = np.ones((4, 2, 1))
    mask[3, 1, 0] = 0.0
    weight = rng.standard_normal((4, 2, 3))
    layer = GruDirection(p, reverse=reverse)

    def run():
        hs, cache = layer.forward(xs, mask)
        layer.backward(cache, weight * mask)
        return float(np.sum(hs * weight * mask))

    def loss_only():
        hs, _ = layer.forward(xs, mask)
        return float(np.sum(hs * weight * mask))

    err = grad_check(run, p.parameters(), loss_only=loss_only)
    assert err < 1e-7


def test_direction_input_gradient_matches_fd():
    rng = np.random.default_rng(5)
    p = _rand_params(rng, 2, 3)
    xs = rng.standard_normal((4, 1, 2))
    weight = rng.standard_normal((4, 1, 3))
    layer = GruDirection(p)
    hs, cache = layer.forward(xs)
    dxs = layer.backward(cache, weight.copy())

    eps = 1e-6
    fd = np.zeros_like(xs)
    for i in np.ndindex(xs.shape):
        xs[i] += eps
        up = float(np.sum(layer.forward(xs)[0] * weight))
        xs[i] -= 2 * eps
        down = float(np.sum(layer.forward(xs)[0] * weight))
        xs[i] += eps
        fd[i] = (up - down) / (2 * eps)
    assert np.max(np.abs(dxs - fd)) < 1e-7


def test_bigru_output_concatenates_directions():
    rng = np.random.default_rng(6)
    layer = BiGru.init("bi", 2, 3, rng, dtype=np.float64)
    xs = rng.standard_normal((5, 2, 2))
    out, _ = layer.forward(xs)
    assert out.shape == (5, 2, 6)
    fwd, _ = GruDirection(layer.fwd.params).forward(xs)
    bwd, _ = GruDirection(layer.bwd.params, reverse=True).forward(xs)
    assert np.allclose(out[..., :3], fwd)
    assert np.allclose(out[..., 3:], bwd)


def test_bigru_gradients_match_fd():
    rng = np.random.default_rng(7)
    layer = BiGru.init("bi", 2, 3, rng, dtype=np.float64)
    xs = rng.standard_normal((4, 2, 2))
    weight = rng.standard_normal((4, 2, 6))

    def run():
        out, cache = layer.forward(xs)
        layer.backward(cache, weight.copy())
        return float(np.sum(out * weight))

    def loss_only():
        out, _ = layer.forward(xs)
        return float(np.sum(out * weight))

    assert grad_check(run, layer.parameters(), loss_only=loss_only) < 1e-7


def test_bidirectional_scan_single_sequence():
    rng = np.random.default_rng(8)
    layer = BiGru.init("bi", 2, 3, rng, dtype=np.float64)
    seq = rng.standard_normal((5, 2))
    out = bidirectional_scan(layer.fwd.params, layer.bwd.params, seq)
    batched, _ = layer.forward(seq[:, None, :])
    assert np.allclose(out, batched[:, 0, :])
    with pytest.raises(ValueError):
        bidirectional_scan(layer.fwd.params, layer.bwd.params, np.zeros((3,)))
