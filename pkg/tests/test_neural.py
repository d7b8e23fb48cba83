import numpy as np
import pytest

from ccrsim.neural import (AdamState, Mlp, adam_step, backward, forward, load_checkpoint,
                           save_checkpoint, soft_update)


def _fd_check(net, x, g, h=1e-5):
    """Central differences of <net(x), g> against backward()."""
    out, cache = forward(net, x)
    grads, gin = backward(net, cache, g)

    def f():
        return float(np.sum(net(x) * g))

    worst = 0.0
    for p, gp in zip(net.params, grads):
        for idx in np.ndindex(p.shape):
            old = p[idx]
            p[idx] = old + h
            up = f()
            p[idx] = old - h
            dn = f()
            p[idx] = old
            num = (up - dn) / (2 * h)
            worst = max(worst, abs(num - gp[idx]) / max(1.0, abs(num), abs(gp[idx])))
    for idx in np.ndindex(x.shape):
        xp, xm = x.copy(), x.copy()
        xp[idx] += h
        xm[idx] -= h
        num = (np.sum(net(xp) * g) - np.sum(net(xm) * g)) / (2 * h)
        worst = max(worst, abs(num - gin[idx]) / max(1.0, abs(num), abs(gin[idx])))
    return worst


@pytest.mark.parametrize("sizes, hidden, output", [
    ([3, 5, 2], "relu", "tanh"),
    ([4, 6, 6, 1], "relu", "identity"),
    ([2, 3, 3], "tanh", "tanh"),
    ([19, 8, 8, 2], "relu", "tanh"),   # actor shape (narrowed hidden width)
    ([76, 8, 8, 1], "relu", "identity"),  # MADDPG critic shape
])
def test_backward_matches_finite_differences(sizes, hidden, output):
    rng = np.random.default_rng(sum(sizes))
    net = Mlp(sizes, hidden, output, rng=rng)
    x = rng.normal(size=(3, sizes[0]))
    g = rng.normal(size=(3, sizes[-1]))
    assert _fd_check(net, x, g) < 1e-4


def test_zero_net_outputs_zero():
    net = Mlp([3, 4, 2], zero=True)
    assert np.array_equal(net(np.ones(3)), np.zeros(2))


def test_identity_layer():
    net = Mlp([3, 3], output="identity", zero=True)
    net.params[0][...] = np.eye(3)
    x = np.array([0.5, -2.0, 7.0])
    assert np.array_equal(net(x), x)


def test_tanh_output_range():
    net = Mlp([2, 8, 3], output="tanh", rng=np.random.default_rng(0))
    net.params[-2] *= 100
    out = net(np.random.default_rng(1).normal(size=(50, 2)) * 10)
    assert (np.abs(out) <= 1).all()


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        forward(Mlp([3, 2], zero=True), np.ones(4))


def test_zero_output_grad():
    net = Mlp([3, 4, 2], rng=np.random.default_rng(0))
    _, cache = forward(net, np.ones(3))
    grads, gin = backward(net, cache, np.zeros(2))
    assert all(not g.any() for g in grads) and not gin.any()


def test_linear_input_grad():
    net = Mlp([3, 2], output="identity", rng=np.random.default_rng(0))
    _, cache = forward(net, np.ones(3))
    g = np.array([0.3, -1.1])
    _, gin = backward(net, cache, g)
    assert np.array_equal(gin, net.params[0] @ g)


def _adam_oracle(x0, grad_fn, lr, steps, b1=0.9, b2=0.999, eps=1e-8):
    x, m, v, out = x0, 0.0, 0.0, []
    for t in range(1, steps + 1):
        g = grad_fn(x)
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mhat, vhat = m / (1 - b1 ** t), v / (1 - b2 ** t)
        x = x - lr * mhat / (np.sqrt(vhat) + eps)
        out.append(x)
    return out


def test_adam_quadratic_matches_textbook_oracle():
    x = [np.array([1.0])]
    st = AdamState.for_params(x, lr=0.1)
    oracle = _adam_oracle(1.0, lambda z: 2 * z, 0.1, 20)
    path = []
    for _ in range(20):
        adam_step(x, [2 * x[0]], st)
        path.append(x[0][0])
    assert np.allclose(path, oracle, rtol=1e-12, atol=1e-15)
    # |x| shrinks monotonically until the first zero crossing (step 11), then
    # momentum overshoots; the excursion stays well below the start value
    assert all(abs(b) < abs(a) for a, b in zip(path[:11], path[1:11]))
    assert max(abs(p) for p in path[11:]) < 0.3


def test_adam_zero_grads():
    p = [np.array([1.0, 2.0])]
    st = AdamState.for_params(p)
    st.m[0][...] = 1.0
    adam_step(p, [np.zeros(2)], st)
    assert np.allclose(st.m[0], 0.9)
    # the decayed first moment still moves params; with m=v=0 nothing moves
    q = [np.array([1.0, 2.0])]
    st2 = AdamState.for_params(q)
    adam_step(q, [np.zeros(2)], st2)
    assert np.array_equal(q[0], [1.0, 2.0])


def test_adam_deterministic():
    a = Mlp([3, 4, 1], rng=np.random.default_rng(0))
    b = a.copy()
    grads = [np.full_like(p, 0.5) for p in a.params]
    sa, sb = AdamState.for_params(a.params), AdamState.for_params(b.params)
    adam_step(a.params, grads, sa)
    adam_step(b.params, grads, sb)
    assert a.flat().tobytes() == b.flat().tobytes()


def test_soft_update_examples():
    t = [np.zeros(3)]
    soft_update(t, [np.ones(3)], 0.01)
    assert np.allclose(t[0], 0.01)
    t = [np.array([1.0, 2.0])]
    soft_update(t, [np.array([5.0, 5.0])], 0.0)
    assert np.array_equal(t[0], [1.0, 2.0])
    soft_update(t, [np.array([5.0, 5.0])], 1.0)
    assert np.array_equal(t[0], [5.0, 5.0])
    with pytest.raises(ValueError):
        soft_update(t, t, 1.5)


def test_soft_update_geometric_convergence():
    online = [np.ones(4)]
    target = [np.zeros(4)]
    gap = 1.0
    for _ in range(50):
        soft_update(target, online, 0.1)
        new_gap = np.abs(online[0] - target[0]).max()
        assert new_gap == pytest.approx(0.9 * gap, rel=1e-12)
        gap = new_gap


def test_checkpoint_roundtrip(tmp_path):
    net = Mlp([5, 7, 2], "tanh", "tanh", rng=np.random.default_rng(3))
    save_checkpoint(net, tmp_path / "n.bin")
    back = load_checkpoint(tmp_path / "n.bin")
    assert back.sizes == [5, 7, 2] and back.hidden == "tanh" and back.output == "tanh"
    assert back.flat().tobytes() == net.flat().tobytes()


def test_checkpoint_bad_magic(tmp_path):
    (tmp_path / "x.bin").write_bytes(b"garbage!" * 4)
    with pytest.raises(ValueError):
        load_checkpoint(tmp_path / "x.bin")
