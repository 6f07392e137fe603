import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pade3d import _kernels
from pade3d.errors import ParameterError
from pade3d.moga import (
    GaConfig, NodeContext, batch_ranks, crowding_distance, dominates, evolve, evolve_batch,
    loss_l1, loss_l2, nondominated_sort, pick_solution, run_node,
)


def brute_fronts(f):
    """Peel fronts by checking every pair directly."""
    f = [tuple(map(float, x)) for x in f]
    left = set(range(len(f)))
    fronts = []
    while left:
        front = sorted(
            i for i in left
            if not any(all(a <= b for a, b in zip(f[j], f[i])) and f[j] != f[i] for j in left)
        )
        fronts.append(front)
        left -= set(front)
    return fronts


def ref_crowding(f):
    n, k = f.shape
    if n <= 2:
        return np.full(n, np.inf)
    out = np.zeros(n)
    for j in range(k):
        order = sorted(range(n), key=lambda i: (f[i, j], i))
        span = f[order[-1], j] - f[order[0], j]
        for pos, i in enumerate(order):
            if pos in (0, n - 1):
                out[i] = np.inf
            elif span > 0 and np.isfinite(out[i]):
                out[i] += (f[order[pos + 1], j] - f[order[pos - 1], j]) / span
    return out


def random_population(rng, n):
    f = rng.integers(0, 6, (n, 2)).astype(float) if rng.random() < 0.5 else rng.random((n, 2))
    if n > 3:
        f[1] = f[0]  # duplicates
    return f


def test_loss_examples():
    anchors = np.zeros((1, 3))
    assert loss_l1([13.0, 0, 0], anchors, [10.0]) == pytest.approx(9.0)
    assert loss_l2([25.0, 0, 0], anchors, [20.0]) == pytest.approx(25.0)
    assert loss_l2([0.0, 0, 0], anchors, [0.0]) == 0.0


def test_loss_zero_at_truth(rng):
    anchors = rng.uniform(0, 100, (8, 3))
    x = rng.uniform(0, 100, 3)
    d = np.linalg.norm(anchors - x, axis=1)
    assert loss_l1(x, anchors, d) == pytest.approx(0.0, abs=1e-20)


def test_loss_recomputation(rng):
    anchors = rng.uniform(0, 100, (12, 3))
    row = rng.uniform(0, 150, 12)
    mask = (rng.random(12) < 0.7).astype(float)
    x = rng.uniform(0, 100, 3)
    expect = sum(
        (np.sqrt(sum((x[c] - anchors[i, c]) ** 2 for c in range(3))) - row[i]) ** 2
        for i in range(12) if mask[i]
    )
    assert loss_l1(x, anchors, row, mask) == pytest.approx(expect, rel=1e-12)
    out = np.empty((1, 2))
    _kernels.objectives(x[None], anchors, row, row, mask, out)
    assert out[0, 0] == pytest.approx(expect, rel=1e-12)


def test_dominance():
    assert dominates([1, 2], [2, 2])
    assert not dominates([1, 2], [1, 2])
    assert not dominates([1, 3], [2, 2])


def test_sort_examples():
    assert nondominated_sort([(1, 2), (2, 1), (3, 3)]) == [[0, 1], [2]]
    assert nondominated_sort([(1, 1)] * 4) == [[0, 1, 2, 3]]


def test_sort_matches_brute_force(rng):
    for _ in range(30):
        f = random_population(rng, int(rng.integers(4, 200)))
        fronts = nondominated_sort(f)
        assert fronts == brute_fronts(f)
        rank = _kernels.ranks(f)
        for level, front in enumerate(fronts, start=1):
            assert np.all(rank[front] == level)
        assert np.array_equal(batch_ranks(f[None])[0], rank)


def test_crowding_examples():
    assert np.all(np.isinf(crowding_distance([[1, 2], [2, 1]])))
    line = np.array([[i, 4 - i] for i in range(5)], float)
    c = crowding_distance(line)
    assert np.isinf(c[0]) and np.isinf(c[4])
    assert c[1] == c[2] == c[3] == pytest.approx(1.0)


def test_crowding_matches_reference(rng):
    for _ in range(30):
        f = random_population(rng, int(rng.integers(3, 60)))
        front = np.array(nondominated_sort(f)[0])
        ref = ref_crowding(f[front])
        got = crowding_distance(f[front])
        assert np.allclose(got, ref, rtol=0, atol=1e-12)
        rank = _kernels.ranks(f)
        kc = _kernels.crowding(f, rank)
        for fr in nondominated_sort(f):
            assert np.allclose(kc[fr], ref_crowding(f[fr]), rtol=0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), scale=st.floats(1e-3, 1e3))
def test_scaling_invariance(seed, scale):
    r = np.random.default_rng(seed)
    f = r.random((1, 20, 2))
    pos = r.uniform(0, 100, (1, 20, 3))
    assert np.array_equal(batch_ranks(f), batch_ranks(f * scale))
    assert np.array_equal(pick_solution(pos, f), pick_solution(pos, f * scale))


def test_config_validation():
    for bad in ({"pop_size": 3}, {"pop_size": 21}, {"crossover_prob": 1.5},
                {"mutation_prob": -0.1}, {"pareto_pick": "nope"}, {"max_iter": -1}):
        with pytest.raises(ParameterError):
            GaConfig(**bad)
    c = GaConfig()
    assert (c.pop_size, c.max_iter, c.crossover_prob, c.mutation_prob) == (20, 500, 0.9, 0.1)


def _exact_contexts(net, nodes, init=False):
    A = net.anchor_positions
    out = []
    for k in nodes:
        d = np.linalg.norm(A - net.positions[k], axis=1)
        out.append(NodeContext(A, d, d, net.side_length,
                               init=net.positions[k] if init else None))
    return out


def test_zero_noise_converges(small_net):
    nodes = small_net.unknown_ids[:40]
    ctx = _exact_contexts(small_net, nodes)
    rngs = [np.random.default_rng([9, int(k)]) for k in nodes]
    pred = evolve_batch(ctx, GaConfig(), rngs)
    err = np.linalg.norm(pred - small_net.positions[nodes], axis=1)
    assert np.mean(err < 0.5) >= 0.95


def test_deterministic(small_net):
    ctx = _exact_contexts(small_net, small_net.unknown_ids[:1])[0]
    a = evolve(ctx, GaConfig(max_iter=100), np.random.default_rng(4))
    b = evolve(ctx, GaConfig(max_iter=100), np.random.default_rng(4))
    assert np.array_equal(a, b)


def test_batch_equals_single(small_net):
    nodes = small_net.unknown_ids[:3]
    ctx = _exact_contexts(small_net, nodes)
    cfg = GaConfig(max_iter=50)
    batch = evolve_batch(ctx, cfg, [np.random.default_rng(i) for i in range(3)])
    for i in range(3):
        assert np.array_equal(batch[i], evolve(ctx[i], cfg, np.random.default_rng(i)))


def test_run_contracts(small_net, rng):
    # conflicting objectives so the front has several members
    k = small_net.unknown_ids[5]
    A = small_net.anchor_positions
    d = np.linalg.norm(A - small_net.positions[k], axis=1)
    ctx = NodeContext(A, d, d * 1.3 + 5, 100.0)
    pos, f, best = run_node(ctx, GaConfig(max_iter=200), rng)
    assert np.all((pos >= 0) & (pos <= 100))
    assert np.all(np.diff(best[:, 0]) <= 0) and np.all(np.diff(best[:, 1]) <= 0)
    assert np.allclose(f[:, 0], loss_l1(pos, A, d))
    assert np.allclose(f[:, 1], loss_l2(pos, A, ctx.e_dis))
    chosen = pick_solution(pos[None], f[None])[0]
    i = int(np.flatnonzero(np.all(pos == chosen, axis=1))[0])
    assert not any(dominates(f[j], f[i]) for j in range(len(f)))


def test_seed_individual_and_mask(small_net):
    k = small_net.unknown_ids[0]
    A = small_net.anchor_positions
    d = np.linalg.norm(A - small_net.positions[k], axis=1)
    mask = np.ones(len(A))
    mask[:3] = 0
    noisy = d.copy()
    noisy[:3] = 1e4  # masked anchors must not matter
    ctx = NodeContext(A, noisy, noisy, 100.0, init=small_net.positions[k], mask=mask)
    out = evolve(ctx, GaConfig(max_iter=20), np.random.default_rng(0))
    assert np.linalg.norm(out - small_net.positions[k]) < 1e-9


def test_min_f1_pick():
    pos = np.arange(12, dtype=float).reshape(1, 4, 3)
    f = np.array([[[1.0, 9.0], [2.0, 2.0], [9.0, 1.0], [5.0, 5.0]]])
    assert np.array_equal(pick_solution(pos, f, "min_f1")[0], pos[0, 0])
    assert np.array_equal(pick_solution(pos, f)[0], pos[0, 1])
