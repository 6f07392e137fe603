import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from pade3d.hops import (
    UNREACHABLE, bfs_hops, flood_hops, hop_census, read_hops_csv, write_hops_csv,
)
from pade3d.network import DeploymentSpec, Network, build_connectivity, generate_deployment


def _oracle(net):
    n = net.n_nodes
    rows = np.concatenate([np.full(len(nb), i) for i, nb in enumerate(net.adjacency)])
    cols = np.concatenate(net.adjacency)
    g = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    d = shortest_path(g, method="D", unweighted=True, indices=net.anchor_ids)
    return np.where(np.isinf(d), UNREACHABLE, d).astype(int)


def test_chain():
    pos = np.array([[0, 0, 0], [10, 0, 0], [20, 0, 0], [30, 0, 0], [90, 90, 90]], float)
    net = build_connectivity(Network(pos, np.array([0, 1, 2, 3]), 10.0, 100.0))
    assert bfs_hops(net.adjacency, 0).tolist() == [0, 1, 2, 3, UNREACHABLE]


@pytest.mark.parametrize("seed", range(5))
def test_flood_matches_shortest_path(seed):
    net = generate_deployment(DeploymentSpec(radius=20.0 + 3 * seed, seed=seed))
    hm = flood_hops(net)
    assert np.array_equal(hm.hops, _oracle(net))
    assert np.all(hm.hops[np.arange(len(hm.anchor_ids)), hm.anchor_ids] == 0)


def test_census_is_cumulative_count(small_net):
    hm = flood_hops(small_net)
    cen = hop_census(hm)
    assert cen.n.shape[1] == hm.hops.max() + 1
    for a in range(len(cen.anchor_ids)):
        h = hm.hops[a]
        for m in range(cen.n.shape[1]):
            assert cen.n[a, m] == np.sum((h >= 1) & (h <= m))
        assert np.all(np.diff(cen.n[a]) >= 0)


def test_census_small_example():
    # anchor 0 with two 1-hop neighbors and one 2-hop node
    pos = np.array([[50, 50, 50], [60, 50, 50], [50, 60, 50], [70, 50, 50], [0, 0, 0]], float)
    net = build_connectivity(Network(pos, np.array([0, 1, 2, 4]), 12.0, 100.0))
    cen = hop_census(flood_hops(net))
    # width follows the deepest hop seen by any anchor
    assert cen.n[0].tolist() == [0, 2, 3, 3]


def test_hops_csv_round_trip(tmp_path, small_net):
    hm = flood_hops(small_net)
    write_hops_csv(hm, tmp_path / "h.csv")
    back = read_hops_csv(tmp_path / "h.csv")
    assert np.array_equal(back.hops, hm.hops)
    assert np.array_equal(back.anchor_ids, hm.anchor_ids)
