import numpy as np
import pytest

from densefilter import DbscanParams, DataError, core_cluster, dbscan

from oracles import canonical_clusters, reference_dbscan


def blob_instance(rng, n_blobs=3, per_blob=30, dim=3, spread=0.3, sep=10.0):
    centers = rng.normal(scale=sep, size=(n_blobs, dim))
    pts = np.concatenate(
        [c + rng.normal(scale=spread, size=(per_blob, dim)) for c in centers]
    )
    return pts


class TestParams:
    def test_eps_positive(self):
        with pytest.raises(DataError):
            DbscanParams(eps=0.0, min_pts=3)

    def test_min_pts_positive(self):
        with pytest.raises(DataError):
            DbscanParams(eps=1.0, min_pts=0)


class TestSmallCases:
    def test_one_cluster_two_noise(self):
        # 5 points within eps of each other plus 2 isolated ones.
        pts = np.array(
            [[0, 0], [0.1, 0], [0, 0.1], [0.1, 0.1], [0.05, 0.05], [5, 5], [-5, 5]]
        )
        out = dbscan(pts, DbscanParams(eps=0.5, min_pts=3))
        ref_labels, _ = reference_dbscan(pts, 0.5, 3)
        assert canonical_clusters(out.cluster_of) == canonical_clusters(ref_labels)
        assert out.cluster_sizes == [5]
        assert out.noise_count == 2

    def test_min_pts_one_gives_components(self, rng):
        pts = np.array([[0.0], [0.4], [0.8], [5.0], [5.3]])
        out = dbscan(pts, DbscanParams(eps=0.5, min_pts=1))
        assert out.noise_count == 0
        assert sorted(out.cluster_sizes) == [2, 3]

    def test_identical_points_single_cluster(self):
        pts = np.zeros((8, 2))
        out = dbscan(pts, DbscanParams(eps=0.1, min_pts=8))
        assert out.cluster_sizes == [8]

    def test_all_noise(self, rng):
        pts = np.arange(6, dtype=float).reshape(-1, 1) * 100
        out = dbscan(pts, DbscanParams(eps=1.0, min_pts=3))
        assert out.cluster_sizes == []
        assert out.noise_count == 6
        assert len(core_cluster(out)) == 0


class TestOracleAgreement:
    @pytest.mark.parametrize("seed", range(25))
    def test_random_instances(self, seed):
        r = np.random.default_rng(seed)
        n = int(r.integers(20, 200))
        dim = int(r.integers(1, 6))
        pts = r.normal(scale=r.uniform(0.5, 3.0), size=(n, dim))
        eps = float(r.uniform(0.2, 1.5))
        min_pts = int(r.integers(2, 8))
        out = dbscan(pts, DbscanParams(eps=eps, min_pts=min_pts))
        ref_labels, ref_core = reference_dbscan(pts, eps, min_pts)
        assert canonical_clusters(out.cluster_of) == canonical_clusters(ref_labels)
        np.testing.assert_array_equal(out.core_mask, ref_core)
        np.testing.assert_array_equal(
            np.flatnonzero(out.cluster_of == -1), np.flatnonzero(ref_labels == -1)
        )


class TestProperties:
    def test_permutation_invariance(self, rng):
        # Blobs separated by > 2*eps so no border point can be contested.
        pts = blob_instance(rng)
        params = DbscanParams(eps=1.0, min_pts=4)
        base = dbscan(pts, params)
        perm = rng.permutation(pts.shape[0])
        permuted = dbscan(pts[perm], params)
        mapped = np.full(pts.shape[0], -1, dtype=int)
        mapped[perm] = permuted.cluster_of
        assert canonical_clusters(base.cluster_of) == canonical_clusters(mapped)

    def test_density_connectivity(self, rng):
        pts = blob_instance(rng, n_blobs=2, per_blob=40, spread=0.5)
        params = DbscanParams(eps=1.2, min_pts=5)
        out = dbscan(pts, params)
        from scipy.spatial.distance import cdist

        dmat = cdist(pts, pts)
        for cid in range(out.n_clusters):
            members = out.members(cid)
            cores = members[out.core_mask[members]]
            assert cores.size >= 1
            # core points of the cluster form one eps-connected component
            adj = dmat[np.ix_(cores, cores)] <= params.eps
            seen = {0}
            frontier = [0]
            while frontier:
                u = frontier.pop()
                for v in np.flatnonzero(adj[u]):
                    if v not in seen:
                        seen.add(int(v))
                        frontier.append(int(v))
            assert len(seen) == cores.size
            # every border member touches a core point of its own cluster
            borders = members[~out.core_mask[members]]
            for b in borders:
                assert np.any(dmat[b, cores] <= params.eps)

    def test_sizes_sum(self, rng):
        pts = rng.normal(size=(120, 2))
        out = dbscan(pts, DbscanParams(eps=0.3, min_pts=4))
        assert sum(out.cluster_sizes) == 120 - out.noise_count


class TestCoreCluster:
    def test_largest_wins(self):
        pts = np.concatenate(
            [np.zeros((12, 1)), np.full((7, 1), 100.0)]
        ) + np.linspace(0, 0.1, 19).reshape(-1, 1)
        out = dbscan(pts, DbscanParams(eps=1.0, min_pts=3))
        assert sorted(out.cluster_sizes, reverse=True)[0] == 12
        assert set(core_cluster(out)) == set(range(12))

    def test_tie_breaks_to_lower_id(self):
        pts = np.concatenate([np.zeros((5, 1)), np.full((5, 1), 100.0)])
        out = dbscan(pts, DbscanParams(eps=1.0, min_pts=3))
        assert out.cluster_sizes == [5, 5]
        assert set(core_cluster(out)) == set(range(5))
