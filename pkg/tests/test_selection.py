import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from peergrid.metrics import PeerSnapshot
from peergrid.selection import (
    CoarseClass,
    PeerGroup,
    assign_group,
    classify_coarse,
    classify_population,
    group_members,
    population_averages,
    select_efficient,
)


def snap(pid, c, pct, d):
    return PeerSnapshot(peer_id=pid, credibility=c, computation_time=pct, distance=d)


def oracle_select(snapshots, mu):
    """Independent evaluation of the three selection conditions.

    Averages are taken in exact rational arithmetic so the oracle is not
    hostage to the summation order the implementation happens to use.
    """
    m = len(snapshots)
    pc_av = sum(Fraction(s.computation_time) for s in snapshots) / m
    d_av = sum(Fraction(s.distance) for s in snapshots) / m
    return {
        s.peer_id
        for s in snapshots
        if s.credibility >= mu and s.computation_time >= pc_av and s.distance <= d_av
    }


def snapshot_populations():
    # Times and distances are drawn on a dyadic grid (k / 1024) so sums are
    # exact in binary floating point and boundary comparisons against the
    # average cannot flip on a rounding ulp between oracle and implementation.
    credibilities = st.floats(0.0, 1.0, allow_nan=False)
    times = st.integers(0, 10**7).map(lambda k: k / 1024)
    dists = st.integers(0, 10**6).map(lambda k: k / 1024)
    return st.lists(
        st.tuples(credibilities, times, dists), min_size=1, max_size=50
    ).map(
        lambda rows: [snap(f"p{i:02d}", c, t, d) for i, (c, t, d) in enumerate(rows)]
    )


class TestPopulationAverages:
    def test_symmetric_mean(self):
        avgs = population_averages(
            [snap("a", 1.0, 10.0, 1.0), snap("b", 0.5, 10.0, 1.0), snap("c", 0.0, 10.0, 1.0)]
        )
        assert avgs.credibility == pytest.approx(0.5)

    def test_single_peer_is_its_own_average(self):
        avgs = population_averages([snap("a", 0.7, 42.0, 3.5)])
        assert (avgs.credibility, avgs.computation_time, avgs.distance) == (0.7, 42.0, 3.5)
        assert avgs.population_size == 1

    def test_hand_computed_means(self):
        peers = [
            snap("a", 1.0, 100.0, 1.0),
            snap("b", 1.0, 150.0, 2.0),
            snap("c", 1.0, 50.0, 3.0),
            snap("d", 1.0, 100.0, 2.0),
        ]
        avgs = population_averages(peers)
        # Cross-checked by direct summation: (100+150+50+100)/4, (1+2+3+2)/4.
        assert avgs.computation_time == pytest.approx(100.0)
        assert avgs.distance == pytest.approx(2.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            population_averages([])

    def test_unmeasured_rejected(self):
        with pytest.raises(ValueError):
            population_averages([snap("a", None, 1.0, 1.0)])
        with pytest.raises(ValueError):
            population_averages([snap("a", 1.0, 1.0, None)])

    @given(snapshot_populations())
    def test_averages_within_min_max(self, snapshots):
        avgs = population_averages(snapshots)
        times = [s.computation_time for s in snapshots]
        dists = [s.distance for s in snapshots]
        assert min(times) <= avgs.computation_time <= max(times)
        assert min(dists) <= avgs.distance <= max(dists)


class TestClassifyCoarse:
    def avgs(self):
        return population_averages(
            [snap("x", 1.0, 60.0, 1.5), snap("y", 1.0, 40.0, 2.5)]
        )  # PC_av=50, D_av=2.0

    def test_fast_and_near_is_g1(self):
        assert classify_coarse(snap("p", 1.0, 60.0, 1.5), self.avgs()) is CoarseClass.G1

    def test_boundary_is_inclusive(self):
        assert classify_coarse(snap("p", 1.0, 50.0, 2.0), self.avgs()) is CoarseClass.G1

    def test_slow_and_far_is_g4(self):
        assert classify_coarse(snap("p", 1.0, 40.0, 3.0), self.avgs()) is CoarseClass.G4

    def test_fast_and_far_is_g2(self):
        assert classify_coarse(snap("p", 1.0, 60.0, 2.5), self.avgs()) is CoarseClass.G2

    def test_slow_and_near_is_g3(self):
        assert classify_coarse(snap("p", 1.0, 40.0, 1.5), self.avgs()) is CoarseClass.G3


class TestAssignGroup:
    def test_credible_g1_joins_pg1(self):
        assert assign_group(CoarseClass.G1, 0.95, 0.9) is PeerGroup.PG1

    def test_noncredible_g1_falls_to_pg3(self):
        assert assign_group(CoarseClass.G1, 0.50, 0.9) is PeerGroup.PG3

    def test_credible_g2_joins_pg2(self):
        assert assign_group(CoarseClass.G2, 0.95, 0.9) is PeerGroup.PG2

    def test_noncredible_g2_falls_to_pg4(self):
        assert assign_group(CoarseClass.G2, 0.50, 0.9) is PeerGroup.PG4

    def test_g3_ignores_credibility(self):
        assert assign_group(CoarseClass.G3, 0.99, 0.9) is PeerGroup.PG3

    def test_g4_ignores_credibility(self):
        assert assign_group(CoarseClass.G4, 0.99, 0.9) is PeerGroup.PG4

    def test_threshold_boundary_inclusive(self):
        assert assign_group(CoarseClass.G1, 0.9, 0.9) is PeerGroup.PG1


class TestSelectEfficient:
    def test_empty_population_gives_empty_set(self):
        assert select_efficient([], 0.9) == set()

    def test_identical_peers_all_selected(self):
        peers = [snap(f"p{i}", 0.95, 100.0, 2.0) for i in range(4)]
        assert select_efficient(peers, 0.9) == {"p0", "p1", "p2", "p3"}

    def test_mixed_population_matches_hand_enumeration(self):
        peers = [
            snap("a", 0.95, 60.0, 1.5),  # G1, credible -> PG1
            snap("b", 0.50, 60.0, 1.5),  # G1, not credible -> PG3
            snap("c", 0.95, 60.0, 3.0),  # G2 -> PG2
            snap("d", 0.95, 40.0, 1.5),  # G3 -> PG3
            snap("e", 0.50, 40.0, 3.0),  # G4 -> PG4
        ]
        # PC_av = 52, D_av = 2.1
        assert select_efficient(peers, 0.9) == {"a"}
        assert select_efficient(peers, 0.9) == oracle_select(peers, 0.9)

    @given(snapshot_populations(), st.floats(0.01, 1.0))
    @settings(max_examples=200)
    def test_matches_brute_force_oracle(self, snapshots, mu):
        assert select_efficient(snapshots, mu) == oracle_select(snapshots, mu)

    @given(snapshot_populations(), st.floats(0.01, 1.0))
    @settings(max_examples=200)
    def test_groups_partition_population(self, snapshots, mu):
        groups = classify_population(snapshots, mu)
        assert set(groups) == {s.peer_id for s in snapshots}
        members = [group_members(groups, g) for g in PeerGroup]
        assert sum(len(m) for m in members) == len(snapshots)

    @given(snapshot_populations())
    def test_mu_zero_degenerates(self, snapshots):
        # With no effective credibility test, PG1 is exactly quadrant G1 and
        # PG3 receives only G3 peers.
        groups = classify_population(snapshots, 0.0)
        for _, (coarse, group) in groups.items():
            if coarse is CoarseClass.G1:
                assert group is PeerGroup.PG1
            if group is PeerGroup.PG3:
                assert coarse is CoarseClass.G3

    def test_raising_credibility_never_demotes_from_pg1(self):
        rng = random.Random(7)
        for _ in range(100):
            peers = [
                snap(f"p{i}", rng.random(), rng.uniform(0, 100), rng.uniform(0, 10))
                for i in range(rng.randint(2, 12))
            ]
            groups = classify_population(peers, 0.5)
            for i, peer in enumerate(peers):
                if groups[peer.peer_id][1] is not PeerGroup.PG1:
                    continue
                boosted = list(peers)
                boosted[i] = snap(peer.peer_id, min(1.0, peer.credibility + 0.1),
                                  peer.computation_time, peer.distance)
                assert classify_population(boosted, 0.5)[peer.peer_id][1] is PeerGroup.PG1


class TestScaleCovariance:
    @staticmethod
    def scaled(snapshots, k_time, k_dist):
        return [
            snap(s.peer_id, s.credibility, s.computation_time * k_time, s.distance * k_dist)
            for s in snapshots
        ]

    def test_common_scaling_preserves_classes(self):
        rng = random.Random(99)
        for _ in range(50):
            peers = [
                snap(f"p{i}", rng.random(), rng.uniform(0.1, 100), rng.uniform(0.1, 10))
                for i in range(rng.randint(1, 20))
            ]
            base = classify_population(peers, 0.8)
            for k in (0.25, 2.0, 10.0):
                assert classify_population(self.scaled(peers, k, 1.0), 0.8) == base
                assert classify_population(self.scaled(peers, 1.0, k), 0.8) == base
