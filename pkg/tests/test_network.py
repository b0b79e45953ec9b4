import pytest

from qscnsim.network import (
    ConsumeResult,
    LinkState,
    RecoveryPolicy,
    Topology,
    TopologyError,
    load_topology,
)


def make_link(link_id="l1", rate=1000.0, pool=10_000.0, threshold=1_000.0):
    return LinkState(
        link_id=link_id,
        endpoints=("a", "b"),
        length_km=10.0,
        r_k=rate,
        pool_initial=pool,
        threshold=threshold,
    )


class TestLinkPools:
    def test_consume_arithmetic(self):
        link = make_link(pool=40e6, threshold=2e6)
        assert link.consume(4000, now=0.0) is ConsumeResult.OK
        assert link.pool == 40e6 - 4000

    def test_replenish_caps_at_initial(self):
        link = make_link(rate=233e3, pool=40e6, threshold=2e6)
        link.consume(233_000, now=0.0)
        link.replenish(1.0)
        assert link.pool == pytest.approx(40e6)
        link.replenish(5.0)  # already at cap
        assert link.pool == pytest.approx(40e6)

    def test_zero_dt_no_change(self):
        link = make_link()
        before = link.pool
        link.replenish(0.0)
        assert link.pool == before

    def test_threshold_crossing_breaks(self):
        link = make_link(rate=0.0, pool=10_000.0, threshold=9_000.0)
        assert link.consume(100, now=0.0) is ConsumeResult.OK
        assert not link.broken
        assert link.consume(2000, now=0.0) is ConsumeResult.OK
        assert link.broken

    def test_broken_link_rejects_traffic(self):
        link = make_link(rate=0.0, pool=10_000.0, threshold=9_999.0)
        link.consume(100, now=0.0)
        assert link.broken
        with pytest.raises(RuntimeError):
            link.consume(100, now=1.0)

    def test_insufficient_leaves_pool_untouched(self):
        link = make_link(rate=0.0, pool=1_000.0, threshold=0.0)
        assert link.consume(5_000, now=0.0) is ConsumeResult.INSUFFICIENT
        assert link.pool == 1_000.0
        assert link.ledger.data == 0.0

    def test_ledger_conservation(self):
        link = make_link(rate=500.0, pool=10_000.0, threshold=100.0)
        link.consume(3000, now=1.0)
        link.consume(64, now=2.5, routing=True)
        link.accrue(4.0)
        topo = Topology.build(["a", "b"], [link])
        assert topo.ledger_residual(link) == pytest.approx(0.0, abs=1e-9)
        # generation at cap is discarded: only the 1.5 s before each of
        # the two below-cap intervals is credited
        assert link.ledger.generated == pytest.approx(1500.0)
        assert link.ledger.data == 3000.0
        assert link.ledger.routing == 64.0

    def test_recovery_full_vs_threshold(self):
        link = make_link(rate=100.0, pool=10_000.0, threshold=9_000.0)
        link.consume(1_500, now=0.0)
        assert link.broken
        assert link.time_to_recover(0.0, RecoveryPolicy.FULL) == pytest.approx(15.0)
        assert link.time_to_recover(0.0, RecoveryPolicy.THRESHOLD) == pytest.approx(5.0)

    def test_never_recovers_without_generation(self):
        link = make_link(rate=0.0, pool=10_000.0, threshold=9_000.0)
        link.consume(1_500, now=0.0)
        assert link.time_to_recover(0.0, RecoveryPolicy.FULL) is None

    def test_threshold_must_be_below_pool(self):
        with pytest.raises(ValueError):
            make_link(pool=1_000.0, threshold=1_000.0)


class TestTopology:
    def test_two_node_toy(self):
        topo = Topology.build(["a", "b"], [make_link()])
        assert topo.link_between("a", "b").link_id == "l1"
        assert topo.reachable_from("a") == {"a", "b"}

    def test_unknown_node_rejected(self):
        bad = LinkState("lx", ("a", "z"), 1.0, 0.0, 100.0, 10.0)
        with pytest.raises(TopologyError):
            Topology.build(["a", "b"], [bad])

    def test_duplicate_link_id_rejected(self):
        with pytest.raises(TopologyError):
            Topology.build(["a", "b"], [make_link(), make_link()])

    def test_disconnected_rejected(self):
        link = make_link()
        with pytest.raises(TopologyError):
            Topology.build(["a", "b", "c"], [link])

    def test_broken_links_excluded_from_reachability(self):
        link = make_link(rate=0.0, pool=10_000.0, threshold=9_999.0)
        topo = Topology.build(["a", "b"], [link])
        link.consume(100, now=0.0)
        assert topo.reachable_from("a") == {"a"}
        assert topo.alive_neighbors("a") == []


class TestLoadTopology:
    def test_bundled_rates_computed_once(self, secoqc):
        topo = load_topology(secoqc)
        assert topo.links["e1"].r_k == pytest.approx(233e3, rel=0.05)
        assert topo.links["e1"].length_km == 85.0
        # every shorter link generates faster than the bottleneck
        for link_id, link in topo.links.items():
            if link_id != "e1":
                assert link.r_k > topo.links["e1"].r_k

    def test_pool_and_threshold_resolved(self, secoqc):
        topo = load_topology(secoqc)
        assert topo.links["e1"].pool_initial == 40e6
        assert topo.links["e1"].threshold == 2e6
