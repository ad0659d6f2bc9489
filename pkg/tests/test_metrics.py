import pytest

from rplsim.engine import RunTranscript, run
from rplsim.errors import NoTraffic, ZeroDuration
from rplsim.metrics import (
    ConfusionMatrix,
    aggregate_rows,
    audit_conservation,
    confusion_from_transcript,
    detection_rates,
    pdr,
    plr,
    run_throughput_kbps,
    summarize_run,
    throughput,
)
from rplsim.scenario import ScenarioConfig
from rplsim.topology import Topology


def hand_transcript(delivered=1000, duration=1000.0, packet_size=512,
                    emitted=None, attackers=(), blacklist=(), node_count=4):
    """Transcript assembled by hand, independent of the engine."""
    cfg = ScenarioConfig(node_count=node_count, duration_s=duration,
                         packet_size_bytes=packet_size, malicious_fraction=0.0)
    topo = Topology.from_edges(node_count, [(0, i) for i in range(1, node_count)],
                               root_id=0, attackers=attackers)
    emitted = delivered if emitted is None else emitted
    return RunTranscript(cfg=cfg, topology=topo, attack_start_s=0.0,
                         end_time_s=duration, emitted=emitted, delivered=delivered,
                         root_blacklist=frozenset(blacklist))


class TestPdrPlr:
    def test_all_delivered(self):
        assert pdr([100], [100]) == 100.0

    def test_direct_ratio(self):
        assert pdr([200], [150]) == 75.0

    def test_mean_of_per_run_ratios(self):
        # (100% + 50%) / 2, not the pooled ratio
        assert pdr([100, 100], [100, 50]) == 75.0

    def test_plr_complement(self):
        assert plr([200], [150]) == 25.0
        assert plr([100], [100]) == 0.0
        assert plr([100], [0]) == 100.0

    def test_identity_holds(self):
        sent = [173, 200, 99]
        received = [120, 31, 99]
        assert pdr(sent, received) + plr(sent, received) == pytest.approx(100.0, abs=1e-9)

    def test_no_traffic(self):
        with pytest.raises(NoTraffic):
            pdr([0], [0])
        with pytest.raises(NoTraffic):
            plr([10, 0], [5, 0])


class TestDetectionRates:
    def test_hand_counts(self):
        rates = detection_rates(ConfusionMatrix(tp=98, fp=0, tn=350, fn=2))
        assert rates["dr_pct"] == 98.0
        assert rates["fnr_pct"] == 2.0
        assert rates["fpr_pct"] == 0.0

    def test_dr_plus_fnr_is_100(self):
        rates = detection_rates(ConfusionMatrix(tp=13, fp=2, tn=48, fn=7))
        assert rates["dr_pct"] + rates["fnr_pct"] == pytest.approx(100.0, abs=1e-9)

    def test_zero_denominators_are_undefined_markers(self):
        rates = detection_rates(ConfusionMatrix(tp=0, fp=0, tn=10, fn=0))
        assert rates["dr_pct"] is None
        assert rates["fnr_pct"] is None
        rates = detection_rates(ConfusionMatrix(tp=3, fp=0, tn=0, fn=0))
        assert rates["fpr_pct"] is None

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            ConfusionMatrix(tp=-1, fp=0, tn=0, fn=0)

    def test_confusion_from_transcript(self):
        tr = hand_transcript(node_count=6, attackers=(1, 2), blacklist=(1, 4))
        cm = confusion_from_transcript(tr)
        assert (cm.tp, cm.fp, cm.fn, cm.tn) == (1, 1, 1, 3)
        assert cm.tp + cm.fn == 2
        assert cm.fp + cm.tn == 4


class TestThroughput:
    def test_hand_built_transcript(self):
        # 1000 delivered 512-byte packets over 1000 s
        tr = hand_transcript(delivered=1000, duration=1000.0, packet_size=512)
        assert throughput([tr]) == pytest.approx(4.096, abs=1e-9)

    def test_zero_delivered(self):
        assert throughput([hand_transcript(delivered=0, emitted=10)]) == 0.0

    def test_mean_idempotent_for_equal_runs(self):
        tr = hand_transcript(delivered=500)
        assert throughput([tr, tr]) == throughput([tr])

    def test_linear_in_packet_size(self):
        a = run_throughput_kbps(100, 512, 0.0, 10.0)
        b = run_throughput_kbps(100, 1024, 0.0, 10.0)
        assert b == pytest.approx(2 * a)

    def test_zero_duration(self):
        with pytest.raises(ZeroDuration):
            run_throughput_kbps(10, 512, 5.0, 5.0)


class TestSummarizeAggregate:
    def test_summary_identities_on_real_runs(self):
        for seed in (1, 2):
            cfg = ScenarioConfig(node_count=40, area=(60.0, 60.0),
                                 malicious_fraction=0.2, duration_s=40.0, seed=seed)
            row = summarize_run(run(cfg), scenario="t")
            assert row["pdr_pct"] + row["plr_pct"] == pytest.approx(100.0, abs=1e-9)
            assert row["dr_pct"] + row["fnr_pct"] == pytest.approx(100.0, abs=1e-9)
            assert row["tp"] + row["fn"] == 8  # round(0.2 * 40)

    def test_zero_duration_run_has_undefined_ratios(self):
        cfg = ScenarioConfig(node_count=10, area=(30.0, 30.0), duration_s=0.0)
        row = summarize_run(run(cfg))
        assert row["pdr_pct"] is None
        assert row["throughput_kbps"] is None

    def test_aggregate_means_by_group(self):
        base = summarize_run(hand_transcript(delivered=100, emitted=100), scenario="x")
        other = dict(base, seed=2, delivered=50, pdr_pct=50.0, plr_pct=50.0,
                     throughput_kbps=base["throughput_kbps"] / 2)
        groups = aggregate_rows([base, other])
        assert len(groups) == 1
        agg = groups[0]
        assert agg["n_runs"] == 2
        assert agg["pdr_pct"] == 75.0
        assert agg["delivered"] == 75.0

    def test_aggregate_skips_undefined_values(self):
        a = summarize_run(hand_transcript(), scenario="x")
        b = dict(a, seed=2, dr_pct=None, fnr_pct=None)
        a = dict(a, dr_pct=80.0, fnr_pct=20.0)
        agg = aggregate_rows([a, b])[0]
        assert agg["dr_pct"] == 80.0

    def test_aggregate_separates_detection_toggle(self):
        a = summarize_run(hand_transcript(), scenario="x")
        b = dict(a, detection_enabled=False)
        assert len(aggregate_rows([a, b])) == 2


class TestConservationAudit:
    def test_detects_mismatched_counters(self):
        tr = run(ScenarioConfig(node_count=10, area=(30.0, 30.0), duration_s=10.0, seed=1))
        audit_conservation(tr)
        tr.delivered += 1
        with pytest.raises(ValueError):
            audit_conservation(tr)

    def test_detects_double_fate(self):
        tr = run(ScenarioConfig(node_count=10, area=(30.0, 30.0), duration_s=10.0, seed=1))
        tr.fates[0].drop_reason = "timeout"  # fate now both delivered and dropped
        with pytest.raises(ValueError):
            audit_conservation(tr)
