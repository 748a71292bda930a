from __future__ import annotations

import pytest

from topicwatch.coherence import CoherenceConfig
from topicwatch.lda.model import LdaConfig
from topicwatch.modelsel import SelectionRule, SweepResult, select_k, sweep

from conftest import make_doc, make_week


def result(k, interval, coherence, week=1, seed=0):
    return SweepResult(
        week_index=week,
        network="lj",
        k=k,
        optimize_interval=interval,
        seed=seed,
        coherence=coherence,
        per_topic={},
        runtime_seconds=0.0,
    )


def curve_results(curve: dict[int, float], interval: int):
    return [result(k, interval, v) for k, v in curve.items()]


class TestSelectK:
    def test_monotone_curve_falls_back_to_global_argmax(self):
        results = curve_results({k: 0.1 * k for k in range(2, 8)}, interval=10)
        selection = select_k(results, SelectionRule(epsilon_fraction=0.0, min_shared=1))
        assert selection.k == 7
        assert selection.shared_peaks in ((), (7,))  # endpoint local max allowed
        assert any("global argmax" in line for line in selection.audit)

    def test_two_intervals_sharing_interior_peak(self):
        base = {9: 0.30, 11: 0.35, 13: 0.42, 15: 0.36, 17: 0.31}
        results = curve_results(base, 10) + curve_results(
            {k: v - 0.01 for k, v in base.items()}, 100
        )
        rule = SelectionRule(epsilon_fraction=0.05, min_shared=2)
        selection = select_k(results, rule)
        assert selection.k == 13
        assert 13 in selection.shared_peaks

    def test_epsilon_trades_peak_height_for_smaller_k(self):
        # peaks at 7 and 12; 12 is the global max
        curve = {5: 0.20, 7: 0.40, 9: 0.25, 12: 0.42, 14: 0.30}
        results = curve_results(curve, 10)
        strict = select_k(results, SelectionRule(epsilon_fraction=0.0, min_shared=1))
        assert strict.k == 12
        gap_fraction = (0.42 - 0.40) / 0.42
        loose = select_k(
            results, SelectionRule(epsilon_fraction=gap_fraction + 1e-9, min_shared=1)
        )
        assert loose.k == 7

    def test_min_shared_capped_at_interval_count(self):
        curve = {5: 0.2, 7: 0.4, 9: 0.25}
        results = curve_results(curve, 10)
        selection = select_k(results, SelectionRule(epsilon_fraction=0.0, min_shared=3))
        assert selection.k == 7  # one interval present, quorum capped to 1

    def test_order_invariance(self):
        curve = {5: 0.2, 7: 0.4, 9: 0.25, 12: 0.42, 14: 0.3}
        results = curve_results(curve, 10) + curve_results(
            {k: v * 0.9 for k, v in curve.items()}, 50
        )
        rule = SelectionRule(epsilon_fraction=0.1, min_shared=2)
        forward = select_k(results, rule)
        backward = select_k(list(reversed(results)), rule)
        assert forward.k == backward.k

    def test_positive_scaling_invariance(self):
        curve = {5: 0.2, 7: 0.4, 9: 0.25, 12: 0.42, 14: 0.3}
        rule = SelectionRule(epsilon_fraction=0.05, min_shared=1)
        base = select_k(curve_results(curve, 10), rule)
        scaled = select_k(
            curve_results({k: 3.5 * v for k, v in curve.items()}, 10), rule
        )
        assert base.k == scaled.k

    def test_single_interval_epsilon_zero_degenerates_to_argmax(self):
        curve = {2: 0.1, 3: 0.5, 4: 0.3, 5: 0.45}
        selection = select_k(
            curve_results(curve, 10), SelectionRule(epsilon_fraction=0.0, min_shared=1)
        )
        assert selection.k == 3

    def test_seeds_averaged_within_cell(self):
        results = [
            result(3, 10, 0.2, seed=0),
            result(3, 10, 0.6, seed=1),  # mean 0.4
            result(4, 10, 0.35, seed=0),
            result(4, 10, 0.35, seed=1),  # mean 0.35
        ]
        selection = select_k(results, SelectionRule(epsilon_fraction=0.0, min_shared=1))
        assert selection.k == 3

    def test_failed_cells_ignored(self):
        results = curve_results({2: 0.2, 3: 0.4}, 10)
        results.append(
            SweepResult(
                week_index=1,
                network="lj",
                k=4,
                optimize_interval=10,
                seed=0,
                coherence=float("nan"),
                per_topic={},
                runtime_seconds=0.0,
                error="ValueError: boom",
            )
        )
        selection = select_k(results, SelectionRule(epsilon_fraction=0.0, min_shared=1))
        assert selection.k == 3

    def test_empty_results_error(self):
        with pytest.raises(ValueError):
            select_k([], SelectionRule())

    def test_fig2_style_shared_peak_at_13(self):
        # five interval curves with an interior peak at k=13; three of them
        # make it a strict local maximum within epsilon of the global max
        ks = list(range(5, 26))
        results = []
        for i, interval in enumerate((10, 50, 100, 500, 1000)):
            curve = {}
            for k in ks:
                base = 0.30 + 0.004 * k
                if interval in (10, 50, 100):
                    bump = 0.08 if k == 13 else 0.0
                else:
                    bump = 0.08 if k == 17 else 0.0
                curve[k] = base + bump - 0.0001 * i
            results.extend(curve_results(curve, interval))
        rule = SelectionRule(epsilon_fraction=0.05, min_shared=3)
        selection = select_k(results, rule)
        assert selection.k == 13
        assert 13 in selection.shared_peaks
        # audit names every candidate k and the final decision
        assert sum(1 for line in selection.audit if line.startswith("k=")) == len(ks)
        assert any("smallest shared peak" in line for line in selection.audit)


class TestSweep:
    def make_week(self):
        docs = []
        for i in range(6):
            docs.append(make_doc(f"a{i}", ["ant", "axe", "arc", "ant"]))
            docs.append(make_doc(f"b{i}", ["bow", "bug", "bin", "bug"]))
        return make_week(docs)

    def base_cfg(self):
        return LdaConfig(k=2, iterations=10, burn_in=2, optimize_interval=0, seed=0)

    def test_cardinality(self, tmp_path):
        week = self.make_week()
        results = sweep(
            week,
            ks=[2, 3, 4],
            intervals=[10],
            seeds=[0],
            base_cfg=self.base_cfg(),
            coherence_cfg=CoherenceConfig(top_n=2, window=4),
        )
        assert len(results) == 3
        assert all(r.error is None for r in results)

    def test_resume_reproduces_identical_results(self, tmp_path):
        week = self.make_week()
        path = tmp_path / "results.jsonl"
        kwargs = dict(
            ks=[2, 3],
            intervals=[5, 10],
            seeds=[0, 1],
            base_cfg=self.base_cfg(),
            coherence_cfg=CoherenceConfig(top_n=2, window=4),
        )
        full = sweep(week, results_path=path, **kwargs)
        full_bytes = path.read_bytes()

        # simulate an interrupted run: keep only the first 3 result lines
        lines = full_bytes.decode().strip().split("\n")
        partial_path = tmp_path / "partial.jsonl"
        partial_path.write_text("\n".join(lines[:3]) + "\n")
        resumed = sweep(week, results_path=partial_path, **kwargs)
        assert partial_path.read_bytes() == full_bytes
        assert [r.key() for r in resumed] == [r.key() for r in full]
        assert [r.coherence for r in resumed] == pytest.approx(
            [r.coherence for r in full]
        )

    def test_individual_failure_recorded_not_fatal(self, tmp_path):
        week = self.make_week()  # vocabulary size 6
        results = sweep(
            week,
            ks=[2, 7],  # k=7 exceeds V=6 and must fail
            intervals=[10],
            seeds=[0],
            base_cfg=self.base_cfg(),
            coherence_cfg=CoherenceConfig(top_n=2, window=4),
        )
        by_k = {r.k: r for r in results}
        assert by_k[2].error is None
        assert by_k[7].error is not None and "vocabulary" in by_k[7].error
