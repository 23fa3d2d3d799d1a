"""Hybrid scoring, ranking ties, precision arithmetic and sweep tables."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rulelm import kg_store, ranker_eval, rule_miner
from rulelm.kg_store import Triple
from rulelm.ranker_eval import (
    HybridConfig,
    ScoredRule,
    emit_table,
    hybrid_score,
    pred_prec_rule,
    pred_prec_set,
    rank_rules,
    sweep,
)
from rulelm.rule_miner import MiningConfig, Prediction, Rule, RuleStats

from helpers import TOY_DIR

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


def scored(rule_id, support=1, std=0.5, pca=0.5, m2=0.5, kind="standard_confidence"):
    rule = Rule(0, 1, 2, rule_id)
    stats = RuleStats(
        support=support,
        body_count=max(support * 2, 1),
        pca_body_count=max(support, 1),
        std_conf=std,
        pca_conf=pca,
        head_coverage=0.5,
    )
    return ScoredRule(rule, stats, kind, m2)


class TestHybridScore:
    def test_midpoint(self):
        assert hybrid_score(0.5, 0.8, 0.5) == pytest.approx(0.65)

    def test_lambda_zero_is_mu1(self):
        assert hybrid_score(0.37, 0.9, 0.0) == 0.37

    def test_lambda_one_is_mu2(self):
        assert hybrid_score(0.37, 0.9, 1.0) == 0.9

    @pytest.mark.parametrize("bad", [(-0.1, 0, 0), (0, 1.2, 0), (0, 0, 7)])
    def test_out_of_range_rejected(self, bad):
        with pytest.raises(ValueError):
            hybrid_score(*bad)

    @given(unit, unit, unit)
    def test_linearity_and_bounds(self, mu1, mu2, lam):
        value = hybrid_score(mu1, mu2, lam)
        assert value == pytest.approx((1 - lam) * mu1 + lam * mu2, abs=1e-12)
        assert -1e-12 <= value <= 1 + 1e-12


class TestRankRules:
    def test_higher_score_first(self):
        a = scored("a", std=0.7)
        b = scored("b", std=0.6)
        ranked = rank_rules([b, a], lam=0.0)
        assert [r.rule.rule_id for r, _ in ranked] == ["a", "b"]

    def test_tie_broken_by_support(self):
        a = scored("a", support=12, std=0.5)
        b = scored("b", support=11, std=0.5)
        ranked = rank_rules([b, a], lam=0.0)
        assert [r.rule.rule_id for r, _ in ranked] == ["a", "b"]

    def test_full_tie_broken_by_rule_id(self):
        a = scored("alpha")
        b = scored("beta")
        ranked = rank_rules([b, a], lam=0.3)
        assert [r.rule.rule_id for r, _ in ranked] == ["alpha", "beta"]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            rank_rules([], 0.5)

    def test_boundary_permutations_match_single_metric_sorts(self):
        rng = np.random.default_rng(8)
        pool = [0.0, 0.25, 0.5, 0.75, 1.0]
        rules = [
            scored(
                f"r{i:03d}",
                support=int(rng.integers(1, 5)),
                std=float(rng.choice(pool)),
                pca=float(rng.choice(pool)),
                m2=float(rng.choice(pool)),
            )
            for i in range(40)
        ]
        by_mu1 = sorted(rules, key=lambda r: (-r.mu1, -r.stats.support, r.rule.rule_id))
        assert [r.rule.rule_id for r, _ in rank_rules(rules, 0.0)] == [
            r.rule.rule_id for r in by_mu1
        ]
        by_mu2 = sorted(rules, key=lambda r: (-r.mu2, -r.stats.support, r.rule.rule_id))
        assert [r.rule.rule_id for r, _ in rank_rules(rules, 1.0)] == [
            r.rule.rule_id for r in by_mu2
        ]

    def test_input_order_irrelevant(self):
        rng = np.random.default_rng(9)
        rules = [scored(f"r{i}", m2=float(rng.random())) for i in range(20)]
        shuffled = rules[:]
        rng.shuffle(shuffled)
        assert rank_rules(rules, 0.4) == rank_rules(shuffled, 0.4)


def preds(rule_id, facts_with_novel):
    return [Prediction(Triple(*fact), rule_id, novel) for fact, novel in facts_with_novel]


class TestPredPrec:
    @pytest.fixture
    def graphs(self):
        test = kg_store.from_named_triples(
            [
                ("a", "h", "b"),
                ("c", "h", "d"),
                ("e", "h", "f"),
                ("g", "h", "i"),
                ("j", "h", "k"),
                ("x", "p", "y"),
            ]
        )
        train, _ = kg_store.split_train_test(test, kg_store.SplitSpec(0.0, 0))
        # drop two h facts from the train side by name
        keep = {
            t
            for t in test.triples
            if test.triple_names(t) not in {("e", "h", "f"), ("g", "h", "i")}
        }
        return test.subset(keep), test

    def test_two_of_three_novel_confirmed(self, graphs):
        train, test = graphs
        h = train.relation_ids["h"]
        e = {name: train.entity_ids[name] for name in "abcdefgijk"}
        items = preds(
            "r",
            [
                ((e["a"], h, e["b"]), False),  # known in train
                ((e["e"], h, e["f"]), True),   # in test
                ((e["g"], h, e["i"]), True),   # in test
                ((e["a"], h, e["k"]), True),   # nowhere
            ],
        )
        assert pred_prec_rule(train, test, items) == pytest.approx(2 / 3)

    def test_no_novel_predictions_undefined(self, graphs):
        train, test = graphs
        h = train.relation_ids["h"]
        a, b = train.entity_ids["a"], train.entity_ids["b"]
        assert pred_prec_rule(train, test, preds("r", [((a, h, b), False)])) is None

    def test_all_confirmed(self, graphs):
        train, test = graphs
        h = train.relation_ids["h"]
        e, f = train.entity_ids["e"], train.entity_ids["f"]
        assert pred_prec_rule(train, test, preds("r", [((e, h, f), True)])) == 1.0

    def test_cross_universe_membership_by_name(self, tmp_path):
        # independently loaded graphs intern entities differently
        train_file = tmp_path / "train.tsv"
        test_file = tmp_path / "test.tsv"
        train_file.write_text("a\tp\tb\nc\th\td\n")
        test_file.write_text("x\tq\ty\nc\th\td\na\th\tb\n")
        train = kg_store.load_triples(train_file)
        test = kg_store.load_triples(test_file)
        h = train.relation_ids["h"]
        a, b, c, d = (train.entity_ids[n] for n in "abcd")
        items = preds("r", [((a, h, b), True), ((c, h, a), True)])
        assert pred_prec_rule(train, test, items) == pytest.approx(0.5)


class TestPredPrecSet:
    def test_mean(self):
        assert pred_prec_set([1.0, 0.5]) == (0.75, 0)

    def test_undefined_skipped_and_counted(self):
        assert pred_prec_set([1.0, None]) == (1.0, 1)

    def test_all_zero(self):
        assert pred_prec_set([0.0, 0.0, 0.0]) == (0.0, 0)

    def test_all_undefined_rejected(self):
        with pytest.raises(ValueError):
            pred_prec_set([None, None])


def toy_scored_rules(kinds=("standard_confidence", "pca_confidence")):
    train = kg_store.load_triples(TOY_DIR / "train.tsv")
    test = kg_store.load_triples(TOY_DIR / "test.tsv")
    mined = rule_miner.mine_rules(train, MiningConfig(1, 0.1, 0.01))
    rng = np.random.default_rng(4)
    rules = [
        ScoredRule(rule, stats, kind, float(rng.integers(0, 5)) / 4)
        for rule, stats in mined
        for kind in kinds
    ]
    return rules, train, test


class TestSweep:
    def test_cells_and_shapes(self):
        rules, train, test = toy_scored_rules()
        config = HybridConfig(lambda_grid=(0.0, 0.5, 1.0), k_grid=(2, 5, 100))
        rows = sweep(rules, train, test, config)
        assert len(rows) == 2 * 3 * 3
        for row in rows:
            assert 0.0 <= row.avg_precision <= 1.0
            assert row.n_rules_counted <= row.k

    def test_lambda_zero_column_equals_mu1_baseline(self):
        rules, train, test = toy_scored_rules(kinds=("standard_confidence",))
        config = HybridConfig(lambda_grid=(0.0,), k_grid=(3,))
        (row,) = sweep(rules, train, test, config)
        baseline = sorted(rules, key=lambda r: (-r.mu1, -r.stats.support, r.rule.rule_id))[:3]
        expected, _ = pred_prec_set(
            [
                pred_prec_rule(train, test, rule_miner.apply_rule(train, r.rule))
                for r in baseline
            ]
        )
        assert row.avg_precision == pytest.approx(expected)

    def test_lambda_one_column_uses_mu2_only(self):
        rules, train, test = toy_scored_rules(kinds=("pca_confidence",))
        config = HybridConfig(lambda_grid=(1.0,), k_grid=(3,))
        (row,) = sweep(rules, train, test, config)
        baseline = sorted(rules, key=lambda r: (-r.mu2, -r.stats.support, r.rule.rule_id))[:3]
        expected, _ = pred_prec_set(
            [
                pred_prec_rule(train, test, rule_miner.apply_rule(train, r.rule))
                for r in baseline
            ]
        )
        assert row.avg_precision == pytest.approx(expected)

    def test_top_k_nesting(self):
        rules, _, _ = toy_scored_rules()
        for lam in (0.0, 0.3, 1.0):
            ranked = rank_rules([r for r in rules if r.mu1_kind == "pca_confidence"], lam)
            top5 = [r.rule.rule_id for r, _ in ranked[:5]]
            top10 = [r.rule.rule_id for r, _ in ranked[:10]]
            assert top10[: len(top5)] == top5

    def test_k_larger_than_rule_count_uses_all(self):
        rules, train, test = toy_scored_rules(kinds=("standard_confidence",))
        config = HybridConfig(lambda_grid=(0.0,), k_grid=(100,))
        (row,) = sweep(rules, train, test, config)
        assert row.n_rules_counted == len(rules)


class TestEmitTable:
    def test_single_row_two_lines(self, tmp_path):
        path = tmp_path / "t.csv"
        emit_table([ranker_eval.SweepRow("pca_confidence", 0.5, 10, 1 / 3, 7, 1)], path)
        lines = path.read_text().splitlines()
        assert lines == [
            "mu1_kind,lambda,k,avg_precision,n_rules",
            "pca_confidence,0.5,10,0.333333,7",
        ]

    def test_reemission_identical(self, tmp_path):
        rules, train, test = toy_scored_rules()
        rows = sweep(rules, train, test, HybridConfig())
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_table(rows, p1)
        emit_table(list(reversed(rows)), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_default_grids_give_110_rows(self, tmp_path):
        rules, train, test = toy_scored_rules()
        rows = sweep(rules, train, test, HybridConfig())
        assert len(rows) == 2 * 11 * 5
        path = tmp_path / "t.csv"
        emit_table(rows, path)
        assert len(path.read_text().splitlines()) == 111

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_table([], tmp_path / "t.csv")


class TestScoredRule:
    def test_mu1_follows_kind(self):
        rule = scored("r", std=0.3, pca=0.9, kind="standard_confidence")
        assert rule.mu1 == 0.3
        assert scored("r", std=0.3, pca=0.9, kind="pca_confidence").mu1 == 0.9

    def test_invalid_kind_rejected(self):
        with pytest.raises(ValueError):
            scored("r", kind="bogus")

    def test_mu2_range_enforced(self):
        with pytest.raises(ValueError):
            scored("r", m2=1.5)
