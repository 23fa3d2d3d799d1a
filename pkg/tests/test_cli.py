"""Command-line pipeline: config handling, exit codes, file outputs."""

import pytest

from rulelm import cli
from rulelm.cli import EXIT_CONFIG, EXIT_OK, EXIT_SCORER, load_config, main

from helpers import TOY_DIR


def parse_args(*argv):
    return cli.build_arg_parser().parse_args(list(argv))


class TestConfigDefaults:
    def test_empty_config_matches_reported_settings(self, tmp_path):
        empty = tmp_path / "empty.cfg"
        empty.write_text("")
        cfg = load_config(str(empty), parse_args("mine", "--config", str(empty)))
        assert cfg.mining.min_support == 10
        assert cfg.mining.min_std_conf == 0.1
        assert cfg.mining.min_head_coverage == 0.01
        assert cfg.split.ratio == 0.2
        assert cfg.hybrid.lambda_grid == tuple(i / 10 for i in range(11))
        assert cfg.hybrid.k_grid == (5, 10, 20, 50, 100)
        assert set(cfg.mu1_kinds) == {"standard_confidence", "pca_confidence"}

    def test_no_config_file_defaults(self):
        cfg = load_config(None, parse_args("mine"))
        assert cfg.mining.min_support == 10
        assert cfg.split.ratio == 0.2

    def test_missing_config_file_is_config_error(self):
        with pytest.raises(Exception, match="not found"):
            load_config("/nonexistent/cfg.ini", parse_args("mine"))

    def test_overrides_applied(self, tmp_path):
        cfg = load_config(
            None,
            parse_args(
                "sweep",
                "--seed", "9",
                "--lambda", "0,0.5,1",
                "--top-n", "7",
                "--mu1", "pca_confidence",
                "--min-support", "3",
                "--output-dir", str(tmp_path / "o"),
            ),
        )
        assert cfg.split.seed == 9
        assert cfg.hybrid.lambda_grid == (0.0, 0.5, 1.0)
        assert cfg.scorer.top_n == 7
        assert cfg.mu1_kinds == ("pca_confidence",)
        assert cfg.mining.min_support == 3


class TestExitCodes:
    def test_missing_kg_file_exits_2_and_names_path(self, tmp_path, caplog):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("[paths]\nkg = does_not_exist.tsv\n")
        code = main(["mine", "--config", str(cfg), "--output-dir", str(tmp_path / "out")])
        assert code == EXIT_CONFIG
        assert "does_not_exist.tsv" in caplog.text

    def test_unreachable_scorer_exits_3(self, tmp_path):
        out = tmp_path / "out"
        code = main([
            "mine",
            "--config", str(TOY_DIR / "toy.cfg"),
            "--output-dir", str(out),
        ])
        assert code == EXIT_OK
        code = main([
            "score",
            "--config", str(TOY_DIR / "toy.cfg"),
            "--output-dir", str(out),
            "--scorer", "http://127.0.0.1:1",  # nothing listens here
        ])
        assert code == EXIT_SCORER

    def test_empty_graph_exits_2(self, tmp_path):
        kg = tmp_path / "empty.tsv"
        kg.write_text("# nothing here\n")
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(f"[paths]\nkg = {kg}\n")
        code = main(["mine", "--config", str(cfg), "--output-dir", str(tmp_path / "out")])
        assert code == EXIT_CONFIG

    def test_sweep_without_scored_file_exits_2(self, tmp_path):
        code = main([
            "sweep",
            "--config", str(TOY_DIR / "toy.cfg"),
            "--output-dir", str(tmp_path / "fresh"),
        ])
        assert code == EXIT_CONFIG


class TestMine:
    def test_toy_mine_config_yields_expected_two_rules(self, tmp_path):
        out = tmp_path / "out"
        code = main(["mine", "--config", str(TOY_DIR / "toy_mine.cfg"), "--output-dir", str(out)])
        assert code == EXIT_OK
        rows = [
            line.split("\t")
            for line in (out / "rules.tsv").read_text().splitlines()
            if line and not line.startswith("#")
        ]
        assert [r[0] for r in rows] == [
            "bornIn(X,Z) <= politicianOf(X,Y), capitalOf(Y,Z)",
            "livesIn(X,Z) <= politicianOf(X,Y), capitalOf(Y,Z)",
        ]

    def test_split_mode_writes_metadata(self, tmp_path):
        cfg = tmp_path / "split.cfg"
        cfg.write_text(
            f"[paths]\nkg = {TOY_DIR / 'test.tsv'}\n\n"
            "[split]\nratio = 0.2\nseed = 5\n\n[mining]\nmin_support = 1\n"
        )
        out = tmp_path / "out"
        assert main(["mine", "--config", str(cfg), "--output-dir", str(out)]) == EXIT_OK
        assert (out / "train.tsv").is_file()
        meta = (out / "split_meta.tsv").read_text()
        assert "seed\t5" in meta
        assert "generator\tnumpy-pcg64" in meta


class TestScoreAndSweep:
    def run_all(self, out):
        return main(["run-all", "--config", str(TOY_DIR / "toy.cfg"), "--output-dir", str(out)])

    def test_rerun_is_byte_identical(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert self.run_all(out1) == EXIT_OK
        assert self.run_all(out2) == EXIT_OK
        for name in ("rules.tsv", "scored.tsv", "sweep.csv", "sweep_detail.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name

    def test_zero_novel_rule_scores_zero(self, tmp_path):
        kg = tmp_path / "kg.tsv"
        # the rule's only prediction is already a known fact
        kg.write_text("a\tp\tb\nb\tq\tc\na\th\tc\n")
        fixture = tmp_path / "fixture.tsv"
        fixture.write_text("")
        templates = tmp_path / "templates.tsv"
        templates.write_text("h\t{X} maps to [MASK]\np\t{X} p [MASK]\nq\t{X} q [MASK]\n")
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(
            f"[paths]\ntrain = {kg}\ntest = {kg}\ntemplates = {templates}\n\n"
            "[mining]\nmin_support = 1\n\n"
            f"[scorer]\nendpoint = fixture:{fixture}\n"
        )
        out = tmp_path / "out"
        assert main(["mine", "--config", str(cfg), "--output-dir", str(out)]) == EXIT_OK
        assert main(["score", "--config", str(cfg), "--output-dir", str(out)]) == EXIT_OK
        rows = [
            line.split("\t")
            for line in (out / "scored.tsv").read_text().splitlines()
            if line and not line.startswith("#")
        ]
        target = [r for r in rows if r[0].startswith("h(X,Z)")]
        assert target and float(target[0][7]) == 0.0
        assert target[0][10] == "0"  # nothing was sent to the scorer

    def test_lambda_grid_of_zero_gives_baseline_only_table(self, tmp_path):
        out = tmp_path / "out"
        code = main([
            "run-all",
            "--config", str(TOY_DIR / "toy.cfg"),
            "--output-dir", str(out),
            "--lambda", "0",
        ])
        assert code == EXIT_OK
        lines = (out / "sweep.csv").read_text().splitlines()
        assert len(lines) == 1 + 2 * 1 * 5
        assert all(",0," in line for line in lines[1:])

    def test_prediction_cap_bounds_scored_count_deterministically(self, tmp_path):
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(
            f"[paths]\ntrain = {TOY_DIR / 'train.tsv'}\ntest = {TOY_DIR / 'test.tsv'}\n"
            f"labels = {TOY_DIR / 'labels.tsv'}\ntemplates = {TOY_DIR / 'templates.tsv'}\n\n"
            "[mining]\nmin_support = 1\n\n"
            f"[scorer]\nendpoint = fixture:{TOY_DIR / 'scorer_fixture.tsv'}\n"
            "top_n = 3\nmax_predictions_per_rule = 1\n"
        )
        outputs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["mine", "--config", str(cfg), "--output-dir", str(out)]) == EXIT_OK
            assert main(["score", "--config", str(cfg), "--output-dir", str(out)]) == EXIT_OK
            outputs.append((out / "scored.tsv").read_bytes())
            rows = [
                line.split("\t")
                for line in (out / "scored.tsv").read_text().splitlines()
                if line and not line.startswith("#")
            ]
            assert all(int(r[10]) <= 1 for r in rows)
        assert outputs[0] == outputs[1]

    def test_single_mu1_kind_halves_the_table(self, tmp_path):
        out = tmp_path / "out"
        code = main([
            "run-all",
            "--config", str(TOY_DIR / "toy.cfg"),
            "--output-dir", str(out),
            "--mu1", "pca_confidence",
        ])
        assert code == EXIT_OK
        lines = (out / "sweep.csv").read_text().splitlines()
        assert len(lines) == 1 + 11 * 5
        assert all(line.startswith("pca_confidence,") for line in lines[1:])

    def test_missing_template_is_config_error_by_default(self, tmp_path):
        kg = tmp_path / "kg.tsv"
        kg.write_text("a\tp\tb\nb\tq\tc\na\th\tc\nd\tp\te\ne\tq\tf\n")
        fixture = tmp_path / "fixture.tsv"
        fixture.write_text("")
        templates = tmp_path / "templates.tsv"
        templates.write_text("p\t{X} p [MASK]\n")  # no template for h
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(
            f"[paths]\ntrain = {kg}\ntest = {kg}\ntemplates = {templates}\n\n"
            "[mining]\nmin_support = 1\n\n"
            f"[scorer]\nendpoint = fixture:{fixture}\n"
        )
        out = tmp_path / "out"
        assert main(["mine", "--config", str(cfg), "--output-dir", str(out)]) == EXIT_OK
        assert main(["score", "--config", str(cfg), "--output-dir", str(out)]) == EXIT_CONFIG
        # with the skip flag the run succeeds and the rule scores zero
        cfg.write_text(
            f"[paths]\ntrain = {kg}\ntest = {kg}\ntemplates = {templates}\n\n"
            "[mining]\nmin_support = 1\n\n"
            f"[scorer]\nendpoint = fixture:{fixture}\nskip_missing_templates = true\n"
        )
        assert main(["score", "--config", str(cfg), "--output-dir", str(out)]) == EXIT_OK
