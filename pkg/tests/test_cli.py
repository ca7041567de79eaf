import csv

import pytest

from kgcrf.bench import read_runs
from kgcrf.cli import build_parser, config_from_args, main


def parse(*argv):
    return config_from_args(build_parser().parse_args(list(argv)))


class TestParsing:
    def test_sizes_and_lists(self):
        cfg = parse("fitness", "--sizes", "5x6,7X8", "--densities", "0.2,0.4", "--reps", "3")
        assert cfg.sizes == ((5, 6), (7, 8)) and cfg.densities == (0.2, 0.4) and cfg.reps == 3

    def test_default_models(self):
        assert "base_svd" not in parse("fitness").models
        assert "base_svd" in parse("nkp").models

    def test_debug_model_appended(self):
        assert parse("fitness", "--models", "msn", "--debug-beta0").models == ("msn", "beta0")

    def test_suite_defaults(self):
        cfg = parse("robustness")
        assert cfg.output_noises == (0.0, 0.25, 0.33, 0.5) and cfg.densities == (0.5,)
        assert parse("nkp").nkp_noises == (0.0, 0.05, 0.1, 0.15, 0.2, 0.4, 0.6)

    def test_fit_options(self):
        cfg = parse("fitness", "--tol", "1e-4", "--max-iter", "7", "--pairing", "rayleigh")
        assert cfg.fit_options.tol == 1e-4 and cfg.fit_options.max_iter == 7 and cfg.pairing_mode == "rayleigh"

    @pytest.mark.parametrize("argv", [["fitness", "--models", "exact"], ["fitness", "--sizes", "30-50"],
                                      ["speed"], ["fitness", "--graph", "grid"], ["fitness", "--reps", "0"]])
    def test_rejected(self, argv, capsys):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


class TestMain:
    def test_tiny_fitness_run(self, tmp_path):
        out = tmp_path / "out"
        code = main(["fitness", "--sizes", "5x6", "--densities", "0.5", "--reps", "3", "--models",
                     "base,msn", "--out", str(out)])
        assert code == 0
        recs = read_runs(out / "runs.csv")
        assert len(recs) == 6 and {r.model for r in recs} == {"base", "msn"}
        with open(out / "summary.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2 and all(float(r["trimmed_mse"]) >= 0 for r in rows)
        assert len(list((out / "plotdata").iterdir())) == 2

    def test_nkp_run(self, tmp_path):
        code = main(["nkp", "--sizes", "5x6", "--densities", "0.5", "--nkp-noises", "0,0.1", "--reps", "3",
                     "--out", str(tmp_path)])
        assert code == 0
        recs = read_runs(tmp_path / "runs.csv")
        assert {r.nkp_noise for r in recs} == {0.0, 0.1}

    def test_failures_give_exit_code_two(self, tmp_path, monkeypatch, capsys):
        import kgcrf.graph as graph
        monkeypatch.setattr(graph, "DENSE_CAP", 20)
        code = main(["timing", "--sizes", "5x6", "--densities", "0.5", "--reps", "3", "--models", "base,laplace_vec",
                     "--out", str(tmp_path)])
        assert code == 2
        assert "3 of 6 runs failed" in capsys.readouterr().err
        assert sum(r.failed for r in read_runs(tmp_path / "runs.csv")) == 3
