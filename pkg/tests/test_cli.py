import csv
import io
import json

import jsonschema
import numpy as np
import pytest

from lassolab.cli import main
from lassolab.csvio import emit_matrix, emit_vector
from lassolab.designs import DesignSpec, generate_design
from lassolab.errors import PreconditionError
from lassolab.experiment import ExperimentConfig, SparseSpec, report_schema, run_experiment
from lassolab.oracle import LambdaRule, NoiseModel, verify_bounds

SCHEMA = report_schema()

INVOCATIONS = {
    "gen-design": ["gen-design", "--family", "equicorrelated", "--p", "5", "--rho", "0.3"],
    "check-conditions": [
        "check-conditions", "--family", "equicorrelated", "--p", "5", "--rho", "0.2",
        "--s", "4", "--checks", "mip,rip,nullspace,compatibility,restricted,adaptive,strong,weak_ir,uniform_ir,implications",
    ],
    "solve": ["solve", "--family", "gaussian", "--n", "20", "--p", "30", "--s", "3", "--magnitude", "2"],
    "verify-bounds": ["verify-bounds", "--family", "gaussian", "--n", "30", "--p", "40", "--s", "3"],
    "simulate": ["simulate", "--family", "gaussian", "--n", "30", "--p", "40", "--s", "3", "--reps", "4"],
    "recovery-check": ["recovery-check", "--family", "equicorrelated", "--p", "5", "--rho", "0.4", "--s", "4"],
}


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestReports:
    @pytest.mark.parametrize("command", sorted(INVOCATIONS))
    def test_json_validates(self, command, capsys):
        code, out, _ = run(INVOCATIONS[command], capsys)
        assert code == 0
        report = json.loads(out)
        jsonschema.validate(report, SCHEMA)
        assert report["command"] == command

    @pytest.mark.parametrize("command", sorted(INVOCATIONS))
    def test_csv_is_rectangular(self, command, capsys):
        code, out, _ = run(INVOCATIONS[command] + ["--format", "csv"], capsys)
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert len(rows) >= 2
        assert len({len(r) for r in rows}) == 1

    @pytest.mark.parametrize("command", sorted(INVOCATIONS))
    def test_deterministic(self, command, capsys):
        a = run(INVOCATIONS[command] + ["--seed", "11"], capsys)[1]
        b = run(INVOCATIONS[command] + ["--seed", "11"], capsys)[1]
        assert a == b

    def test_out_file(self, tmp_path, capsys):
        target = tmp_path / "r.json"
        code, out, _ = run(INVOCATIONS["simulate"] + ["--out", str(target)], capsys)
        assert code == 0 and out == ""
        jsonschema.validate(json.loads(target.read_text()), SCHEMA)

    def test_check_conditions_values(self, capsys):
        argv = ["check-conditions", "--family", "equicorrelated", "--rho", "0.5", "--support", "1,2,3,4",
                "--checks", "weak_ir,rip", "--tau-signs", "1,1,1,1"]
        report = json.loads(run(argv, capsys)[1])
        by = {r["name"]: r for r in report["condition_reports"]}
        assert by["weak_irrepresentable"]["value"] == pytest.approx(2.0, abs=1e-9)
        assert by["rip_constant"]["value"] == pytest.approx(np.sqrt(3) / 2, abs=1e-9)
        assert report["config"]["support"] == [1, 2, 3, 4]

    def test_design_round_trip_through_files(self, tmp_path, capsys):
        X = generate_design(DesignSpec("gaussian", p=6, n=12, seed=1)).X
        b = np.array([1.0, -1.0, 0, 0, 0, 0])
        emit_matrix(tmp_path / "X.csv", X)
        emit_vector(tmp_path / "Y.csv", X @ b)
        argv = ["solve", "--design", str(tmp_path / "X.csv"), "--response", str(tmp_path / "Y.csv"), "--lambda", "0.01"]
        report = json.loads(run(argv, capsys)[1])
        np.testing.assert_allclose(report["results"]["beta"][:2], [1, -1], atol=0.05)

    def test_empty_beta_file(self, capsys):
        argv = ["solve", "--family", "example1", "--beta0", "/dev/null", "--bplp"]
        code, _, err = run(argv, capsys)
        assert code == 2 and "empty" in err

    def test_bplp_example(self, tmp_path, capsys):
        emit_vector(tmp_path / "y.csv", [2.0])
        argv = ["solve", "--family", "example1", "--response", str(tmp_path / "y.csv"), "--bplp"]
        beta = json.loads(run(argv, capsys)[1])["results"]["beta"]
        np.testing.assert_allclose(beta, [0.0, 1.0], atol=1e-6)


class TestSweeps:
    def test_rho_sweep(self, capsys):
        argv = ["simulate", "--family", "toeplitz", "--p", "8", "--s", "2", "--reps", "3",
                "--sweep", "rho", "--values", "0.0,0.5"]
        report = json.loads(run(argv, capsys)[1])
        jsonschema.validate(report, SCHEMA)
        assert [s["value"] for s in report["results"]["sweep"]] == [0.0, 0.5]
        assert {b["sweep_value"] for b in report["bound_reports"]} == {0.0, 0.5}
        assert len(report["bound_reports"]) == 2 * 3 * 4

    def test_lambda_sweep_csv(self, capsys):
        argv = ["simulate", "--family", "gaussian", "--n", "20", "--p", "30", "--s", "2", "--reps", "2",
                "--sigma", "0", "--sweep", "lambda", "--values", "0.1,0.2,0.4", "--format", "csv"]
        code, out, _ = run(argv, capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and len(rows) == 3 * 2 * 4
        assert {r["sweep_value"] for r in rows} == {"0.1", "0.2", "0.4"}
        assert all(r["sweep_value"] == r["lambda_used"] for r in rows)

    def test_sweep_needs_values(self, capsys):
        argv = ["simulate", "--family", "gaussian", "--n", "20", "--p", "30", "--s", "2", "--sweep", "lambda"]
        assert run(argv, capsys)[0] == 2


class TestExitCodes:
    def test_parse_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("1,2\n3,abc\n")
        code, _, err = run(["gen-design", "--design", str(bad)], capsys)
        assert code == 2
        assert "row 2" in err and "column 2" in err

    def test_precondition(self, capsys):
        assert run(["gen-design", "--family", "equicorrelated", "--rho", "0.9"], capsys)[0] == 2

    def test_missing_design(self, capsys):
        assert run(["gen-design"], capsys)[0] == 2

    def test_refusal(self, capsys):
        argv = ["check-conditions", "--family", "identity", "--p", "40", "--s", "20", "--checks", "rip", "--subset-cap", "1000"]
        code, _, err = run(argv, capsys)
        assert code == 3 and "cap" in err

    def test_non_convergence(self, capsys):
        argv = ["solve", "--family", "gaussian", "--n", "30", "--p", "60", "--s", "3", "--lambda", "0.001", "--max-iters", "2"]
        assert run(argv, capsys)[0] == 4

    def test_noiseless_needs_lambda(self, capsys):
        argv = ["simulate", "--family", "gaussian", "--n", "10", "--p", "12", "--s", "2", "--sigma", "0"]
        assert run(argv, capsys)[0] == 2

    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["simulate", "--reps", "x"])
        assert info.value.code == 2


class TestRunExperiment:
    def config(self, **kw):
        base = dict(
            design=DesignSpec("gaussian", p=30, n=20, seed=3),
            beta0=SparseSpec(3, 2.0),
            noise=NoiseModel(1.0, 4),
            rule=LambdaRule(),
            reps=5,
        )
        return ExperimentConfig(**(base | kw))

    def test_byte_identical(self):
        a = json.dumps(run_experiment(self.config()), sort_keys=True)
        b = json.dumps(run_experiment(self.config()), sort_keys=True)
        assert a == b

    def test_single_noiseless_replication_matches_verify(self):
        cfg = self.config(noise=NoiseModel(0.0, 4), reps=1, lam=0.3)
        report = run_experiment(cfg)
        X = generate_design(cfg.design).X
        v = verify_bounds(X, SparseSpec(3, 2.0).vector(30), NoiseModel(0.0), lam=0.3)
        got = {b["bound_name"]: b for b in report["bound_reports"]}
        for b in v.bounds:
            assert got[b.bound_name]["empirical"] == b.empirical
            assert got[b.bound_name]["holds"] == b.holds
        assert report["aggregates"]["mean_losses"] == v.losses._asdict()

    def test_aggregate_counts(self):
        report = run_experiment(self.config())
        agg = report["aggregates"]
        assert len(report["bound_reports"]) == 4 * 5
        assert agg["good_event_count"] == sum(r["on_good_event"] for r in report["results"]["replications"])
        jsonschema.validate(json.loads(json.dumps(report)), SCHEMA)

    def test_beta_length_mismatch(self):
        with pytest.raises(PreconditionError):
            run_experiment(self.config(beta0=(1.0, 0.0)))
