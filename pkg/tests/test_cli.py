# tests/test_cli.py

import json

import pytest

from ptkdv.core.errors import EXIT_DYNAMICS, EXIT_OK, EXIT_USAGE, EXIT_VERIFY_FAILED
from ptkdv.main import main
from ptkdv.services import storage
from ptkdv.utils.helpers import parse_complex


def _evolve(directory, *extra):
    return main(["evolve", "--N", "32", "--dt", "1e-3", "--out", str(directory), *extra])


class TestSpecfun:
    def test_dn_at_zero(self, capsys):
        assert main(["specfun", "dn", "0", "0.5"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "1"

    def test_incomplete_beta(self, capsys):
        assert main(["specfun", "betainc", "0.5", "1", "1"]) == EXIT_OK
        assert parse_complex(capsys.readouterr().out.strip()) == pytest.approx(0.5, abs=1e-15)

    def test_wrong_arity(self):
        assert main(["specfun", "gamma", "1", "2"]) == EXIT_USAGE

    def test_gamma_pole(self):
        assert main(["specfun", "gamma", "-2"]) == EXIT_USAGE


class TestCurve:
    @pytest.mark.parametrize("eps", ["-1", "0"])
    def test_singular_epsilon(self, eps, tmp_path):
        out = tmp_path / "curve"
        assert main(["curve", "--eps", eps, "--n", "0", "--out", str(out)]) == EXIT_USAGE
        assert not out.exists()

    def test_needs_branches(self, output_root):
        assert main(["curve", "--eps", "3"]) == EXIT_USAGE

    def test_small_run(self, tmp_path, capsys):
        out = tmp_path / "curve"
        code = main(["curve", "--eps", "1", "--n", "0", "--m", "0", "--vrange", "0:1",
                     "--samples", "11", "--out", str(out)])
        assert code == EXIT_OK

        manifest = storage.read_manifest(out)
        assert manifest.status == "ok"
        assert sorted(manifest.outputs) == ["curve_eps1_n0_k1_sqrt2_m0.csv", "curve_eps1_n0_k1_sqrt2_m0.json"]
        assert all((out / name).exists() for name in manifest.outputs)
        assert "[0, 1]" in capsys.readouterr().out

    def test_bad_range(self, tmp_path):
        assert main(["curve", "--eps", "3", "--n", "0", "--vrange", "1:0", "--out", str(tmp_path)]) == EXIT_USAGE


class TestEvolveAndCharges:
    def test_zero_time(self, tmp_path):
        out = tmp_path / "run"
        assert _evolve(out, "--T", "0") == EXIT_OK
        manifest = storage.read_manifest(out)
        assert manifest.parameters['snapshot_times'] == [0.0]
        assert "charges.json" in manifest.outputs

    def test_charges_need_three_snapshots(self, tmp_path):
        out = tmp_path / "run"
        _evolve(out, "--T", "0")
        assert main(["charges", str(out)]) == EXIT_USAGE

    def test_evolve_then_audit(self, tmp_path, capsys):
        out = tmp_path / "run"
        assert _evolve(out, "--T", "0.01", "--stride", "2") == EXIT_OK
        assert len(storage.read_manifest(out).parameters['snapshot_times']) == 6

        assert main(["charges", str(out)]) == EXIT_OK
        audit = json.loads((out / "charges_audit.json").read_text())
        assert audit['snapshots'] == 6
        assert [c['charge_index'] for c in audit['charges']] == [1, 2, 3]
        assert all(c['drift'] < 1e-8 for c in audit['charges'])
        assert "I3: drift" in capsys.readouterr().out

    def test_singular_slope_aborts(self, tmp_path, capsys):
        out = tmp_path / "run"
        assert _evolve(out, "--eps", "1.5", "--N", "64") == EXIT_DYNAMICS
        manifest = storage.read_manifest(out)
        assert manifest.status == "aborted"
        assert manifest.abort['grid_index'] is not None
        assert "last_good.csv" in manifest.outputs
        assert "aborted at" in capsys.readouterr().out

    def test_unknown_init(self, tmp_path):
        assert _evolve(tmp_path / "run", "--init", "gaussian") == EXIT_USAGE

    def test_period_needs_cnoidal(self, tmp_path):
        assert _evolve(tmp_path / "run", "--T", "period") == EXIT_USAGE

    def test_csv_init(self, tmp_path):
        first, second = tmp_path / "first", tmp_path / "second"
        _evolve(first, "--T", "0")
        init = first / storage.snapshot_name(0)
        assert _evolve(second, "--T", "0", "--init", str(init), "--L", "6.283185307179586") == EXIT_OK
        assert storage.read_manifest(second).parameters['init'] == str(init)


class TestConfigFile:
    def test_file_fills_defaults_and_flags_win(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({'evolve': {'N': 32, 'dt': 0.001, 'T': "0.01", 'stride': 5}}))
        out = tmp_path / "run"
        assert main(["--config", str(config), "evolve", "--stride", "2", "--out", str(out)]) == EXIT_OK

        parameters = storage.read_manifest(out).parameters
        assert parameters['config']['grid_points'] == 32
        assert parameters['config']['snapshot_stride'] == 2
        assert parameters['config']['t_final'] == pytest.approx(0.01)

    def test_unknown_key(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({'evolve': {'colour': "red"}}))
        assert main(["--config", str(config), "evolve", "--out", str(tmp_path / "run")]) == EXIT_USAGE

    def test_unreadable_file(self, tmp_path):
        assert main(["--config", str(tmp_path / "missing.json"), "specfun", "dn", "0", "0.5"]) == EXIT_USAGE


class TestVerify:
    def test_specfun_group(self, tmp_path, capsys):
        report = tmp_path / "junit.xml"
        assert main(["verify", "--filter", "specfun", "--report", str(report)]) == EXIT_OK
        text = report.read_text()
        assert 'failures="0"' in text
        assert "f1_reduces_to_2f1" in text
        assert "PASS" in capsys.readouterr().out

    @pytest.mark.slow
    def test_flux_sign_flip_is_detected(self):
        assert main(["verify", "--filter", "flux_consistency", "--inject-flux3-sign-flip"]) == EXIT_VERIFY_FAILED


def test_usage_errors_exit_through_argparse():
    with pytest.raises(SystemExit) as info:
        main(["curve", "--prefactor", "other"])
    assert info.value.code == EXIT_USAGE
