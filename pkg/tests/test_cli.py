import json

import pytest

from halfline.cli import main


def run_cli(capsys, *argv):
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def parse_kv(out):
    pairs = {}
    for line in out.splitlines():
        key, _, val = line.partition("=")
        try:
            pairs[key] = float(val)
        except ValueError:
            pairs[key] = val
    return pairs


SMALL = ("--L", "10", "--N", "1024")


def test_evolve_spectral(capsys):
    rc, out, err = run_cli(
        capsys, "evolve", "--preset", "xexp", *SMALL,
        "--epsilon", "0.3", "--b", "1", "--t", "0.5",
    )
    assert rc == 0 and err == ""
    kv = parse_kv(out)
    assert kv["engine"] == "spectral"
    assert kv["norm"] == pytest.approx(1.0, abs=1e-10)
    assert kv["boundary"] < 1e-3


def test_evolve_both_routes_agree(capsys):
    rc, out, _ = run_cli(
        capsys, "evolve", "--preset", "xexp", *SMALL,
        "--epsilon", "0.3", "--b", "1", "--t", "0.5", "--engine", "both",
    )
    assert rc == 0
    kv = parse_kv(out)
    assert kv["cross_gap"] == pytest.approx(4.7364352171127731e-04, rel=1e-9)
    assert kv["norm_kernel"] == pytest.approx(1.0, abs=1e-5)
    assert kv["norm_spectral"] == pytest.approx(1.0, abs=1e-10)


def test_evolve_out_file_deterministic(capsys, tmp_path):
    dumps = []
    for tag in ("a", "b"):
        path = tmp_path / f"{tag}.csv"
        rc, out, _ = run_cli(
            capsys, "evolve", "--preset", "xexp", *SMALL,
            "--epsilon", "0.3", "--b", "1", "--t", "0.5", "--out", str(path),
        )
        assert rc == 0
        assert parse_kv(out)["out"] == str(path)
        dumps.append(path.read_bytes())
    assert dumps[0] == dumps[1]
    header, first = dumps[0].decode("ascii").splitlines()[:2]
    assert header == "x,re,im"
    assert len(first.split(",")) == 3


def test_evolve_json_output(capsys):
    rc, out, _ = run_cli(
        capsys, "evolve", "--preset", "xexp", *SMALL,
        "--epsilon", "0.3", "--b", "1", "--t", "0.5", "--json",
    )
    assert rc == 0
    doc = json.loads(out)
    assert doc["preset"] == "xexp"
    assert doc["norm"] == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize(
    "argv",
    [
        ("evolve", "--preset", "nosuch", "--epsilon", "0.3", "--b", "1", "--t", "0.5"),
        ("evolve", "--preset", "xexp", "--epsilon", "1e-6", "--b", "1", "--t", "0.5"),
        ("evolve", "--preset", "xexp", "--b", "1", "--t", "0.5"),
        ("evolve", "--preset", "xexp", "--epsilon", "0.3", "--b", "0", "--t", "0.5"),
        ("limit", "--preset", "bump12", "--b", "-1", "--t", "1.0"),
    ],
)
def test_invalid_input_exits_2(capsys, argv):
    rc, out, err = run_cli(capsys, *argv, *SMALL)
    assert rc == 2
    assert err.startswith("error:")


def test_argparse_errors_exit_2(capsys):
    assert main(["evolve", "--engine", "warp"]) == 2
    assert main([]) == 2
    capsys.readouterr()


def test_unknown_config_key_exits_2(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"preset": "xexp", "viscosity": 0.3}))
    rc, _, err = run_cli(
        capsys, "evolve", "--config", str(cfg),
        "--epsilon", "0.3", "--b", "1", "--t", "0.5",
    )
    assert rc == 2
    assert "viscosity" in err


def test_config_file_with_flag_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(
        {"preset": "xexp", "L": 10, "N": 1024, "epsilon": 0.5, "b": 1.0, "t": 0.25}
    ))
    rc, out, _ = run_cli(capsys, "evolve", "--config", str(cfg), "--epsilon", "0.3")
    assert rc == 0
    kv = parse_kv(out)
    assert kv["epsilon"] == 0.3
    assert kv["t"] == 0.25
    assert kv["N"] == 1024.0


def test_limit_reports_exact_split(capsys):
    rc, out, _ = run_cli(
        capsys, "limit", "--preset", "bump12", "--L", "20", "--N", "4096",
        "--b", "1", "--t", "1.5",
    )
    assert rc == 0
    kv = parse_kv(out)
    assert kv["alpha"] + kv["singular_weight"] == 1.0
    assert kv["p_shift"] + kv["p_reflect"] == pytest.approx(1.0, abs=1e-4)
    assert kv["p_shift"] == pytest.approx(0.5, abs=1e-3)
    assert kv["completeness_defect"] < 1e-4
    assert kv["wold_upper"] + kv["wold_lower"] == pytest.approx(1.0, abs=1e-6)
    assert kv["destruction_time"] == pytest.approx(1.0, abs=20.0 / 4096)


def test_sweep_passes_and_writes_reports(capsys, tmp_path):
    rc, out, _ = run_cli(
        capsys, "sweep", "--claim", "thm1", "--preset", "xexp",
        "--L", "20", "--N", "4096", "--b", "1",
        "--times", "0.5,1.0", "--eps", "0.3,0.15,0.075",
        "--out-dir", str(tmp_path),
    )
    assert rc == 0
    assert "check decreasing:sup_remainder: pass" in out
    assert "check halved:sup_remainder: pass" in out
    csv_path = tmp_path / "thm1.csv"
    json_path = tmp_path / "thm1.json"
    assert csv_path.exists() and json_path.exists()
    assert json.loads(json_path.read_text())["all_pass"] is True
    assert csv_path.read_text().count("\n") == 1 + 3 * 3


def test_sweep_failed_verdict_exits_3(capsys, tmp_path):
    rc, out, _ = run_cli(
        capsys, "sweep", "--claim", "thm1", "--preset", "xexp",
        "--L", "20", "--N", "4096", "--b", "1",
        "--times", "0.5,1.0", "--eps", "0.3,0.15",
        "--out-dir", str(tmp_path),
    )
    assert rc == 3
    assert "check halved:sup_remainder: FAIL" in out
    # the report is still written for inspection
    assert (tmp_path / "thm1.csv").exists()
    assert json.loads((tmp_path / "thm1.json").read_text())["all_pass"] is False


def test_sweep_claim_choice_is_validated(capsys, tmp_path):
    rc = main([
        "sweep", "--claim", "thm9", "--preset", "xexp", "--b", "1",
        "--times", "1.0", "--eps", "0.3", "--out-dir", str(tmp_path),
    ])
    capsys.readouterr()
    assert rc == 2
