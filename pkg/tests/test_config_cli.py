"""Configuration documents and the command-line surface.

CLI commands run in-process through main(argv); stdout/stderr are captured
and parsed, artifacts land in tmp_path, and exit codes are asserted against
the documented mapping (0 ok, 2 config/usage, 3 budget, 4 verification).
"""

import json
from fractions import Fraction

import pytest

from juliaspec.canonical import CANONICAL_NAMES, all_canonical, canonical_config
from juliaspec.cli import main, parse_complex
from juliaspec.config import load_config_file, parse_config
from juliaspec.errors import ConfigError

MINIMAL = {
    "p": {"kind": "constant", "value": "1/2"},
    "d": {"kind": "constant", "value": 2},
}

TERNARY_DOC = {
    "p": {"kind": "constant", "value": "1/2"},
    "d": {"kind": "constant", "value": 3},
    "seed": 7,
}


# -- configuration parsing ---------------------------------------------------


def test_parse_config_minimal_defaults():
    rc = parse_config(MINIMAL)
    assert rc.seed == 0
    assert rc.command == {}
    assert rc.capacity_bits == 64
    assert rc.chain().p_at(1) == Fraction(1, 2)
    assert rc.base().digit_base(5) == 2


@pytest.mark.parametrize(
    "doc",
    [
        {"p": MINIMAL["p"]},  # missing d
        {**MINIMAL, "extra": 1},
        {**MINIMAL, "seed": -1},
        {**MINIMAL, "seed": 2**64},
        {**MINIMAL, "capacity_bits": 63},
        {**MINIMAL, "capacity_bits": 513},
        {**MINIMAL, "p": {"kind": "fibonacci"}},
        {**MINIMAL, "p": {"value": "1/2"}},  # kind missing
        {**MINIMAL, "command": "render"},  # must be an object
    ],
)
def test_parse_config_rejects_bad_documents(doc):
    with pytest.raises(ConfigError):
        parse_config(doc)


def test_config_json_roundtrip():
    doc = {
        **MINIMAL,
        "seed": 99,
        "command": {"depth": 4},
        "capacity_bits": 128,
    }
    rc = parse_config(doc)
    again = parse_config(rc.to_json())
    assert again == rc
    assert rc.with_seed(5).seed == 5
    assert rc.with_seed(5).p == rc.p


def test_load_config_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(TERNARY_DOC))
    rc = load_config_file(path)
    assert rc.seed == 7
    assert rc.base().digit_base(1) == 3
    with pytest.raises(ConfigError):
        load_config_file(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config_file(bad)


def test_canonical_configs():
    configs = all_canonical()
    assert tuple(configs) == CANONICAL_NAMES
    for name, rc in configs.items():
        assert rc.seed == 20260823, name
    assert configs["binary-geometric"].chain().p_at(2) == Fraction(15, 16)
    assert configs["mixed23-harmonic"].base().digit_base(1) == 2
    assert configs["mixed23-harmonic"].base().digit_base(2) == 3
    with pytest.raises(ConfigError):
        canonical_config("nope")


def test_parse_complex_forms():
    assert parse_complex("0.3+0.2i") == 0.3 + 0.2j
    assert parse_complex("1+0j") == 1.0
    assert parse_complex("-0.5i") == -0.5j
    assert parse_complex("2") == 2.0
    with pytest.raises(ConfigError):
        parse_complex("elephant")


# -- commands ----------------------------------------------------------------


def test_classify_command(capsys):
    rc = main(["classify", "--canonical", "dendrite", "--lambda", "1+0i", "--space", "c"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["membership"] == "in-spectrum"
    assert out["part"] == "point"
    assert out["lambda"] == [1.0, 0.0]
    assert out["space"] == "c"


def test_classify_escape_verdict(capsys):
    rc = main(["classify", "--canonical", "ternary-p12", "--lambda", "2", "--space", "linf"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["membership"] == "not-in-spectrum"
    assert out["part"] == "not-applicable"


def test_residual_set_stdout(capsys):
    rc = main(["residual-set", "--canonical", "dendrite", "--depth", "5"])
    assert rc == 0
    captured = capsys.readouterr()
    lines = captured.out.splitlines()
    assert lines[0] == "re,im"
    assert len(lines) == 2
    re, im = map(float, lines[1].split(","))
    assert abs(complex(re, im) - 1.0) < 1e-8
    note = json.loads(captured.err)
    assert note["regime"] == "equality"
    assert note["conjecture"] is False


def test_residual_set_transient_note(tmp_path, capsys):
    out = tmp_path / "points.csv"
    rc = main(
        ["residual-set", "--canonical", "binary-geometric", "--depth", "3", "--out", str(out)]
    )
    assert rc == 0
    assert out.read_text() == "re,im\n"  # conjectured empty: no points
    note = json.loads(capsys.readouterr().err)
    assert note["regime"] == "transient"
    assert note["conjecture"] is True


def test_command_object_supplies_defaults_flags_override(tmp_path, capsys):
    doc = {**TERNARY_DOC, "command": {"depth": 2}}
    path = tmp_path / "t.json"
    path.write_text(json.dumps(doc))

    assert main(["residual-set", "--config", str(path)]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert len(rows) - 1 == 9  # depth 2 from the command object

    assert main(["residual-set", "--config", str(path), "--depth", "3"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert len(rows) - 1 == 27  # flag wins


def test_render_command(tmp_path, capsys):
    # A config whose filled set has interior around 0, so the origin pixel
    # stays inside at any sane budget.
    prefix = tmp_path / "img"
    rc = main(
        [
            "render", "--canonical", "binary-geometric",
            "--re-min", "-1.5", "--re-max", "1.5",
            "--im-min", "-1.5", "--im-max", "1.5",
            "--width", "24", "--height", "18", "--max-iter", "40",
            "--overlay", "eigenvalues", "--trunc-size", "8",
            "--out-prefix", str(prefix),
        ]
    )
    assert rc == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["ppm"] == str(prefix) + ".ppm"
    assert summary["csv"] == str(prefix) + ".csv"
    assert 0.0 < summary["inside-fraction"] < 1.0
    assert summary["components"] >= 1
    assert summary["origin-component-size"] >= 1
    ppm = (tmp_path / "img.ppm").read_bytes()
    assert ppm.startswith(b"P6\n24 18\n255\n")
    assert len(ppm) == len(b"P6\n24 18\n255\n") + 24 * 18 * 3
    csv_lines = (tmp_path / "img.csv").read_text().splitlines()
    assert csv_lines[0] == "re,im,verdict,step"
    assert len(csv_lines) == 1 + 24 * 18


def test_simulate_to_file_with_statistics(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    argv = [
        "simulate", "--canonical", "dendrite",
        "--start", "1", "--steps", "50",
        "--trajectories", "40", "--horizon", "2000",
        "--out", str(out),
    ]
    assert main(argv) == 0
    stats1 = json.loads(capsys.readouterr().out)
    body1 = out.read_bytes()
    assert main(argv) == 0
    stats2 = json.loads(capsys.readouterr().out)
    assert stats1 == stats2  # same seed, same draws
    assert out.read_bytes() == body1
    assert stats1["trajectories"] == 40
    assert stats1["horizon"] == 2000
    assert 0 <= stats1["hits"] <= 40
    assert stats1["ci95"][0] <= stats1["fraction"] <= stats1["ci95"][1]
    lines = body1.decode().splitlines()
    assert lines[0] == "step,state,zeta,digits"
    assert len(lines) == 1 + 51  # start plus 50 moves


def test_simulate_stdout_keeps_csv_clean(capsys):
    rc = main(
        ["simulate", "--canonical", "ternary-p12", "--start", "0", "--steps", "5",
         "--trajectories", "10", "--horizon", "100"]
    )
    assert rc == 0
    captured = capsys.readouterr()
    assert captured.out.splitlines()[0] == "step,state,zeta,digits"
    json.loads(captured.err)  # statistics went to stderr


def test_preimages_command(capsys):
    rc = main(["preimages", "--canonical", "ternary-p12", "--depth", "2"])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "re,im"
    assert len(lines) == 1 + 9
    rc = main(["preimages", "--canonical", "ternary-p12", "--depth", "1", "--target", "0"])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 1 + 3  # triple root at the critical point
    for line in lines[1:]:
        re, im = map(float, line.split(","))
        assert complex(re, im) == pytest.approx(0.5 + 0j, abs=1e-9)


def test_truncate_command(tmp_path, capsys):
    prefix = tmp_path / "tr"
    rc = main(["truncate", "--canonical", "dendrite", "--size", "8", "--out-prefix", str(prefix)])
    assert rc == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary == {
        "size": 8,
        "exact": True,
        "matrix": str(prefix) + "-matrix.csv",
        "eigenvalues": str(prefix) + "-eigenvalues.csv",
    }
    mat = (tmp_path / "tr-matrix.csv").read_text().splitlines()
    assert mat[0] == "row,col,num,den"
    eig = (tmp_path / "tr-eigenvalues.csv").read_text().splitlines()
    assert eig[0] == "re,im,modulus,verdict"
    assert len(eig) == 1 + 8


def test_spectrum_report_command(capsys):
    rc = main(
        ["spectrum-report", "--canonical", "binary-geometric",
         "--lambdas", "0,1+0i", "--depth", "3"]
    )
    assert rc == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["recurrence"] == "transient"
    assert set(rep["spaces"]) == {"linf", "c0", "c", "l1", "l2"}
    assert len(rep["lambdas"]) == 2
    assert rep["lambdas"][0]["c0"]["part"] == "point"


# -- exit codes --------------------------------------------------------------


def test_exit_code_2_without_configuration(capsys):
    rc = main(["classify", "--lambda", "1", "--space", "c"])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_exit_code_2_bad_lambda(capsys):
    rc = main(["classify", "--canonical", "dendrite", "--lambda", "x?", "--space", "c"])
    assert rc == 2


def test_exit_code_2_bad_grid(capsys):
    rc = main(["render", "--canonical", "dendrite", "--width", "8", "--height", "8",
               "--max-iter", "5", "--radius", "0.9", "--out-prefix", "unused"])
    assert rc == 2


def test_exit_code_3_eigensolve_cap(capsys):
    rc = main(["truncate", "--canonical", "dendrite", "--size", "5000",
               "--out-prefix", "unused"])
    assert rc == 3
    assert "budget exceeded" in capsys.readouterr().err


def test_exit_code_3_preimage_budget(capsys):
    rc = main(["preimages", "--canonical", "ternary-p12", "--depth", "13"])
    assert rc == 3


def test_exit_code_3_state_overflow(tmp_path, capsys):
    # With p ≡ 1 every step is an up-move, so starting at the capacity
    # ceiling overflows deterministically on the first transition.
    doc = {"p": {"kind": "constant", "value": "1"}, "d": {"kind": "constant", "value": 2}}
    path = tmp_path / "shift.json"
    path.write_text(json.dumps(doc))
    rc = main(["simulate", "--config", str(path),
               "--start", str(2**64 - 1), "--steps", "64"])
    assert rc == 3


def test_argparse_usage_errors():
    with pytest.raises(SystemExit) as exc:
        main(["truncate", "--canonical", "dendrite"])  # --size is required
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["render", "--canonical", "not-a-config"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
