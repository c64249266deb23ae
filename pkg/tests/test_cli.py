import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from gaugenf.cli import (
    RunConfig,
    emit_document,
    emit_generators,
    main,
    parse_document,
    parse_system,
    render,
    run_pipeline,
)
from gaugenf.errors import ParseError
from gaugenf.gauge import gauge_distribution
from gaugenf.involutive import involutive_form
from gaugenf.oracle import corrupt_generator
from gaugenf.reduction import PfaffianSpec, SystemSpec
from gaugenf.stabilization import stabilize

SYSTEMS = Path(__file__).resolve().parents[1] / "systems"


def read(name):
    return (SYSTEMS / name).read_text()


def run(command, text, **kw):
    report, code = run_pipeline(RunConfig("<doc>", command, text=text, **kw))
    return report, code


@pytest.fixture(scope="module")
def driftless_report():
    return run("analyze", read("driftless_ten.toml"))


def test_parse_modes():
    assert isinstance(parse_system(read("heisenberg.toml")), SystemSpec)
    assert isinstance(parse_system(read("oscillator.toml")), PfaffianSpec)
    assert isinstance(parse_system(read("pendulum_on_line.toml")), SystemSpec)


def test_misspelled_variable_is_named_with_position():
    text = '[system]\nphase = ["x", "y"]\n\n[[char_field]]\nx = "1 + yy"\n'
    with pytest.raises(ParseError) as err:
        parse_system(text)
    assert "'yy'" in str(err.value)
    assert (err.value.line, err.value.column) == (5, 10)


def test_unknown_component_key():
    with pytest.raises(ParseError, match="'w'"):
        parse_system('[system]\nphase = ["x"]\n[drift]\nw = "1"\n')


def test_syntax_error_position():
    with pytest.raises(ParseError) as err:
        parse_system('[system]\nphase = ["x", \n[drift]\n')
    assert err.value.line is not None


def test_dimension_mismatch():
    text = '[system]\nphase = ["x", "y"]\n[pfaffian]\ntheta = [["1"]]\nrhs = ["0"]\n'
    with pytest.raises(ParseError, match="dimension mismatch"):
        parse_system(text)
    text = '[system]\nphase = ["x"]\nfamilies = ["a", "b"]\n[[char_field]]\nx = "1"\n'
    with pytest.raises(ParseError, match="dimension mismatch"):
        parse_system(text)


def test_driftless_report(driftless_report):
    report, code = driftless_report
    assert code == 0
    g = report["gauge"]
    assert g["indices"] == [1, 1, 1, 1]
    assert [x["order"] for x in g["generators"]] == [1, 2, 3, 4]
    assert all(x["verified"] for x in g["generators"])
    assert report["complete_form"]["constraints"] == []
    assert set(report) >= {"stages", "complete_form", "classification", "gauge", "involutive", "certificate"}


def test_pendulum_report():
    report, code = run("analyze", read("pendulum_on_line.toml"))
    assert code == 0
    assert report["classification"]["n_transverse"] == 2
    assert report["classification"]["n_tangential"] == 0
    assert report["gauge"]["generators"] == []


def test_counterexample_report():
    report, code = run("analyze", read("dirac_counterexample.toml"), numeric=True)
    assert code == 0
    assert report["classification"]["n_tangential"] == 2
    assert len(report["gauge"]["generators"]) == 1
    assert "X" in report["involutive"]["observables"]
    num = report["numeric_checks"]
    assert all(x["passed"] and x["corrupted_rejected"] for x in num["generators"])
    assert all(x["passed"] for x in num["observables"])


def test_exit_codes():
    inconsistent = '[system]\nphase = ["x", "y"]\n[[char_field]]\nx = "1"\n[constraints]\nT = ["x", "x - 1"]\n'
    irregular = '[system]\nphase = ["x", "y"]\n[[char_field]]\nx = "1"\n[constraints]\nT = ["y^2"]\n'
    assert run("analyze", inconsistent)[1] == 2
    report, code = run("analyze", irregular)
    assert code == 3
    assert report["error"]["offending"] == ["y^2"]
    assert run("analyze", "[system\n")[1] == 1


def test_report_is_byte_stable():
    text = read("heisenberg.toml")
    a = render(run("analyze", text, numeric=True, seed=7)[0])
    b = render(run("analyze", text, numeric=True, seed=7)[0])
    assert a == b


@pytest.mark.parametrize("name", ["heisenberg.toml", "dirac_counterexample.toml", "affine_involutive.toml"])
def test_round_trip(name):
    doc = parse_document(read(name))
    c = stabilize(doc.spec, regularize=doc.regularize)
    g = gauge_distribution(c)
    first, _ = run("analyze", read(name))
    # the complete form reproduces the report's ideal and indices
    again, code = run("analyze", emit_document(c.spec))
    assert code == 0
    assert again["complete_form"]["constraints"] == first["complete_form"]["constraints"]
    assert again["gauge"]["indices"] == first["gauge"]["indices"]
    # the involutive form keeps the ideal and the gauge distribution
    inv, code = run("analyze", emit_document(involutive_form(c, g)))
    assert code == 0
    assert inv["complete_form"]["constraints"] == first["complete_form"]["constraints"]
    assert inv["gauge"]["dim"] == g.dim


def test_involutive_form_round_trip():
    first, _ = run("analyze", read("heisenberg.toml"))
    form = first["involutive"]["form"]
    lines = ["[system]", f"phase = {json.dumps(form['phase'])}", f"families = {json.dumps(form['families'])}",
             "[drift]"] + [f"{k} = {json.dumps(v)}" for k, v in form["drift"].items()]
    for z in form["char_fields"]:
        lines += ["[[char_field]]"] + [f"{k} = {json.dumps(v)}" for k, v in z.items()]
    again, code = run("analyze", "\n".join(lines) + "\n")
    assert code == 0
    assert again["gauge"]["dim"] == first["gauge"]["dim"]
    assert again["involutive"]["involution"]["ok"]


def test_verify_command():
    text = read("heisenberg.toml")
    doc = parse_document(text)
    c = stabilize(doc.spec)
    g = gauge_distribution(c)
    good = text + "\n" + emit_generators(g.generators, c.spec.families)
    report, code = run("verify", good)
    assert code == 0 and all(x["ok"] for x in report["verify"]["generators"])
    bad = text + "\n" + emit_generators([corrupt_generator(g.generators[1])], c.spec.families)
    assert run("verify", bad)[1] == 1


def test_verify_weak_poisson_section():
    text = read("dirac_counterexample.toml") + '\n[weak_poisson]\npoisson = [["X", "p_X", "1"], ["Y", "p_Y", "1"]]\n'
    report, code = run("verify", text)
    assert code == 1
    assert [f[0] for f in report["verify"]["weak_poisson"]["failures"]] == ["weakP:[T2,P]"]


def test_gauge_command_requires_complete_form():
    assert run("gauge", read("heisenberg.toml"))[1] == 0
    assert run("gauge", read("pendulum_on_line.toml"))[1] == 2


def test_simulate_command():
    report, code = run("simulate", read("oscillator.toml"), numeric=True)
    assert code == 0
    assert report["numeric_checks"]["x_final"] == pytest.approx([0.5403023059, -0.8414709848, -0.5403023059], abs=1e-9)


def test_branch_command():
    report, _ = run("branch", read("abnormal.toml"))
    assert report["branch_points"] == [["x"]]
    report, code = run("branch", read("abnormal.toml"), branch="0")
    assert code == 0
    assert report["branch"]["locus"] == ["x"]
    assert report["classification"]["tangential"] == ["y", "x"]


def test_main_with_stdin_and_report_file(tmp_path, monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO(read("heisenberg.toml")))
    out = tmp_path / "r.json"
    assert main(["analyze", "-", "--report", str(out)]) == 0
    assert json.loads(out.read_text())["gauge"]["indices"] == [1, 1]
    assert main(["analyze", str(SYSTEMS / "pendulum_on_line.toml"), "--max-stage", "1"]) == 1
    assert "StageOverflow" in capsys.readouterr().err


def test_invalid_config():
    with pytest.raises(ValueError):
        RunConfig("x", max_stage=0)
    with pytest.raises(ValueError):
        RunConfig("x", "explode")


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "gaugenf.cli", "analyze", str(SYSTEMS / "pendulum_on_line.toml")],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["classification"]["n_transverse"] == 2
