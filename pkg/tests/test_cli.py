import csv
import io
import json
import math

import pytest

from pcoring.cli import main
from pcoring.specfile import SpecError, bundled_names, load_spec, parse_angle, parse_spec


@pytest.mark.parametrize("text, value", [
    ("pi", math.pi), ("2pi", 2 * math.pi), ("3pi/2", 1.5 * math.pi), ("pi/4", math.pi / 4),
    ("0.5", 0.5), ("2*pi", 2 * math.pi),
])
def test_parse_angle(text, value):
    assert parse_angle(text) == pytest.approx(value)


def test_parse_angle_rejects_garbage():
    with pytest.raises(SpecError):
        parse_angle("tau")


def test_spec_parsing():
    spec = parse_spec("name = t\nn = 6\ndirection = uni\ncoupling = 0.5\n"
                      "refractory = 2:pi/2\ninit = phases: 0, 1, 2, 3, 4, 2pi\n")
    cfg = spec.config
    assert cfg.topology.n == 6 and cfg.topology.coupling == 0.5
    assert cfg.prc.refractory[1] == pytest.approx(math.pi / 2)
    assert cfg.initial.phases[-1] == pytest.approx(2 * math.pi)


@pytest.mark.parametrize("text", [
    "n = 6\ndirection = uni\nbogus = 1\n",
    "n = 6\n",
    "n = 6\ndirection = uni\nrefractory = 9:pi\n",
    "n = 6\ndirection = uni\ninit = phases: 1, 2\n",
    "n = 6\ndirection = uni\nn = 7\n",
    "n = 6\ndirection = uni\ncoupling = 1.5\n",
])
def test_spec_errors(text):
    with pytest.raises(SpecError):
        parse_spec(text)


def test_bundled_specs_present():
    names = bundled_names()
    for stem in ("fig2", "fig3", "fig4"):
        assert f"{stem}-top" in names and f"{stem}-bottom" in names
    assert "fig5" in names
    assert load_spec("fig5").kind == "critical-sweep"


def test_critical_command(capsys):
    assert main(["critical", "8", "bi"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.83772, abs=5e-6)
    assert main(["critical", "8", "uni"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.857143, abs=5e-6)


def test_critical_sweep_command(tmp_path):
    dest = tmp_path / "curve.csv"
    assert main(["critical", "--sweep", "4:250", "--out", str(dest)]) == 0
    rows = list(csv.DictReader(dest.open()))
    assert len(rows) == 2 * 247
    assert set(rows[0]) == {"n", "direction", "l_star"}


def test_simulate_bundled(tmp_path, capsys):
    assert main(["simulate", "fig4-bottom", "--out", str(tmp_path)]) == 0
    assert "synchronized" in capsys.readouterr().out
    d = json.loads((tmp_path / "fig4-bottom.json").read_text())
    assert d["verdict"] == "synchronized" and d["expected"] == "synchronized"
    assert "direction = uni" in d["spec"]
    header = (tmp_path / "fig4-bottom.csv").read_text().splitlines()[0]
    assert header == "t,j,x_1,x_2,x_3,x_4,x_5,x_6,x_7,x_8,fired_mask"


def test_simulate_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["--n", "7", "--direction", "bi", "--l", "0.3", "--seed", "42",
            "--init", "random", "--record-every", "0.1"]
    assert main(["simulate", *args, "--out", str(a)]) == 0
    assert main(["simulate", *args, "--out", str(b), "--jobs", "2"]) == 0
    for name in ("run.csv", "run.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_simulate_parallel_matches_serial(tmp_path):
    specs = ["fig2-top", "fig3-bottom"]
    assert main(["simulate", *specs, "--out", str(tmp_path / "s")]) == 0
    assert main(["simulate", *specs, "--out", str(tmp_path / "p"), "--jobs", "2"]) == 0
    for s in specs:
        assert (tmp_path / "s" / f"{s}.csv").read_bytes() == (tmp_path / "p" / f"{s}.csv").read_bytes()


def test_flags_override_spec(tmp_path):
    assert main(["simulate", "fig2-top", "--l", "0.8378", "--out", str(tmp_path)]) == 0
    d = json.loads((tmp_path / "fig2-top.json").read_text())
    assert d["verdict"] == "synchronized"
    assert d["overrides"]["coupling"] == "0.8378"


def test_sweep_command(capsys):
    assert main(["sweep", "fig2-top", "--l-values", "0.8377,0.8378"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [r["verdict"] for r in rows] == ["clustered-equilibrium", "synchronized"]


def test_worst_case_command(capsys):
    assert main(["worst-case", "8", "0.8377", "bi-ubar"]) == 0
    captured = capsys.readouterr()
    assert "class=in-u1" in captured.err
    assert len(captured.out.splitlines()) == 9


def test_verify_command(capsys):
    assert main(["verify", "matrices", "--trials", "50"]) == 0
    lines = [json.loads(s) for s in capsys.readouterr().out.splitlines()]
    assert lines and all(r["passed"] for r in lines)


def test_usage_errors(capsys):
    assert main(["simulate", "no-such-spec"]) == 2
    assert main(["critical", "3", "bi"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_invariant_exit_code(monkeypatch, tmp_path):
    from pcoring import cli
    from pcoring.exceptions import EngineInvariantError

    def boom(_):
        raise EngineInvariantError("synthetic")
    monkeypatch.setattr(cli, "run", boom)
    assert main(["sweep", "fig2-top", "--l-values", "0.5"]) == 3


def test_verify_failure_exit_code(monkeypatch, capsys):
    from pcoring import cli
    from pcoring.verify import PropertyResult
    monkeypatch.setattr(cli, "run_suite",
                        lambda *a, **k: [PropertyResult("matrices", "x", False, 1)])
    assert main(["verify", "matrices"]) == 4
