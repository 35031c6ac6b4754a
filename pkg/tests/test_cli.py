import csv
import io
import json
import subprocess
import sys

import pytest

from cohfluct.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, val = line[2:].partition(": ")
            meta[key] = json.loads(val)
        else:
            body.append(line)
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    return meta, rows


def test_expand_sz_squared(capsys):
    code, out, _ = run(capsys, "expand", "--param", "two_s=4", "--param", "expr=Sz*Sz")
    assert code == 0
    meta, rows = parse_csv(out)
    assert float(rows[-1]["residual"]) <= 1e-10
    assert meta["stop_reason"] == "finite"


def test_expand_identity_single_row(capsys):
    code, out, _ = run(capsys, "expand", "--param", "expr=Id")
    assert code == 0
    _, rows = parse_csv(out)
    assert len(rows) == 1


def test_expand_boson_position_squared(capsys):
    code, out, _ = run(capsys, "expand", "--param", "space=boson", "--param", "expr=q*q",
                       "--param", "omega=2.0", "--param", "alpha=[0.7, 0.3]")
    assert code == 0
    _, rows = parse_csv(out)
    assert abs(float(rows[1]["term_re"]) - 0.25) < 1e-10
    assert float(rows[-1]["residual"]) <= 1e-10


def test_lmg_residuals(capsys):
    code, out, _ = run(capsys, "lmg", "--param", "two_s=[6, 12]", "--param", "n_states=3")
    assert code == 0
    meta, rows = parse_csv(out)
    assert len(rows) == 6
    assert max(float(r["residual"]) for r in rows) <= 1e-10
    assert meta["max_residual"] <= 1e-10


def test_node_regular_file(capsys, tmp_path):
    f = tmp_path / "tet.yaml"
    f.write_text("- {two_s: 2, direction: [1, 1, 1]}\n- {two_s: 2, direction: [1, -1, -1]}\n"
                 "- {two_s: 2, direction: [-1, 1, -1]}\n- {two_s: 2, direction: [-1, -1, 1]}\n")
    code, out, _ = run(capsys, "node", "--param", f"node={f}", "--param", "lambdas=[1, 2]")
    assert code == 0
    _, rows = parse_csv(out)
    c = [abs(float(r["value"])) for r in rows if r["section"] == "C_closed"]
    assert len(c) == 24 and max(c) <= 1e-12


def test_deterministic_across_jobs(tmp_path):
    outs = []
    for jobs in ("1", "3"):
        p = tmp_path / f"lmg{jobs}.csv"
        assert main(["lmg", "--jobs", jobs, "--out", str(p)]) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_hash_tracks_tolerance(capsys):
    _, a, _ = run(capsys, "lmg", "--param", "two_s=4")
    _, b, _ = run(capsys, "lmg", "--param", "two_s=4", "--tol", "1e-8")
    _, c, _ = run(capsys, "lmg", "--param", "two_s=4")
    ha, hb, hc = (parse_csv(x)[0]["config_hash"] for x in (a, b, c))
    assert ha == hc != hb


def test_yaml_config_section_and_override(capsys, tmp_path):
    f = tmp_path / "cfg.yaml"
    f.write_text("dicke:\n  two_s: [2]\n  n_states: 2\nlmg:\n  two_s: 99\n")
    code, out, _ = run(capsys, "dicke", "--config", str(f), "--param", "lam=0.5")
    assert code == 0
    meta, rows = parse_csv(out)
    assert meta["config"]["two_s"] == [2] and meta["config"]["lam"] == 0.5
    assert len(rows) == 2


def test_json_mirror(tmp_path):
    p = tmp_path / "fl.csv"
    assert main(["fluct", "--param", "two_s=[8, 16]", "--out", str(p), "--json"]) == 0
    doc = json.loads(p.with_suffix(".json").read_text())
    _, rows = parse_csv(p.read_text())
    assert doc["columns"] == list(rows[0].keys())
    assert len(doc["rows"]) == len(rows)


@pytest.mark.parametrize("argv", [
    ["expand", "--tol", "0"],
    ["expand", "--param", "expr=Sz*Qx"],
    ["lmg", "--param", "bogus=1"],
    ["node", "--param", "node=/nonexistent/file.yaml"],
])
def test_validation_exit_code(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert err.strip()


def test_bad_operator_message(capsys):
    _, _, err = run(capsys, "expand", "--param", "expr=Sz*Qx")
    assert "unknown operator 'Qx' at position 3" in err


def test_failed_check_exit_code(capsys):
    # criterion 10 checks the first-order norm correction, which does not reach the stated slope
    code, out, err = run(capsys, "selfcheck", "--param", "only=[10]")
    assert code == 2
    assert "criterion 10" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "cohfluct", "expand", "--param", "expr=Id"],
                         capture_output=True, text=True, timeout=120)
    assert res.returncode == 0
    assert "residual" in res.stdout
