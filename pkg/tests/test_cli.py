import json

import pytest

from doubletopt.cli import main


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert main(["synth", "--blocks", "4", "--seed", "2", "--out", str(root / "in")]) == 0
    rc = main(
        [
            "solve",
            str(root / "in" / "geometry.geojson"),
            str(root / "in" / "field.csv"),
            "--scenario", "1,1.5",
            "--scenario", "5:3",
            "--out", str(root / "out"),
            "--figures", str(root / "fig"),
        ]
    )
    assert rc == 0
    return root


def test_solve_outputs(solved):
    out = solved / "out"
    assert sorted(p.name for p in out.iterdir()) == [
        "blocks_q1_r1.5.csv",
        "blocks_q5_r3.csv",
        "doublets_q1_r1.5.geojson",
        "doublets_q5_r3.geojson",
        "report.csv",
        "run.ini",
        "wells_q1_r1.5.geojson",
        "wells_q5_r3.geojson",
    ]
    assert (solved / "fig" / "block_distributions.png").stat().st_size > 0
    assert (solved / "fig" / "rate_vs_doublets.png").stat().st_size > 0


def test_prep(solved, tmp_path):
    out = tmp_path / "cand.geojson"
    assert main(["prep", str(solved / "in" / "geometry.geojson"), str(solved / "in" / "field.csv"), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["format_version"] == 1 and doc["features"]


def test_audit_and_report_pass(solved):
    assert main(["audit", str(solved / "in" / "geometry.geojson"), str(solved / "in" / "field.csv"), str(solved / "out")]) == 0
    assert main(["report", str(solved / "out")]) == 0


def test_report_detects_tampering(solved, tmp_path):
    import shutil

    copy = tmp_path / "out"
    shutil.copytree(solved / "out", copy)
    text = (copy / "report.csv").read_text().splitlines()
    cols = text[-1].split(",")
    cols[9] = f"{float(cols[9]) + 1:.3f}"
    text[-1] = ",".join(cols)
    (copy / "report.csv").write_text("\n".join(text) + "\n")
    assert main(["report", str(copy)]) == 1


def test_audit_detects_inflated_rate(solved, tmp_path, capsys):
    import shutil

    copy = tmp_path / "out"
    shutil.copytree(solved / "out", copy)
    path = copy / "doublets_q1_r1.5.geojson"
    doc = json.loads(path.read_text())
    assert doc["features"]
    doc["features"][0]["properties"]["q_lps"] += 100.0
    path.write_text(json.dumps(doc))
    assert main(["audit", str(solved / "in" / "geometry.geojson"), str(solved / "in" / "field.csv"), str(copy)]) == 1
    assert "rate_cap" in capsys.readouterr().out


def test_bad_input_exit_code(tmp_path, capsys):
    bad = tmp_path / "g.geojson"
    bad.write_text("{not json")
    assert main(["prep", str(bad), str(bad), "--out", str(tmp_path / "c.geojson")]) == 2
    assert "error:" in capsys.readouterr().err
