import json

import pytest

from diag_arcs.cli import main
from conftest import corpus_path


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    header = {}
    rows = []
    columns = None
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            header[key] = value
        elif columns is None:
            columns = line.split(",")
        else:
            rows.append(dict(zip(columns, line.split(","))))
    return header, columns, rows


def test_count_basic(capsys):
    code, out, _ = run_cli(
        capsys,
        ["count", "--system", "corpus:eq_squares", "--X", "2,0", "--no-timing"],
    )
    assert code == 0
    header, columns, rows = parse_csv(out)
    assert header["command"] == "count"
    assert "seed" in header and "budget_tuples" in header
    assert columns == ["X", "count", "method"]
    assert rows[0] == {"X": "2", "count": "9", "method": "brute"}
    assert rows[1] == {"X": "0", "count": "1", "method": "brute"}


def test_count_malformed_json(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops", encoding="utf-8")
    code, out, err = run_cli(
        capsys, ["count", "--system", str(bad), "--X", "2", "--no-timing"]
    )
    assert code == 1
    assert "malformed JSON" in err


def test_count_budget_exit_code(capsys):
    code, out, err = run_cli(
        capsys,
        [
            "count", "--system", "corpus:toy_1_2_7", "--X", "6",
            "--method", "brute", "--budget-tuples", "1000", "--no-timing",
        ],
    )
    assert code == 2
    assert "budget" in err


def test_count_mim_auto_selected(capsys):
    code, out, _ = run_cli(
        capsys,
        [
            "count", "--system", "corpus:toy_1_2_7", "--X", "4",
            "--budget-tuples", "100000", "--no-timing",
        ],
    )
    assert code == 0
    _, _, rows = parse_csv(out)
    assert rows[0]["method"] == "mim"


def test_csv_json_round_trip(capsys):
    argv = ["count", "--system", "corpus:eq_squares", "--X", "5", "--no-timing"]
    code, out_csv, _ = run_cli(capsys, argv)
    assert code == 0
    code, out_json, _ = run_cli(capsys, argv + ["--format", "json"])
    assert code == 0
    _, _, rows = parse_csv(out_csv)
    payload = json.loads(out_json)
    for col in ("X", "count"):
        assert int(rows[0][col]) == payload["rows"][0][col]


def test_float_serialization_round_trips(capsys):
    code, out_csv, _ = run_cli(
        capsys,
        ["series", "--system", "corpus:toy_1_2_7", "--Q", "6", "--no-timing"],
    )
    assert code == 0
    code, out_json, _ = run_cli(
        capsys,
        ["series", "--system", "corpus:toy_1_2_7", "--Q", "6", "--no-timing",
         "--format", "json"],
    )
    assert code == 0
    _, _, rows = parse_csv(out_csv)
    payload = json.loads(out_json)
    for row_csv, row_json in zip(rows, payload["rows"]):
        assert float(row_csv["T_q"]) == float(row_json["T_q"])


def test_determinism_across_threads(capsys):
    outputs = []
    for threads in ("1", "4", "8"):
        code, out, _ = run_cli(
            capsys,
            [
                "sint", "--system", "corpus:lin3", "--U", "8", "--T", "8",
                "--mc-samples", "300000", "--threads", threads, "--no-timing",
            ],
        )
        assert code == 0
        outputs.append(out.replace(f"threads={threads}", "threads=N"))
    assert outputs[0] == outputs[1] == outputs[2]


def test_predict_marks_unavailable_series(capsys):
    # lin2 has s = 2 <= (n+1) k_n = 2: the series factor must be absent,
    # the command still succeeds with a warning
    code, out, _ = run_cli(
        capsys,
        ["predict", "--system", "corpus:lin2", "--X", "10", "--p-max", "7",
         "--attempts", "40", "--U", "32", "--no-timing"],
    )
    assert code == 0
    header, _, rows = parse_csv(out)
    assert header["S_value"] == "unavailable"
    assert "warning_S" in header
    assert rows[0]["main_term"] == ""


def test_predict_full(capsys):
    code, out, _ = run_cli(
        capsys,
        ["predict", "--system", "corpus:toy_1_2_7", "--X", "8,16",
         "--Q-cut", "16", "--U", "4", "--T", "8", "--p-max", "13",
         "--attempts", "60", "--tol", "1e-3", "--no-timing"],
    )
    assert code == 0
    header, _, rows = parse_csv(out)
    assert header["real_certificate"].startswith("found")
    assert "padic_sweep" in header and "notfound" not in header["padic_sweep"]
    assert header["padic_missing"] == "0"
    assert len(rows) == 2
    assert float(rows[0]["main_term"]) > 0
    assert rows[0]["exponent"] == "4"


def test_compare_ratio_not_fabricated(capsys):
    code, out, _ = run_cli(
        capsys,
        ["compare", "--system", "corpus:lin2", "--X", "5", "--p-max", "5",
         "--attempts", "30", "--U", "16", "--no-timing"],
    )
    assert code == 0
    _, _, rows = parse_csv(out)
    assert rows[0]["count"] == "11"  # 2X+1 solutions of x1 = x2
    assert rows[0]["ratio"] == ""


def test_vmvt_rows(capsys):
    code, out, _ = run_cli(
        capsys,
        ["vmvt", "--b", "2", "--k-max", "1", "--X", "3,6,9",
         "--moment-k", "1", "--shift", "4", "--no-timing"],
    )
    assert code == 0
    header, columns, rows = parse_csv(out)
    assert rows[0]["J"] == "19"
    assert all(r["moment_equals_J"] == "true" for r in rows)
    assert all(r["translation_invariant"] == "true" for r in rows)
    assert "slope" in columns and float(header["slope"]) > 2.5


def test_vmvt_b1_exact(capsys):
    code, out, _ = run_cli(
        capsys, ["vmvt", "--b", "1", "--k-max", "2", "--X", "5,9", "--no-timing"]
    )
    assert code == 0
    _, _, rows = parse_csv(out)
    assert [r["J"] for r in rows] == ["5", "9"]


def test_arcs_classify(capsys):
    code, out, _ = run_cli(
        capsys,
        ["arcs", "--k", "1,3,5", "--X", "256", "--tau", "5/8",
         "--classify", "--alpha", "0.5,0.25,0.125", "--no-timing"],
    )
    assert code == 0
    header, _, rows = parse_csv(out)
    assert header["Q"] == "32" and header["Q0"] == "64"
    assert rows[0]["classification"] == "major"
    assert rows[0]["q"] == "8" and rows[0]["a"] == "4;2;1"


def test_weyl_error_sweep(capsys):
    code, out, _ = run_cli(
        capsys,
        ["weyl", "--error-sweep", "--k", "3", "--q-max", "20",
         "--X", "100,200", "--samples", "3", "--no-timing"],
    )
    assert code == 0
    _, columns, rows = parse_csv(out)
    assert columns == ["k", "q", "X", "error", "budget", "ratio"]
    assert len(rows) == 6
    assert all(float(r["ratio"]) >= 0 for r in rows)


def test_series_cli_threshold_warning(capsys):
    code, out, _ = run_cli(
        capsys,
        ["series", "--system", "corpus:eq_squares", "--Q", "6", "--no-timing"],
    )
    assert code == 0
    header, _, rows = parse_csv(out)
    assert "warning" in header
    assert len(rows) == 6


def test_invalid_flag_exits_1(capsys):
    code, _, err = run_cli(capsys, ["count", "--system", "corpus:eq_squares"])
    assert code == 1


def test_timing_columns_toggle(capsys):
    code, out, _ = run_cli(
        capsys, ["count", "--system", "corpus:eq_squares", "--X", "2"]
    )
    assert code == 0
    _, columns, _ = parse_csv(out)
    assert "wall_time" in columns and "memory_peak" in columns
