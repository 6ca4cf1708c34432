import json
import subprocess
import sys

import pytest

from depmetrics.cli import main
from depmetrics.metrics import metric_record
from depmetrics.treebank import parse_canonical, parse_conllu, serialize_canonical

from .conftest import DEMO7_HEADS, make_sentence


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --- validate -----------------------------------------------------------------


def test_validate_well_formed_file(data_dir, capsys):
    code, out, _ = run(["validate", str(data_dir / "sample_ud.conllu")], capsys)
    assert code == 0
    assert "12 accepted, 0 rejected" in out


def test_validate_all_invalid_file_fails(data_dir, capsys):
    code, out, _ = run(["validate", str(data_dir / "cyclic_only.conllu")], capsys)
    assert code == 1
    assert "TOTAL: 0 accepted, 2 rejected" in out


def test_validate_mixed_counts_sum(data_dir, capsys):
    code, out, _ = run(["validate", str(data_dir / "mixed.conllu")], capsys)
    assert code == 0
    assert "2 accepted, 2 rejected" in out
    assert "cycle" in out


def test_validate_drop_punct_rejects_dependent_bearing_punct(data_dir, capsys):
    code, out, _ = run(["validate", "--drop-punct", str(data_dir / "sample_ud.conllu")], capsys)
    assert code == 0
    assert "11 accepted, 1 rejected" in out


def test_missing_input_file_is_input_error(tmp_path, capsys):
    code, _, err = run(["validate", str(tmp_path / "nope.conllu")], capsys)
    assert code == 1
    assert "input error" in err


def test_unknown_extension_is_config_error(tmp_path, capsys):
    weird = tmp_path / "corpus.txt"
    weird.write_text("x")
    code, _, err = run(["validate", str(weird)], capsys)
    assert code == 2
    assert "infer" in err


def test_no_inputs_is_config_error(capsys):
    code, _, err = run(["report"], capsys)
    assert code == 2


# --- metrics dump ----------------------------------------------------------------


def test_metrics_dump_matches_library(data_dir, tmp_path, capsys):
    out_file = tmp_path / "records.jsonl"
    code, _, _ = run(
        ["metrics", str(data_dir / "sample_ud.conllu"), "-o", str(out_file)], capsys
    )
    assert code == 0
    lines = out_file.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# ")
    meta = json.loads(lines[0][2:])
    assert meta["command"] == "metrics"
    records = [json.loads(line) for line in lines[1:]]
    sentences = parse_conllu((data_dir / "sample_ud.conllu").read_bytes(), errors="skip")
    expected = [metric_record(s).to_json_dict() for s in sentences if len(s) >= 2]
    assert records == expected


# --- report ------------------------------------------------------------------------


def test_report_bundle_on_sample_corpus(data_dir, tmp_path, capsys):
    out_dir = tmp_path / "out"
    code, _, _ = run(
        ["report", str(data_dir / "sample_200.jsonl"), "--output-dir", str(out_dir), "--min-bucket", "3"],
        capsys,
    )
    assert code == 0
    for name in (
        "dist.csv",
        "entropy.csv",
        "trend.csv",
        "corr.csv",
        "valency.csv",
        "valency_fit.csv",
        "report.json",
    ):
        assert (out_dir / name).exists(), name
    report = json.loads((out_dir / "report.json").read_text(encoding="utf-8"))
    assert report["meta"]["version"]
    assert report["meta"]["inputs"][0]["sha256"]
    # full-corpus histogram covers lengths beyond the window
    assert report["length_histogram"]["21"] == 10
    # window excludes length 21 from every analysis table
    assert all(point["sl"] <= 20 for point in report["trend"])


def test_report_trend_golden_line_for_demo_sentence(tmp_path, capsys):
    corpus = tmp_path / "one.jsonl"
    corpus.write_text(
        serialize_canonical(make_sentence(DEMO7_HEADS, id="demo7")) + "\n", encoding="utf-8"
    )
    out_dir = tmp_path / "out"
    code, _, _ = run(["report", str(corpus), "--output-dir", str(out_dir)], capsys)
    assert code == 0
    assert (out_dir / "trend.csv").read_text(encoding="utf-8") == (
        "sl,mean_mdd,mean_mhd,n\n7,1.8333,1.6667,1\n"
    )
    # a single sentence is below min_bucket, so entropy/corr points are gated
    assert (out_dir / "entropy.csv").read_text(encoding="utf-8") == "metric,sl,entropy_bits,n\n"
    gated = (out_dir / "entropy_gated.csv").read_text(encoding="utf-8")
    assert "dd,7," in gated
    assert (out_dir / "valency_fit.csv").read_text(encoding="utf-8").count("\n") == 1


def test_report_dist_probabilities_sum_to_one(data_dir, tmp_path, capsys):
    out_dir = tmp_path / "out"
    code, _, _ = run(
        ["report", str(data_dir / "sample_200.jsonl"), "--output-dir", str(out_dir)], capsys
    )
    assert code == 0
    sums: dict[tuple[str, str], float] = {}
    rows = (out_dir / "dist.csv").read_text(encoding="utf-8").splitlines()[1:]
    for row in rows:
        metric, bucket, _, _, probability = row.split(",")
        key = (metric, bucket)
        sums[key] = sums.get(key, 0.0) + float(probability)
    for key, total in sums.items():
        assert total == pytest.approx(1.0, abs=1e-4), key


def test_report_fails_on_empty_window(tmp_path, capsys):
    corpus = tmp_path / "tiny.jsonl"
    corpus.write_text('{"id":"one","nodes":[{"index":1,"head":0}]}\n', encoding="utf-8")
    code, _, err = run(["report", str(corpus), "--output-dir", str(tmp_path / "o")], capsys)
    assert code == 1
    assert "input error" in err


# --- single-analysis commands ----------------------------------------------------------


@pytest.mark.parametrize(
    "command,files",
    [
        ("dist", ["dist.csv"]),
        ("entropy", ["entropy.csv", "entropy_gated.csv"]),
        ("trend", ["trend.csv"]),
        ("corr", ["corr.csv", "corr_gated.csv"]),
        ("valency", ["valency.csv", "valency_fit.csv"]),
    ],
)
def test_single_analysis_commands_write_their_tables(command, files, data_dir, tmp_path, capsys):
    out_dir = tmp_path / command
    code, _, _ = run(
        [command, str(data_dir / "sample_200.jsonl"), "--output-dir", str(out_dir)], capsys
    )
    assert code == 0
    for name in files + ["meta.json"]:
        assert (out_dir / name).exists(), name
    meta = json.loads((out_dir / "meta.json").read_text(encoding="utf-8"))
    assert meta["command"] == command


def test_valency_lexicon_mode_via_cli(data_dir, tmp_path, capsys):
    out_dir = tmp_path / "out"
    code, _, _ = run(
        [
            "valency",
            str(data_dir / "sample_ud.conllu"),
            "--valency-mode",
            "lexicon",
            "--lexicon",
            str(data_dir / "lexicon.tsv"),
            "--output-dir",
            str(out_dir),
        ],
        capsys,
    )
    assert code == 0
    meta = json.loads((out_dir / "meta.json").read_text(encoding="utf-8"))
    assert meta["lexicon_misses"] == 0
    assert (out_dir / "valency.csv").read_text(encoding="utf-8").count("\n") > 1


def test_valency_lexicon_mode_requires_lexicon_path(data_dir, tmp_path, capsys):
    code, _, err = run(
        [
            "valency",
            str(data_dir / "sample_ud.conllu"),
            "--valency-mode",
            "lexicon",
            "--output-dir",
            str(tmp_path),
        ],
        capsys,
    )
    assert code == 2
    assert "lexicon" in err


# --- config file --------------------------------------------------------------------


def test_config_file_with_flag_override(data_dir, tmp_path, capsys):
    config = {
        "inputs": [{"path": str(data_dir / "sample_200.jsonl"), "format": "canonical"}],
        "sl_max": 12,
        "min_bucket": 5,
        "output_dir": str(tmp_path / "from_config"),
    }
    config_path = tmp_path / "run.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")

    code, _, _ = run(["report", "--config", str(config_path)], capsys)
    assert code == 0
    report = json.loads((tmp_path / "from_config" / "report.json").read_text(encoding="utf-8"))
    assert report["meta"]["config"]["sl_max"] == 12

    out_dir = tmp_path / "flag_wins"
    code, _, _ = run(
        ["report", "--config", str(config_path), "--sl-max", "9", "--output-dir", str(out_dir)],
        capsys,
    )
    assert code == 0
    report = json.loads((out_dir / "report.json").read_text(encoding="utf-8"))
    assert report["meta"]["config"]["sl_max"] == 9
    assert all(point["sl"] <= 9 for point in report["trend"])


def test_config_file_errors(data_dir, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    code, _, err = run(["report", "--config", str(bad)], capsys)
    assert code == 2

    code, _, err = run(["report", "--config", str(tmp_path / "absent.json")], capsys)
    assert code == 2
    assert "config" in err

    unknown = tmp_path / "unknown.json"
    unknown.write_text('{"sl_maximum": 5}', encoding="utf-8")
    code, _, err = run(["report", "--config", str(unknown)], capsys)
    assert code == 2
    assert "unknown config key" in err


def test_invalid_settings_are_config_errors(data_dir, capsys):
    corpus = str(data_dir / "sample_200.jsonl")
    assert run(["report", corpus, "--min-bucket", "2"], capsys)[0] == 2
    assert run(["report", corpus, "--sl-min", "1"], capsys)[0] == 2
    assert run(["report", corpus, "--sl-min", "10", "--sl-max", "5"], capsys)[0] == 2


# --- generate ---------------------------------------------------------------------------


def test_generate_reproducible_and_parseable(tmp_path, capsys):
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    for path in (a, b):
        code, _, _ = run(["generate", "--n", "5", "--count", "3", "--seed", "7", "-o", str(path)], capsys)
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    sentences = parse_canonical(a.read_bytes())
    assert len(sentences) == 3
    header = a.read_text(encoding="utf-8").splitlines()[0]
    assert header.startswith("# ")
    meta = json.loads(header[2:])
    assert meta["seed"] == 7 and meta["n"] == 5 and meta["count"] == 3


def test_generate_respects_out_degree_cap(tmp_path, capsys):
    path = tmp_path / "capped.jsonl"
    code, _, _ = run(
        ["generate", "--n", "10", "--count", "50", "--seed", "2", "--max-root-out-degree", "4", "-o", str(path)],
        capsys,
    )
    assert code == 0
    for sent in parse_canonical(path.read_bytes()):
        assert metric_record(sent).root_out_degree <= 4


def test_generate_constraint_conflicts_and_bad_caps(tmp_path, capsys):
    code, _, err = run(
        ["generate", "--n", "5", "--seed", "1", "--constraint", "chain", "--max-root-out-degree", "2"],
        capsys,
    )
    assert code == 2
    code, _, err = run(["generate", "--n", "5", "--seed", "1", "--max-root-out-degree", "0"], capsys)
    assert code == 2


def test_generate_then_report_round_trip(tmp_path, capsys):
    corpus = tmp_path / "gen.jsonl"
    code, _, _ = run(["generate", "--n", "8", "--count", "40", "--seed", "13", "-o", str(corpus)], capsys)
    assert code == 0
    out_dir = tmp_path / "out"
    code, _, _ = run(["report", str(corpus), "--output-dir", str(out_dir), "--min-bucket", "3"], capsys)
    assert code == 0
    report = json.loads((out_dir / "report.json").read_text(encoding="utf-8"))
    assert report["meta"]["sentence_counts"]["accepted"] == 40
    assert report["meta"]["sentence_counts"]["rejected"] == 0


def test_entropy_base_flag_rescales_series(data_dir, tmp_path, capsys):
    import math

    corpus = str(data_dir / "sample_200.jsonl")
    bits_dir, nats_dir = tmp_path / "bits", tmp_path / "nats"
    assert run(["entropy", corpus, "--output-dir", str(bits_dir), "--min-bucket", "3"], capsys)[0] == 0
    assert run(
        ["entropy", corpus, "--output-dir", str(nats_dir), "--min-bucket", "3", "--entropy-base", "e"],
        capsys,
    )[0] == 0

    def rows(path):
        out = {}
        for line in path.read_text(encoding="utf-8").splitlines()[1:]:
            metric, sl, value, _ = line.split(",")
            out[(metric, int(sl))] = float(value)
        return out

    bits = rows(bits_dir / "entropy.csv")
    nats = rows(nats_dir / "entropy.csv")
    assert bits and bits.keys() == nats.keys()
    for key, value in bits.items():
        assert nats[key] == pytest.approx(value * math.log(2.0), abs=2e-4)


def test_log_base_flag_rescales_hd1_slope(data_dir, tmp_path, capsys):
    import math

    corpus = str(data_dir / "sample_200.jsonl")
    e_dir, ten_dir = tmp_path / "e", tmp_path / "ten"
    assert run(["valency", corpus, "--output-dir", str(e_dir)], capsys)[0] == 0
    assert run(["valency", corpus, "--output-dir", str(ten_dir), "--log-base", "10"], capsys)[0] == 0

    def hd1_slopes(path):
        out = {}
        for line in path.read_text(encoding="utf-8").splitlines()[1:]:
            fields = line.split(",")
            if fields[0] == "hd1":
                out[int(fields[1])] = float(fields[3])
        return out

    natural = hd1_slopes(e_dir / "valency_fit.csv")
    base10 = hd1_slopes(ten_dir / "valency_fit.csv")
    assert natural and natural.keys() == base10.keys()
    for valency, slope in natural.items():
        assert base10[valency] == pytest.approx(slope * math.log(10.0), abs=2e-3)


def test_metrics_dump_to_stdout(data_dir, capsys):
    code, out, _ = run(["metrics", str(data_dir / "sample.cabocha")], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# ")
    assert json.loads(lines[1])["sl"] == 7


def test_internal_errors_exit_three(data_dir, capsys, monkeypatch):
    import depmetrics.cli as cli_module

    def boom(config, corpus):
        raise RuntimeError("synthetic failure")

    monkeypatch.setattr(cli_module, "compute_analyses", boom)
    code, _, err = run(["report", str(data_dir / "sample_200.jsonl")], capsys)
    assert code == 3
    assert "internal error" in err


def test_partial_outputs_removed_on_write_failure(tmp_path):
    from depmetrics.report import write_outputs

    files = {"ok.csv": "a,b\n", "sub/dir/broken.csv": "c,d\n"}  # second write fails
    with pytest.raises(OSError):
        write_outputs(str(tmp_path), files)
    assert not (tmp_path / "ok.csv").exists()


def test_console_entry_point_runs():
    result = subprocess.run(
        [sys.executable, "-m", "depmetrics", "--version"], capture_output=True, text=True
    )
    assert result.returncode == 0
    assert "depmetrics" in result.stdout
