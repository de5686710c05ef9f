from __future__ import annotations

import json

import numpy as np
import pytest

from featstats.cli import main
from featstats.tensor_store import (
    FeatureTensor,
    ManifestEntry,
    RunManifest,
    save_manifest,
    write_tensor_file,
)


def write_run(tmp_path, tensors, scores=None, tag="enc"):
    run = tmp_path
    run.mkdir(parents=True, exist_ok=True)
    entries = []
    for epoch, data in enumerate(tensors):
        name = f"ep{epoch}.fst"
        write_tensor_file(FeatureTensor(np.asarray(data)), run / name)
        entry_scores = {"spider": scores[epoch]} if scores else None
        entries.append(ManifestEntry(epoch, name, entry_scores, tag))
    save_manifest(RunManifest(entries, root=run), run / "manifest.jsonl")
    return run / "manifest.jsonl"


@pytest.fixture
def identity_corpus(tmp_path):
    lines = [
        {"id": "a", "hyp": "a dog barks at the door",
         "refs": ["a dog barks at the door", "dog barking"]},
        {"id": "b", "hyp": "water drips into a sink",
         "refs": ["water drips into a sink"]},
    ]
    path = tmp_path / "corpus.jsonl"
    path.write_text("\n".join(json.dumps(x) for x in lines) + "\n")
    return path


class TestStats:
    def test_csv_output(self, tmp_path, capsys):
        rng = np.random.default_rng(1)
        manifest = write_run(tmp_path / "run",
                             [rng.normal(size=(2, 3, 32)) for _ in range(3)])
        assert main(["stats", str(manifest)]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "epoch,kurtosis,skewness,degenerate_frames"
        assert len(lines) == 4

    def test_definition_flag(self, tmp_path, capsys):
        manifest = write_run(tmp_path / "run",
                             [np.array([1.0, 2, 3, 4, 5]).reshape(1, 1, 5)])
        assert main(["stats", str(manifest), "--definition", "pearson-beta2"]) == 0
        row = capsys.readouterr().out.strip().splitlines()[1].split(",")
        assert float(row[1]) == pytest.approx(1.7)

    def test_missing_tensor_exit2(self, tmp_path, capsys):
        manifest = write_run(tmp_path / "run", [np.zeros((1, 1, 4)) + [1, 2, 3, 4]])
        (tmp_path / "run" / "ep0.fst").unlink()
        assert main(["stats", str(manifest)]) == 2
        assert "epoch 0" in capsys.readouterr().err

    def test_out_file(self, tmp_path):
        rng = np.random.default_rng(2)
        manifest = write_run(tmp_path / "run", [rng.normal(size=(1, 2, 16))])
        out = tmp_path / "stats.csv"
        assert main(["stats", str(manifest), "--out", str(out)]) == 0
        assert out.read_text().startswith("epoch,")

    def test_bad_definition_token(self, tmp_path, capsys):
        manifest = write_run(tmp_path / "run", [np.zeros((1, 1, 4))])
        assert main(["stats", str(manifest), "--definition", "nope"]) == 2


class TestConfigFile:
    def test_config_supplies_options(self, tmp_path, capsys):
        manifest = write_run(tmp_path / "run",
                             [np.array([1.0, 2, 3, 4, 5]).reshape(1, 1, 5)])
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"definition": "pearson-beta2"}))
        assert main(["stats", str(manifest), "--config", str(config)]) == 0
        row = capsys.readouterr().out.strip().splitlines()[1].split(",")
        assert float(row[1]) == pytest.approx(1.7)

    def test_explicit_flag_beats_config(self, tmp_path, capsys):
        manifest = write_run(tmp_path / "run",
                             [np.array([1.0, 2, 3, 4, 5]).reshape(1, 1, 5)])
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"definition": "pearson-beta2"}))
        assert main(["stats", str(manifest), "--config", str(config),
                     "--definition", "fisher"]) == 0
        row = capsys.readouterr().out.strip().splitlines()[1].split(",")
        assert float(row[1]) == pytest.approx(-1.3)

    def test_unknown_config_key(self, tmp_path, capsys):
        manifest = write_run(tmp_path / "run", [np.zeros((1, 1, 4))])
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"bogus": 1}))
        assert main(["stats", str(manifest), "--config", str(config)]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_stopcheck_numbers_from_config(self, tmp_path, capsys):
        stats = tmp_path / "stats.csv"
        rows = ["epoch,kurtosis,skewness,degenerate_frames"]
        rows += [f"{e},{k},1.0,0" for e, k in
                 enumerate([5, 4, 3, 2.00, 2.02, 1.98, 2.01])]
        stats.write_text("\n".join(rows) + "\n")
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"epsilon": 0.05, "window": 3}))
        assert main(["stopcheck", str(stats), "--config", str(config)]) == 0
        assert json.loads(capsys.readouterr().out)["epoch"] == 6


class TestEval:
    def test_identity_metrics(self, identity_corpus, capsys):
        assert main(["eval", str(identity_corpus),
                     "--metrics", "bleu4,rouge_l"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["bleu4"] == pytest.approx(1.0)
        assert payload["rouge_l"] == pytest.approx(1.0)

    def test_spice_composition(self, identity_corpus, tmp_path, capsys):
        spice = tmp_path / "spice.json"
        spice.write_text(json.dumps({"a": 0.5, "b": 0.3}))
        assert main(["eval", str(identity_corpus), "--metrics", "cider",
                     "--spice", str(spice)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["spider"] == pytest.approx((payload["cider"] + 0.4) / 2)

    def test_spice_missing_id(self, identity_corpus, tmp_path, capsys):
        spice = tmp_path / "spice.json"
        spice.write_text(json.dumps({"a": 0.5}))
        assert main(["eval", str(identity_corpus), "--metrics", "cider",
                     "--spice", str(spice)]) == 2
        assert "b" in capsys.readouterr().err

    def test_spider_lite_key(self, identity_corpus, capsys):
        assert main(["eval", str(identity_corpus), "--metrics", "cider"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert "spider_lite" in payload

    def test_malformed_jsonl(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"id": "a", "hyp": "x", "refs": ["x"]}\n{oops\n')
        assert main(["eval", str(bad)]) == 2
        assert "line 2" in capsys.readouterr().err


class TestCorrelateAndStop:
    def make_csvs(self, tmp_path, kurts, skews, scores):
        stats = tmp_path / "stats.csv"
        rows = ["epoch,kurtosis,skewness,degenerate_frames"]
        rows += [f"{e},{k},{s},0" for e, (k, s) in enumerate(zip(kurts, skews))]
        stats.write_text("\n".join(rows) + "\n")
        sc = tmp_path / "scores.csv"
        sc.write_text("epoch,spider\n" +
                      "\n".join(f"{e},{v}" for e, v in enumerate(scores)) + "\n")
        return stats, sc

    def test_correlate(self, tmp_path, capsys):
        stats, scores = self.make_csvs(tmp_path, [0, 1, 2, 3], [0, 2, 4, 6],
                                       [0.1, 0.2, 0.25, 0.3])
        assert main(["correlate", str(stats), str(scores)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["kurtosis"]["spearman"] == pytest.approx(1.0)
        assert payload["kurtosis"]["n_points"] == 4

    def test_correlate_insufficient(self, tmp_path, capsys):
        stats, _ = self.make_csvs(tmp_path, [0, 1], [0, 1], [0.1, 0.2])
        scores = tmp_path / "one.csv"
        scores.write_text("epoch,spider\n0,0.1\n")
        assert main(["correlate", str(stats), str(scores)]) == 2

    def test_stopcheck_stops(self, tmp_path, capsys):
        stats, _ = self.make_csvs(tmp_path,
                                  [5, 4, 3, 2.00, 2.02, 1.98, 2.01],
                                  [1.0] * 7, [0.1] * 7)
        code = main(["stopcheck", str(stats), "--epsilon", "0.05",
                     "--window", "3"])
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload == {"stop": True, "window": 3, "epsilon": 0.05,
                           "epoch": 6, "index": 6}

    def test_stopcheck_no_stop(self, tmp_path, capsys):
        stats, _ = self.make_csvs(tmp_path, list(range(8)), [0.0] * 8, [0.1] * 8)
        assert main(["stopcheck", str(stats)]) == 1
        assert json.loads(capsys.readouterr().out)["stop"] is False

    def test_stopcheck_malformed(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("nope,nope\n1,2\n")
        assert main(["stopcheck", str(bad)]) == 2


class TestRank:
    def test_ranking(self, tmp_path, capsys):
        rng = np.random.default_rng(3)
        low = write_run(tmp_path / "low",
                        [rng.normal(size=(2, 3, 64)) for _ in range(2)], tag="low")
        heavy = rng.standard_t(df=5, size=(2, 3, 64))
        high = write_run(tmp_path / "high", [heavy, heavy], tag="high")
        assert main(["rank", str(low), str(high), "--statistic", "kurtosis"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["ranking"][0]["encoder"] == "high"

    def test_unreadable_run(self, tmp_path, capsys):
        assert main(["rank", str(tmp_path / "absent.jsonl")]) == 2


class TestSynthReport:
    def test_end_to_end_pipeline(self, tmp_path, capsys):
        spec = {
            "epochs": 10,
            "kurtosis_path": list(np.linspace(0.0, 3.0, 10)),
            "skewness_path": list(np.linspace(0.0, 1.0, 10)),
            "noise_sigma": 0.0,
            "score_link": "monotone-in-kurtosis",
            "seed": 11,
        }
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(spec))
        run_dir = tmp_path / "run"
        assert main(["synth", str(spec_path), "--dims", "4x6x128",
                     "--out-dir", str(run_dir)]) == 0
        capsys.readouterr()

        stats_csv = tmp_path / "stats.csv"
        assert main(["stats", str(run_dir / "manifest.jsonl"),
                     "--out", str(stats_csv)]) == 0

        scores_csv = tmp_path / "scores.csv"
        manifest_lines = (run_dir / "manifest.jsonl").read_text().splitlines()
        rows = ["epoch,spider"]
        for line in manifest_lines:
            obj = json.loads(line)
            rows.append(f"{obj['epoch']},{obj['scores']['spider']}")
        scores_csv.write_text("\n".join(rows) + "\n")

        assert main(["correlate", str(stats_csv), str(scores_csv)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["kurtosis"]["spearman"] == pytest.approx(1.0)

    def test_report_bundle(self, tmp_path, capsys):
        spec = {
            "epochs": 20,
            "kurtosis_path": list(np.linspace(0.5, 2.5, 20)),
            "skewness_path": list(np.linspace(0.1, 1.0, 20)),
            "noise_sigma": 0.05,
            "seed": 21,
        }
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(spec))
        run_dir = tmp_path / "run"
        assert main(["synth", str(spec_path), "--dims", "3x4x64",
                     "--out-dir", str(run_dir)]) == 0
        out_dir = tmp_path / "report"
        assert main(["report", str(run_dir), "--out-dir", str(out_dir)]) == 0

        index = json.loads((out_dir / "index.json").read_text())
        for name in index.values():
            assert (out_dir / name).exists()
        svg = (out_dir / "kurtosis.svg").read_text()
        assert svg.count("<polyline") == 2
        assert "epoch 0..19" in svg
        assert "correlation_json" in index

    def test_report_without_scores(self, tmp_path, capsys):
        rng = np.random.default_rng(5)
        write_run(tmp_path / "run", [rng.normal(size=(2, 2, 32)) for _ in range(3)])
        out_dir = tmp_path / "report"
        assert main(["report", str(tmp_path / "run"), "--out-dir", str(out_dir)]) == 0
        index = json.loads((out_dir / "index.json").read_text())
        assert "correlation_json" not in index
        svg = (out_dir / "kurtosis.svg").read_text()
        assert svg.count("<polyline") == 1

    def test_report_deterministic(self, tmp_path, capsys):
        rng = np.random.default_rng(6)
        tensors = [rng.normal(size=(2, 2, 32)) for _ in range(3)]
        write_run(tmp_path / "run", tensors, scores=[0.1, 0.2, 0.3])
        a, b = tmp_path / "r1", tmp_path / "r2"
        assert main(["report", str(tmp_path / "run"), "--out-dir", str(a)]) == 0
        assert main(["report", str(tmp_path / "run"), "--out-dir", str(b)]) == 0
        for name in json.loads((a / "index.json").read_text()).values():
            assert (a / name).read_bytes() == (b / name).read_bytes()
