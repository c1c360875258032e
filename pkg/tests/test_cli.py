"""End-to-end CLI tests driven through main()."""

import json

import pytest

from keytap.cli import main
from keytap.report import read_json_report

TINY_SPEC = {
    "seed": 51,
    "keys": ["a", "b", "c"],
    "samples_per_key": 4,
    "separation": 2.0,
}


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    spec_path = root / "spec.json"
    spec_path.write_text(json.dumps(TINY_SPEC))
    out = root / "corpus"
    assert main(["synth", "--spec", str(spec_path), "--out", str(out)]) == 0
    return out


class TestDispatch:
    def test_no_command_prints_usage(self, capsys):
        assert main([]) == 1
        assert "usage" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 1
        err = capsys.readouterr().err
        assert "usage" in err

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "synth" in capsys.readouterr().out

    def test_missing_input_is_io_error(self, capsys, tmp_path):
        rc = main(["segment", "/nonexistent/audio.wav", "--out-dir",
                   str(tmp_path / "segs")])
        assert rc == 2
        assert "/nonexistent/audio.wav" in capsys.readouterr().err

    def test_contract_error_is_exit_one(self, capsys, tmp_path):
        spec = tmp_path / "bad.json"
        spec.write_text(json.dumps({"separation": -1.0}))
        rc = main(["synth", "--spec", str(spec), "--out",
                   str(tmp_path / "x")])
        assert rc == 1
        assert "error" in capsys.readouterr().err


class TestSynth:
    def test_writes_manifest_and_sessions(self, corpus_dir):
        manifest = corpus_dir / "manifest.jsonl"
        assert manifest.exists()
        assert len(manifest.read_text().splitlines()) == 12
        doc = json.loads((corpus_dir / "sessions.json").read_text())
        assert doc["sessions"][0]["labels"]

    def test_preset_runs(self, tmp_path):
        out = tmp_path / "preset"
        rc = main(["synth", "--preset", "high-separation", "--seed", "3",
                   "--out", str(out)])
        assert rc == 0
        assert (out / "manifest.jsonl").exists()

    def test_seed_flag_changes_audio(self, tmp_path, corpus_dir):
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(TINY_SPEC))
        other = tmp_path / "reseeded"
        assert main(["synth", "--spec", str(spec_path), "--seed", "99",
                     "--out", str(other)]) == 0
        a = sorted((corpus_dir / "segments").glob("*.wav"))[0]
        b = sorted((other / "segments").glob("*.wav"))[0]
        assert a.read_bytes() != b.read_bytes()

    def test_keytap_seed_env_overrides(self, tmp_path, monkeypatch,
                                       corpus_dir):
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(TINY_SPEC))
        monkeypatch.setenv("KEYTAP_SEED", "99")
        via_env = tmp_path / "via-env"
        assert main(["synth", "--spec", str(spec_path), "--out",
                     str(via_env)]) == 0
        monkeypatch.delenv("KEYTAP_SEED")
        via_flag = tmp_path / "via-flag"
        assert main(["synth", "--spec", str(spec_path), "--seed", "99",
                     "--out", str(via_flag)]) == 0
        a = sorted((via_env / "segments").glob("*.wav"))[0]
        b = sorted((via_flag / "segments").glob("*.wav"))[0]
        assert a.read_bytes() == b.read_bytes()


class TestPipeline:
    def test_train_eval_roundtrip(self, corpus_dir, tmp_path, capsys):
        manifest = str(corpus_dir / "manifest.jsonl")
        model = tmp_path / "model.json"
        assert main(["train", "--manifest", manifest, "--kind", "lr",
                     "--out", str(model)]) == 0
        report_path = tmp_path / "eval.json"
        assert main(["eval", "--model", str(model), "--manifest", manifest,
                     "--top-n", "1,3", "--out", str(report_path)]) == 0
        doc = read_json_report(report_path)
        # resubstitution on a separable corpus is perfect
        assert doc["results"]["accuracy"]["1"] == 1.0
        assert doc["provenance"]["tool"] == "keytap"

    def test_features_csv(self, corpus_dir, tmp_path):
        out = tmp_path / "features.csv"
        assert main(["features", str(corpus_dir / "manifest.jsonl"),
                     "--kind", "mfcc", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 13
        assert lines[0].startswith("key_label,")

    def test_segment_session(self, corpus_dir, tmp_path):
        session = next((corpus_dir / "sessions").glob("session_*.wav"))
        out_dir = tmp_path / "segmented"
        rc = main(["segment", str(session), "--expected", "12",
                   "--out-dir", str(out_dir)])
        assert rc == 0
        assert len(list(out_dir.glob("*.wav"))) == 12
        doc = json.loads((out_dir / "segments.json").read_text())
        assert len(doc["results"]["segments"]) == 12

    def test_scenario_complete_profiling(self, corpus_dir, tmp_path):
        spec = tmp_path / "scenario.json"
        spec.write_text(json.dumps({
            "kind": "CompleteProfiling", "folds": 2, "top_n": [1, 3],
            "rfe_fraction": None}))
        out = tmp_path / "report.json"
        svg = tmp_path / "curve.svg"
        rc = main(["scenario", "--spec", str(spec), "--manifest",
                   str(corpus_dir / "manifest.jsonl"), "--out", str(out),
                   "--svg", str(svg)])
        assert rc == 0
        doc = read_json_report(out)
        assert set(doc["results"]["mean"]) == {"1", "3"}
        assert svg.read_text().startswith("<svg")

    def test_report_reruns_are_byte_identical(self, corpus_dir, tmp_path):
        spec = tmp_path / "scenario.json"
        spec.write_text(json.dumps({
            "kind": "CompleteProfiling", "folds": 2, "top_n": [1],
            "rfe_fraction": None, "seed": 5}))
        one = tmp_path / "one.json"
        two = tmp_path / "two.json"
        for out in (one, two):
            assert main(["scenario", "--spec", str(spec), "--manifest",
                         str(corpus_dir / "manifest.jsonl"),
                         "--out", str(out)]) == 0
        assert one.read_bytes() == two.read_bytes()


class TestAudioCommands:
    def test_channel_and_mixvoice(self, corpus_dir, tmp_path):
        wav = sorted((corpus_dir / "segments").glob("*.wav"))[0]
        filtered = tmp_path / "filtered.wav"
        assert main(["channel", "--kbps", "20", str(wav),
                     str(filtered)]) == 0
        assert filtered.exists()
        voice = sorted((corpus_dir / "sessions").glob("*.wav"))[0]
        mixed = tmp_path / "mixed.wav"
        assert main(["mixvoice", "--rel-db", "5", "--voice", str(voice),
                     str(wav), str(mixed)]) == 0
        assert mixed.exists()

    def test_defend_single_and_batch(self, corpus_dir, tmp_path):
        wav = sorted((corpus_dir / "segments").glob("*.wav"))[0]
        out = tmp_path / "defended.wav"
        assert main(["defend", str(wav), str(out), "--seed", "3"]) == 0
        assert out.read_bytes() != wav.read_bytes()
        batch_out = tmp_path / "defended-dir"
        assert main(["defend", "--in-dir",
                     str(corpus_dir / "segments"), "--out-dir",
                     str(batch_out), "--seed", "3"]) == 0
        assert (len(list(batch_out.glob("*.wav")))
                == len(list((corpus_dir / "segments").glob("*.wav"))))


class TestAnalysisCommands:
    def test_crack_estimate_prints_exact_phase0(self, capsys, tmp_path):
        out = tmp_path / "crack.json"
        rc = main(["crack-estimate", "--alphabet", "26", "--length", "10",
                   "--guesses", "5", "--acc", "1.0", "--target", "0.5",
                   "--out", str(out)])
        assert rc == 0
        assert "phase0_count 9765625" in capsys.readouterr().out
        doc = read_json_report(out)
        assert doc["results"]["phase0_count"] == 9765625

    def test_crack_estimate_flags_bad_reference(self, capsys):
        rc = main(["crack-estimate", "--alphabet", "26", "--length", "10",
                   "--guesses", "5", "--acc", "0.8", "--target", "0.5",
                   "--reference-half-space", "8.39e13"])
        assert rc == 0
        assert "INCONSISTENT" in capsys.readouterr().out

    def test_device_id(self, corpus_dir, capsys):
        manifest = str(corpus_dir / "manifest.jsonl")
        rc = main(["device-id", "--db", manifest, "--query", manifest])
        assert rc == 0
        out = capsys.readouterr().out
        assert "model=model0" in out

    def test_sweep_length(self, corpus_dir, tmp_path):
        out = tmp_path / "sweep.json"
        rc = main(["sweep-length", "--manifest",
                   str(corpus_dir / "manifest.jsonl"), "--lengths", "20,100",
                   "--folds", "2", "--top-n", "1", "--out", str(out)])
        assert rc == 0
        doc = read_json_report(out)
        assert set(doc["results"]) == {"0.020", "0.100"}

    def test_eval_countermeasure(self, corpus_dir, tmp_path):
        out = tmp_path / "cm.json"
        rc = main(["eval-countermeasure", "--manifest",
                   str(corpus_dir / "manifest.jsonl"), "--kinds", "mfcc",
                   "--folds", "2", "--top-n", "1", "--out", str(out)])
        assert rc == 0
        doc = read_json_report(out)
        assert "clean" in doc["results"]["mfcc"]
        assert "equalized" in doc["results"]["mfcc"]

    def test_words(self, corpus_dir, tmp_path, capsys):
        manifest = str(corpus_dir / "manifest.jsonl")
        model = tmp_path / "model.json"
        assert main(["train", "--manifest", manifest, "--kind", "lr",
                     "--out", str(model)]) == 0
        dictionary = tmp_path / "dict.txt"
        dictionary.write_text("cab\nabc\nbac\n")
        rc = main(["words", "--model", str(model), "--bank",
                   str(corpus_dir), "--dict", str(dictionary),
                   "--trials", "3"])
        assert rc == 0
        assert "char error" in capsys.readouterr().out
