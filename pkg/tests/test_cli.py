import csv
import hashlib
import json

import pytest

from charentropy.cli import main
from charentropy.session import write_observations

from synth import flat_observations, make_sessions


def sentence_text(n, seed):
    import random
    rng = random.Random(seed)
    letters = "АБВГДЕЖЗИКЛМНОПРСТУ"
    chars = ["" if False else (" " if j % 6 == 5 else rng.choice(letters))
             for j in range(n)]
    return "".join(chars).strip().ljust(n, "Я")


@pytest.fixture
def article_dir(tmp_path):
    d = tmp_path / "articles"
    d.mkdir()
    (d / "a1.txt").write_text(
        f"{sentence_text(140, 1)}. {sentence_text(80, 2)}. {sentence_text(190, 3)}!",
        encoding="utf-8")
    (d / "a2.txt").write_text(
        f"Latin text here {sentence_text(150, 4)}. {sentence_text(160, 5)}?",
        encoding="utf-8")
    manifest = {
        "a1.txt": {"id": "art1", "published_date": "2025-08-08"},
        "a2.txt": {"id": "art2", "published_date": "2026-01-23"},
    }
    mpath = tmp_path / "manifest.json"
    mpath.write_text(json.dumps(manifest), encoding="utf-8")
    return d, mpath


@pytest.fixture
def obs_file(tmp_path):
    sessions, _ = make_sessions(60, seed=21)
    path = tmp_path / "observations.jsonl"
    write_observations(flat_observations(sessions), path)
    return path


class TestCorpusPrepare:
    def test_prepare_writes_pool(self, article_dir, tmp_path):
        d, mpath = article_dir
        out = tmp_path / "pool.jsonl"
        rc = main(["corpus", "prepare", "--in", str(d), "--manifest", str(mpath),
                   "--out", str(out), "--min-len", "120", "--max-len", "200"])
        assert rc == 0
        lines = out.read_text(encoding="utf-8").strip().split("\n")
        assert len(lines) == 3  # 140, 190, 160 survive; 80 too short; latin dropped

    def test_rerun_identical_hash(self, article_dir, tmp_path):
        d, mpath = article_dir
        out = tmp_path / "pool.jsonl"
        args = ["corpus", "prepare", "--in", str(d), "--manifest", str(mpath),
                "--out", str(out)]
        main(args)
        h1 = hashlib.sha256(out.read_bytes()).hexdigest()
        main(args)
        assert hashlib.sha256(out.read_bytes()).hexdigest() == h1

    def test_empty_pool_nonzero_exit(self, tmp_path, capsys):
        d = tmp_path / "empty"
        d.mkdir()
        (d / "a.txt").write_text("Закоротке.", encoding="utf-8")
        mpath = tmp_path / "m.json"
        mpath.write_text(json.dumps(
            {"a.txt": {"id": "a", "published_date": "2025-01-01"}}))
        rc = main(["corpus", "prepare", "--in", str(d), "--manifest", str(mpath),
                   "--out", str(tmp_path / "pool.jsonl")])
        assert rc == 1
        assert "EmptyPool" in capsys.readouterr().err


class TestAnalyzeBounds:
    def test_report_and_csvs(self, obs_file, tmp_path):
        out = tmp_path / "report.json"
        rc = main(["analyze", "bounds", "--obs", str(obs_file),
                   "--out", str(out), "--replicates", "50", "--seed", "7",
                   "--trim", "0.5"])
        assert rc == 0
        report = json.loads(out.read_text())
        assert 0 <= report["h_lower"] <= report["h_upper"]
        assert report["bootstrap"]["seed"] == 7
        for path in report["figure_csvs"].values():
            assert (tmp_path / path).exists() or __import__("os").path.exists(path)

    def test_deterministic_given_seed(self, obs_file, tmp_path):
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        args = ["analyze", "bounds", "--obs", str(obs_file),
                "--replicates", "50", "--seed", "3", "--trim", "0.5"]
        main(args + ["--out", str(out1)])
        main(args + ["--out", str(out2)])
        r1, r2 = json.loads(out1.read_text()), json.loads(out2.read_text())
        r1.pop("figure_csvs"), r2.pop("figure_csvs")
        assert r1 == r2

    def test_perfect_guessers_zero_bounds(self, tmp_path):
        from charentropy.session import Observation
        obs = [Observation(f"s{i}", "p", "x", 70 + j, 1, 0.0)
               for i in range(5) for j in range(20)]
        path = tmp_path / "obs.jsonl"
        write_observations(obs, path)
        out = tmp_path / "report.json"
        rc = main(["analyze", "bounds", "--obs", str(path), "--out", str(out),
                   "--replicates", "20", "--seed", "1", "--trim", "0.0",
                   "--alpha", "1e-9"])
        assert rc == 0
        report = json.loads(out.read_text())
        assert report["h_upper"] == 0.0 and report["h_lower"] == 0.0


class TestTrimTable:
    def test_table_csv(self, obs_file, tmp_path):
        out = tmp_path / "table.csv"
        rc = main(["analyze", "trim-table", "--obs", str(obs_file),
                   "--out", str(out), "--trims", "0,0.5,0.9",
                   "--replicates", "30", "--seed", "5"])
        assert rc == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert [float(r["trim"]) for r in rows] == [0.0, 0.5, 0.9]
        pools = [int(r["pool"]) for r in rows]
        assert pools == sorted(pools, reverse=True)


class TestBootstrapCmd:
    def test_bootstrap_json(self, obs_file, tmp_path):
        out = tmp_path / "boot.json"
        rc = main(["analyze", "bootstrap", "--obs", str(obs_file),
                   "--out", str(out), "--replicates", "40", "--seed", "2",
                   "--trim", "0.5"])
        assert rc == 0
        result = json.loads(out.read_text())
        assert result["ci95"][0] <= result["median"] <= result["ci95"][1]


class TestExportFigures:
    def test_three_csvs(self, obs_file, tmp_path):
        out = tmp_path / "figs"
        rc = main(["export-figures", "--obs", str(obs_file), "--out", str(out)])
        assert rc == 0
        names = {p.name for p in out.iterdir()}
        assert names == {"entropy_by_position.csv", "observations_by_position.csv",
                         "session_scores.csv"}


class TestLlmEvalCmd:
    def make_corpus_and_mock(self, tmp_path):
        raw = "а" * 70 + "бвгд"
        pool = tmp_path / "pool.jsonl"
        pool.write_text(json.dumps({
            "id": "s1", "normalized_text": raw.upper(), "raw_text": raw,
            "length": len(raw), "source_article": "a1"}, ensure_ascii=False) + "\n",
            encoding="utf-8")
        mock = tmp_path / "mock.json"
        mock.write_text(json.dumps({raw: [
            {"text": "а" * 70, "start": 0, "logprob": -7.0, "base": "2"},
            {"text": "бв", "start": 70, "logprob": -1.0, "base": "2"},
            {"text": "гд", "start": 72, "logprob": -2.0, "base": "2"},
        ]}, ensure_ascii=False), encoding="utf-8")
        return pool, mock

    def test_mock_provider_bpc(self, tmp_path):
        pool, mock = self.make_corpus_and_mock(tmp_path)
        out = tmp_path / "results.json"
        rc = main(["llm-eval", "--corpus", str(pool),
                   "--provider", f"mock:{mock}", "--model", "test-model",
                   "--out", str(out)])
        assert rc == 0
        results = json.loads(out.read_text())["results"]
        # (1 + 2) bits over 4 counted chars
        assert results[0]["bpc"] == pytest.approx(0.75, abs=1e-9)

    def test_unreachable_provider_nonzero(self, tmp_path):
        pool, _ = self.make_corpus_and_mock(tmp_path)
        rc = main(["llm-eval", "--corpus", str(pool),
                   "--provider", "http://127.0.0.1:1/logprobs",
                   "--model", "m", "--max-retries", "1",
                   "--out", str(tmp_path / "r.json")])
        assert rc == 1
