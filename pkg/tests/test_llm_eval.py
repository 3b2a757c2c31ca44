import json
import math
from datetime import date

import pytest

from charentropy import llm_eval
from charentropy.corpus import SentenceRecord
from charentropy.errors import (
    MalformedResponse,
    MissingDate,
    NoCountedTokens,
    ProviderUnavailable,
    TokenizationGap,
)


def tok(text, start, logprob, base="2"):
    return llm_eval.TokenLogprob.from_tagged(text, start, logprob, base)


def tile(sentence, pieces, logprobs, base="2"):
    tokens, cursor = [], 0
    for piece, lp in zip(pieces, logprobs):
        tokens.append(tok(piece, cursor, lp, base))
        cursor += len(piece)
    assert cursor == len(sentence)
    return tokens


class TestTokenIngestion:
    def test_base_conversion_nats(self):
        t = tok("ab", 0, -math.log(2.0), base="e")
        assert t.logprob_bits == pytest.approx(-1.0, abs=1e-12)

    def test_base_conversion_log10(self):
        t = tok("ab", 0, -1.0, base="10")
        assert t.logprob_bits == pytest.approx(-math.log2(10), abs=1e-12)

    def test_unknown_base(self):
        with pytest.raises(MalformedResponse):
            tok("ab", 0, -1.0, base="7")

    def test_positive_logprob_rejected(self):
        with pytest.raises(MalformedResponse):
            tok("ab", 0, 0.5)


class TestScoreSentence:
    def test_hand_arithmetic(self):
        # two included tokens, P = 0.5 each, 4 chars -> 2 bits, 0.5 bpc
        sentence = "x" * 70 + "abcd"
        tokens = tile(sentence, ["x" * 70, "ab", "cd"], [-0.1, -1.0, -1.0])
        score = llm_eval.score_sentence(tokens, sentence, mask_from=70)
        assert score.bits == pytest.approx(2.0, abs=1e-12)
        assert score.counted_chars == 4
        assert score.counted_tokens == 2

    def test_fully_masked(self):
        sentence = "abcdef"
        tokens = tile(sentence, ["abc", "def"], [-1.0, -1.0])
        score = llm_eval.score_sentence(tokens, sentence, mask_from=70)
        assert (score.bits, score.counted_chars, score.counted_tokens) == (0, 0, 0)

    def test_certain_token_contributes_zero(self):
        sentence = "x" * 70 + "ab"
        tokens = tile(sentence, ["x" * 70, "ab"], [-1.0, 0.0])
        score = llm_eval.score_sentence(tokens, sentence, mask_from=70)
        assert score.bits == 0.0

    def test_mask_boundary(self):
        # 0-based offsets: a token starting at 69 is excluded, at 70 included
        sentence = "x" * 69 + "ab" + "cd"
        tokens = tile(sentence, ["x" * 69, "ab", "cd"], [-0.5, -3.0, -2.0])
        score = llm_eval.score_sentence(tokens, sentence, mask_from=70)
        assert score.bits == pytest.approx(2.0)  # only "cd" at offset 71
        sentence2 = "x" * 70 + "ab"
        tokens2 = tile(sentence2, ["x" * 70, "ab"], [-0.5, -3.0])
        score2 = llm_eval.score_sentence(tokens2, sentence2, mask_from=70)
        assert score2.bits == pytest.approx(3.0)  # token at exactly 70 counted

    def test_gap_detected(self):
        sentence = "abcdef"
        tokens = [tok("abc", 0, -1.0), tok("ef", 4, -1.0)]
        with pytest.raises(TokenizationGap):
            llm_eval.score_sentence(tokens, sentence, mask_from=0)

    def test_text_mismatch_detected(self):
        sentence = "abcdef"
        tokens = [tok("abc", 0, -1.0), tok("xyz", 3, -1.0)]
        with pytest.raises(TokenizationGap):
            llm_eval.score_sentence(tokens, sentence, mask_from=0)

    def test_short_cover_detected(self):
        sentence = "abcdef"
        with pytest.raises(TokenizationGap):
            llm_eval.score_sentence([tok("abc", 0, -1.0)], sentence, mask_from=0)


class TestCorpusBpc:
    def make_scores(self):
        # hand-built: bits 2+3+1=6 over counted chars 4+6+2=12 -> bpc 0.5
        return [
            llm_eval.SentenceScore(bits=2.0, counted_chars=4, counted_tokens=2,
                                   total_chars=80, total_tokens=20),
            llm_eval.SentenceScore(bits=3.0, counted_chars=6, counted_tokens=3,
                                   total_chars=90, total_tokens=30),
            llm_eval.SentenceScore(bits=1.0, counted_chars=2, counted_tokens=1,
                                   total_chars=75, total_tokens=25),
        ]

    def test_hand_ratio(self):
        result = llm_eval.corpus_bpc("m", self.make_scores())
        assert result.bpc == pytest.approx(0.5, abs=1e-9)
        assert result.fertility == pytest.approx(245 / 75, abs=1e-9)
        assert result.sentences == 3

    def test_all_masked_raises(self):
        scores = [llm_eval.SentenceScore(0.0, 0, 0, 80, 20)]
        with pytest.raises(NoCountedTokens):
            llm_eval.corpus_bpc("m", scores)

    def test_certainty_model_zero_bpc(self):
        sentence = "x" * 70 + "abcd"
        tokens = tile(sentence, ["x" * 70, "abcd"], [-1.0, 0.0])
        score = llm_eval.score_sentence(tokens, sentence, mask_from=70)
        assert llm_eval.corpus_bpc("m", [score]).bpc == 0.0

    def test_tokenizer_independence(self):
        # same per-character cumulative log-prob mass, different token splits
        sentence = "x" * 70 + "abcdefgh"
        # per-char cost 0.25 bits over the 8 counted chars
        coarse = tile(sentence, ["x" * 70, "abcdefgh"], [-1.0, -2.0])
        fine = tile(sentence, ["x" * 70, "ab", "cd", "ef", "gh"],
                    [-1.0, -0.5, -0.5, -0.5, -0.5])
        s1 = llm_eval.score_sentence(coarse, sentence, mask_from=70)
        s2 = llm_eval.score_sentence(fine, sentence, mask_from=70)
        assert llm_eval.corpus_bpc("a", [s1]).bpc == pytest.approx(
            llm_eval.corpus_bpc("b", [s2]).bpc, abs=1e-12)


class TestMockProvider:
    def test_round_trip(self, tmp_path):
        sentence = "x" * 70 + "ab"
        table = {sentence: [
            {"text": "x" * 70, "start": 0, "logprob": -1.0, "base": "2"},
            {"text": "ab", "start": 70, "logprob": -2.0, "base": "2"},
        ]}
        path = tmp_path / "mock.json"
        path.write_text(json.dumps(table), encoding="utf-8")
        mock = llm_eval.FileMockProvider(path)
        tokens = mock.fetch(sentence)
        assert [t.logprob_bits for t in tokens] == [-1.0, -2.0]

    def test_missing_entry(self, tmp_path):
        path = tmp_path / "mock.json"
        path.write_text("{}", encoding="utf-8")
        with pytest.raises(ProviderUnavailable):
            llm_eval.FileMockProvider(path).fetch("немає")


class TestFetchLogprobs:
    def test_timeout_exhausts_retries(self, monkeypatch):
        import httpx

        calls = []

        def fake_post(*args, **kwargs):
            calls.append(1)
            raise httpx.ConnectTimeout("boom")

        monkeypatch.setattr(httpx, "post", fake_post)
        cfg = llm_eval.ProviderConfig(endpoint="http://provider.invalid",
                                      model_id="m", max_retries=3)
        with pytest.raises(ProviderUnavailable):
            llm_eval.fetch_logprobs("text", cfg, sleep=lambda _: None)
        assert len(calls) == 3

    def test_success_parses_and_tiles(self, monkeypatch):
        import httpx

        payload = {"tokens": [
            {"text": "аб", "start": 0, "logprob": -1.0, "base": "2"},
            {"text": "вг", "start": 2, "logprob": -2.0, "base": "2"},
        ]}

        class FakeResponse:
            status_code = 200

            def json(self):
                return payload

        monkeypatch.setattr(httpx, "post", lambda *a, **k: FakeResponse())
        cfg = llm_eval.ProviderConfig(endpoint="http://provider.invalid", model_id="m")
        tokens = llm_eval.fetch_logprobs("абвг", cfg, sleep=lambda _: None)
        assert len(tokens) == 2 and tokens[1].start_char == 2

    def test_malformed_payload(self, monkeypatch):
        import httpx

        class FakeResponse:
            status_code = 200

            def json(self):
                return {"nope": []}

        monkeypatch.setattr(httpx, "post", lambda *a, **k: FakeResponse())
        cfg = llm_eval.ProviderConfig(endpoint="http://provider.invalid", model_id="m")
        with pytest.raises(MalformedResponse):
            llm_eval.fetch_logprobs("абвг", cfg, sleep=lambda _: None)


class TestContamination:
    def rec(self):
        return SentenceRecord(id="s", normalized_text="А" * 120, raw_text="а" * 120,
                              length=120, source_article="art1")

    def test_after_cutoff(self):
        dates = {"art1": date(2025, 9, 1)}
        assert llm_eval.contamination_check(self.rec(), dates, date(2025, 6, 1))

    def test_before_cutoff(self):
        dates = {"art1": date(2025, 5, 1)}
        assert not llm_eval.contamination_check(self.rec(), dates, date(2025, 6, 1))

    def test_missing_date(self):
        with pytest.raises(MissingDate):
            llm_eval.contamination_check(self.rec(), {}, date(2025, 6, 1))


class TestEvaluateCorpus:
    def test_uses_raw_text_and_aggregates(self):
        raw = "Речення, з пунктуацією" + "х" * 60
        rec = SentenceRecord(id="s", normalized_text="А" * len(raw), raw_text=raw,
                             length=len(raw), source_article="a")
        seen = []

        def fetch(text):
            seen.append(text)
            return [llm_eval.TokenLogprob.from_tagged(text, 0, -4.0, "2")]

        result = llm_eval.evaluate_corpus([rec], "m", fetch, mask_from=0)
        assert seen == [raw]
        assert result.bpc == pytest.approx(4.0 / len(raw))
