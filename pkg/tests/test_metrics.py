from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ghosttype.chars import DICTIONARY
from ghosttype.data import Dataset, TouchPoint, TouchSample
from ghosttype.metrics import EvalReport, cer, evaluate, levenshtein, wer, words, wpm


def oracle_distance(a: str, b: str) -> int:
    """Independent oracle: plain recursion over all three edit choices."""

    @lru_cache(maxsize=None)
    def rec(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            rec(i - 1, j) + 1,
            rec(i, j - 1) + 1,
            rec(i - 1, j - 1) + (a[i - 1] != b[j - 1]),
        )

    return rec(len(a), len(b))


# frozen hand cases
LEV_CASES = [
    ("", "", 0),
    ("", "abc", 3),
    ("abc", "", 3),
    ("kitten", "sitting", 3),
    ("flaw", "lawn", 2),
    ("abc", "abc", 0),
    ("ab", "ba", 2),
]


@pytest.mark.parametrize("a,b,want", LEV_CASES)
def test_levenshtein_hand_cases(a, b, want):
    assert levenshtein(a, b) == want
    assert oracle_distance(a, b) == want  # oracle agrees with frozen values


def test_levenshtein_against_oracle_random_pairs():
    rng = np.random.default_rng(2024)
    alphabet = "abc"
    strings = [""]
    for n in range(1, 7):
        strings += ["".join(rng.choice(list(alphabet), n)) for _ in range(200)]
    for _ in range(2000):
        a = strings[rng.integers(len(strings))]
        b = strings[rng.integers(len(strings))]
        assert levenshtein(a, b) == oracle_distance(a, b)


def test_levenshtein_works_on_token_lists():
    assert levenshtein(["my", "cat"], ["my", "bat"]) == 1
    assert levenshtein([], ["x"]) == 1


@settings(max_examples=150)
@given(st.text("abc", max_size=8), st.text("abc", max_size=8), st.text("abc", max_size=8))
def test_levenshtein_is_a_metric(a, b, c):
    d_ab = levenshtein(a, b)
    assert d_ab == levenshtein(b, a)
    assert (d_ab == 0) == (a == b)
    assert d_ab <= levenshtein(a, c) + levenshtein(c, b)
    assert abs(len(a) - len(b)) <= d_ab <= max(len(a), len(b))


def test_cer_hand_cases():
    assert cer("cat", "cart") == 25.0
    assert cer("same", "same") == 0.0
    assert cer("", "ab") == 100.0
    assert cer("abcd", "xy") == 200.0  # insertions can push CER over 100
    with pytest.raises(ValueError):
        cer("x", "")


def test_words_tokenization():
    assert words("my cat") == ["my", "cat"]
    assert words("one\ntwo three") == ["one", "two", "three"]
    assert words("it's here.") == ["it's", "here."]
    assert words("  padded  ") == ["padded"]
    assert words("") == []


def test_wer_hand_cases():
    assert wer("my cat", "my bat") == 50.0
    assert wer("a b c", "a c") == 50.0
    assert wer("same words", "same words") == 0.0
    with pytest.raises(ValueError):
        wer("x", " ")


def test_wpm_hand_cases():
    assert wpm("12345678901", 0.5) == pytest.approx(4.0)
    assert wpm("x", 10.0) == 0.0
    # formula self-consistency at a realistic magnitude: 45.57 wpm over one
    # minute implies 45.57 * 5 + 1 = 228.85 characters, so the two nearest
    # integer lengths must bracket it
    assert wpm("a" * 228, 1.0) < 45.57 < wpm("a" * 229, 1.0)
    with pytest.raises(ValueError):
        wpm("abc", 0.0)
    with pytest.raises(ValueError):
        wpm("", 1.0)


class FixedDecoder:
    """Maps each input row to a fixed symbol index sequence."""

    def __init__(self, texts):
        self.queue = [np.array(DICTIONARY.encode(t)) for t in texts]

    def decode_indices(self, points):
        out = self.queue.pop(0)
        assert len(out) == len(points)
        return out


def make_ds(phrases):
    samples = tuple(
        TouchSample("u00", p, tuple(TouchPoint(0.1, 0.1) for _ in p)) for p in phrases
    )
    return Dataset(samples)


def test_evaluate_perfect_decoder():
    ds = make_ds(["my cat", "it's ok."])
    rep = evaluate(FixedDecoder(["my cat", "it's ok."]), ds)
    assert rep.cer == 0.0 and rep.wer == 0.0
    assert rep.n_phrases == 2
    assert rep.n_chars == 14
    assert rep.n_words == 4
    assert rep.ms_per_word >= 0.0


def test_evaluate_constant_decoder():
    ds = make_ds(["ab"])
    rep = evaluate(FixedDecoder(["aa"]), ds)
    assert rep.cer == 50.0


def test_evaluate_micro_average_matches_naive():
    truths = ["abc", "defgh", "ij"]
    decs = ["abd", "defgh", "ji"]
    rep = evaluate(FixedDecoder(decs), make_ds(truths))
    total_d = sum(levenshtein(d, t) for d, t in zip(decs, truths))
    total_l = sum(len(t) for t in truths)
    assert rep.cer == pytest.approx(100.0 * total_d / total_l)
    # micro differs from the macro mean here, so the test is discriminating
    macro = np.mean([cer(d, t) for d, t in zip(decs, truths)])
    assert rep.cer != pytest.approx(macro)


def test_evaluate_empty_set_rejected():
    with pytest.raises(ValueError):
        evaluate(FixedDecoder([]), Dataset())


def test_report_serialization():
    rep = EvalReport(cer=1.5, wer=4.0, ms_per_word=0.8, n_phrases=3, n_chars=30, n_words=6)
    assert "cer=1.50" in rep.format_text()
    assert '"wer": 4.0' in rep.to_json()
