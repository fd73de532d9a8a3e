import math
import random

import pytest

from maskedit.metrics import (
    bleu,
    classify,
    exact_score,
    train_classifier,
    transfer_accuracy,
)
from maskedit.synth import SynthConfig, gen_polarity


# ---------------------------------------------------------------------------
# Hand-rolled corpus BLEU oracle: explicit n-gram lists, set-based clipping,
# written before and independently of the library implementation. Frozen
# values below were produced by this function.
# ---------------------------------------------------------------------------

def oracle_bleu(preds, refs):
    eps = 1e-9

    def grams(toks, n):
        return [tuple(toks[i:i + n]) for i in range(len(toks) - n + 1)]

    ptoks = [p.split() for p in preds]
    rtoks = [r.split() for r in refs]
    pred_len = sum(map(len, ptoks))
    ref_len = sum(map(len, rtoks))
    if pred_len == 0:
        return 0.0
    logs = []
    for n in range(1, 5):
        num = 0
        den = 0
        for p, t in zip(ptoks, rtoks):
            pg = grams(p, n)
            tg = grams(t, n)
            den += len(pg)
            for g in set(pg):
                num += min(pg.count(g), tg.count(g))
        if den == 0:
            continue
        logs.append(math.log((num if num else eps) / den))
    precision = math.exp(sum(logs) / len(logs))
    brevity = 1.0 if pred_len > ref_len else math.exp(1 - ref_len / pred_len)
    return 100.0 * brevity * precision


# (predictions, references, oracle value); the first case is also checkable
# by hand: all clipped precisions are 1, so the score is 100 * e^(1 - 4/3).
FROZEN_BLEU_CASES = [
    (["the cat sat"], ["the cat sat down"], 71.65313105737893),
    (["the cat sat down"], ["the cat sat"], 0.39763536438352537),
    (["a b c d e"], ["a b c d e"], 100.0),
    (["a"], ["a"], 100.0),
    (["a b"], ["b a"], 0.0031622776601683803),
    (["x y z w"], ["x y q w"], 0.0018803015465431946),
    (["the quick brown fox jumps"], ["the quick brown dog jumps"], 0.28574404296988),
    (["a b c"], ["d e f"], 5.503212081491049e-08),
    (["a b c d", "e f g"], ["a b c d", "e f g"], 100.0),
    (["a b c d", "x y"], ["a b c d", "x z"], 88.91397050194614),
    (["one two three four five six"], ["one two three four five six seven"], 84.64817248906141),
    (["one two three"], ["three two one"], 7.937005259840997e-05),
    (["a a a a"], ["a a"], 0.0016990442448471224),
    (["a a"], ["a a a a"], 36.787944117144235),
    (["p q r s t"], ["p q r s"], 66.8740304976422),
    (["m n"], ["m n o p q r"], 13.53352832366127),
    (["alpha beta gamma delta"], ["alpha beta gamma delta epsilon"], 77.8800783071405),
    (["the end"], ["the end"], 100.0),
    (["u v w"], ["u v w x"], 71.65313105737893),
    (["s1 s2 s3 s4 s5", "t1 t2", "u1 u2 u3"], ["s1 s2 s3 s4 s5", "t1 x2", "u1 u2 u3"], 93.71819810760768),
]


class TestExactScore:
    def test_lowercase_and_whitespace_normalization(self):
        assert exact_score(["Hello World"], ["hello  world"]) == 100.0

    def test_identity(self):
        preds = ["a b", "c d e"]
        assert exact_score(preds, list(preds)) == 100.0

    def test_mismatch(self):
        assert exact_score(["a b"], ["a c"]) == 0.0

    def test_fractional(self):
        assert exact_score(["a", "b", "c", "d"], ["a", "b", "x", "y"]) == 50.0

    def test_symmetric(self):
        rng = random.Random(2)
        words = ["A", "b", "Cd", "e"]
        for _ in range(50):
            xs = [" ".join(rng.choice(words) for _ in range(3)) for _ in range(5)]
            ys = [" ".join(rng.choice(words) for _ in range(3)) for _ in range(5)]
            assert exact_score(xs, ys) == exact_score(ys, xs)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            exact_score(["a"], ["a", "b"])


class TestBleu:
    def test_identity_scores_hundred(self):
        preds = ["just one", "a slightly longer sentence here", "w"]
        assert bleu(preds, list(preds)) == pytest.approx(100.0, abs=1e-9)

    def test_empty_prediction_scores_zero(self):
        assert bleu([""], ["not empty"]) == 0.0

    def test_frozen_oracle_cases(self):
        for preds, refs, expected in FROZEN_BLEU_CASES:
            assert bleu(preds, refs) == pytest.approx(expected, abs=1e-6), (preds, refs)

    def test_live_oracle_agreement_on_random_corpora(self):
        rng = random.Random(99)
        words = ["a", "b", "c", "d", "e", "f"]
        for _ in range(200):
            size = rng.randrange(1, 5)
            preds = [
                " ".join(rng.choice(words) for _ in range(rng.randrange(1, 8)))
                for _ in range(size)
            ]
            refs = [
                " ".join(rng.choice(words) for _ in range(rng.randrange(1, 8)))
                for _ in range(size)
            ]
            assert bleu(preds, refs) == pytest.approx(
                oracle_bleu(preds, refs), abs=1e-6
            )

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            bleu(["a"], ["a", "b"])


class TestClassifier:
    def _corpora(self):
        neg = ["bad awful poor meal", "awful bad place", "poor bad service today"]
        pos = ["good fine tasty meal", "fine good place", "tasty good service today"]
        return neg, pos

    def test_unique_class_tokens_dominate(self):
        neg, pos = self._corpora()
        clf = train_classifier(neg, pos, labels=("neg", "pos"))
        assert classify(clf, "awful awful poor") == "neg"
        assert classify(clf, "tasty fine") == "pos"

    def test_per_class_distributions_sum_to_one(self):
        neg, pos = self._corpora()
        clf = train_classifier(neg, pos, smoothing=0.5, labels=("neg", "pos"))
        for label in clf.labels:
            assert sum(clf.token_distribution(label).values()) == pytest.approx(
                1.0, abs=1e-9
            )

    def test_accuracy_invariant_to_duplicating_documents(self):
        neg, pos = self._corpora()
        probes = ["bad meal today", "good meal today", "awful service", "fine place"]
        base = train_classifier(neg, pos, labels=("neg", "pos"))
        for k in (2, 5):
            duplicated = train_classifier(neg * k, pos * k, labels=("neg", "pos"))
            for probe in probes:
                assert classify(base, probe) == classify(duplicated, probe)

    def test_transfer_accuracy_counts_intended_label(self):
        neg, pos = self._corpora()
        clf = train_classifier(neg, pos, labels=("neg", "pos"))
        preds = ["good tasty meal", "awful bad place", "fine good service"]
        assert transfer_accuracy(clf, preds, "pos") == pytest.approx(100.0 * 2 / 3)
        assert transfer_accuracy(clf, preds, "neg") == pytest.approx(100.0 / 3)

    def test_training_lines_classified_at_least_as_well_as_holdout(self):
        neg, pos = self._corpora()
        clf = train_classifier(neg, pos, labels=("neg", "pos"))
        assert transfer_accuracy(clf, pos, "pos") == 100.0

    def test_synthetic_polarity_holdout_accuracy(self):
        data = gen_polarity(SynthConfig(n_train=500, n_test=100, seed=3, task="polarity"))
        clf = train_classifier(
            list(data.negative_corpus), list(data.positive_corpus),
            labels=("negative", "positive"),
        )
        held_neg = [pair[0] for pair in data.gold_pairs]
        held_pos = [pair[1] for pair in data.gold_pairs]
        acc = (
            transfer_accuracy(clf, held_neg, "negative")
            + transfer_accuracy(clf, held_pos, "positive")
        ) / 2
        assert acc >= 95.0

    def test_unknown_intended_label_rejected(self):
        neg, pos = self._corpora()
        clf = train_classifier(neg, pos, labels=("neg", "pos"))
        with pytest.raises(ValueError):
            transfer_accuracy(clf, ["x"], "meh")

    def test_empty_class_corpus_rejected(self):
        with pytest.raises(ValueError):
            train_classifier([], ["a"], labels=("neg", "pos"))
