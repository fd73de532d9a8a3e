"""Evaluation metrics: exact match, corpus BLEU, and transfer accuracy.

Exact match lowercases and whitespace-normalizes both sides before
comparing. BLEU is corpus-level BLEU-4 with uniform weights over the n-gram
orders that have any candidate n-grams at all (so identical corpora always
score 100, even single-word ones), a brevity penalty, and a tiny epsilon in
the numerator of any order with zero matches. Transfer accuracy comes from a
multinomial naive Bayes classifier trained on the two domain corpora.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

BLEU_EPSILON = 1e-9
BLEU_MAX_ORDER = 4


def _normalize(text: str) -> str:
    return " ".join(text.lower().split())


def exact_score(predictions: Sequence[str], references: Sequence[str]) -> float:
    """Percentage of pairs equal after lowercasing and space normalization."""
    if len(predictions) != len(references):
        raise ValueError(
            f"{len(predictions)} predictions vs {len(references)} references"
        )
    if not predictions:
        return 0.0
    hits = sum(
        _normalize(p) == _normalize(r) for p, r in zip(predictions, references)
    )
    return 100.0 * hits / len(predictions)


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(predictions: Sequence[str], references: Sequence[str]) -> float:
    """Corpus BLEU-4 in [0, 100], one reference per prediction."""
    if len(predictions) != len(references):
        raise ValueError(
            f"{len(predictions)} predictions vs {len(references)} references"
        )
    pred_tokens = [p.split() for p in predictions]
    ref_tokens = [r.split() for r in references]
    pred_len = sum(len(t) for t in pred_tokens)
    ref_len = sum(len(t) for t in ref_tokens)
    if pred_len == 0:
        return 0.0

    matched = [0] * (BLEU_MAX_ORDER + 1)
    possible = [0] * (BLEU_MAX_ORDER + 1)
    for pred, ref in zip(pred_tokens, ref_tokens):
        for n in range(1, BLEU_MAX_ORDER + 1):
            pred_counts = _ngrams(pred, n)
            if not pred_counts:
                continue
            ref_counts = _ngrams(ref, n)
            possible[n] += sum(pred_counts.values())
            matched[n] += sum(
                min(count, ref_counts[gram]) for gram, count in pred_counts.items()
            )

    orders = [n for n in range(1, BLEU_MAX_ORDER + 1) if possible[n] > 0]
    log_precision = 0.0
    for n in orders:
        numerator = matched[n] if matched[n] > 0 else BLEU_EPSILON
        log_precision += math.log(numerator / possible[n]) / len(orders)
    brevity = 1.0 if pred_len > ref_len else math.exp(1.0 - ref_len / pred_len)
    return 100.0 * brevity * math.exp(log_precision)


@dataclass(frozen=True)
class NbClassifier:
    """Multinomial naive Bayes over token counts, additive smoothing.

    Immutable once trained; per-class token probabilities sum to 1 over the
    training vocabulary.
    """

    labels: tuple[str, str]
    log_priors: dict[str, float]
    log_likelihoods: dict[str, dict[str, float]]
    vocabulary: frozenset[str]

    def token_distribution(self, label: str) -> dict[str, float]:
        return {tok: math.exp(lp) for tok, lp in self.log_likelihoods[label].items()}


def train_classifier(
    corpus_a: Sequence[str],
    corpus_b: Sequence[str],
    smoothing: float = 1.0,
    labels: tuple[str, str] = ("a", "b"),
) -> NbClassifier:
    """Fit the classifier on two labeled corpora of raw text lines."""
    if not corpus_a or not corpus_b:
        raise ValueError("both class corpora must be non-empty")
    if smoothing <= 0:
        raise ValueError(f"smoothing must be > 0, got {smoothing}")
    token_counts = {label: Counter() for label in labels}
    doc_counts = dict(zip(labels, (len(corpus_a), len(corpus_b))))
    for label, corpus in zip(labels, (corpus_a, corpus_b)):
        for line in corpus:
            token_counts[label].update(line.split())
    vocabulary = frozenset(token_counts[labels[0]]) | frozenset(token_counts[labels[1]])
    total_docs = sum(doc_counts.values())
    log_priors = {label: math.log(doc_counts[label] / total_docs) for label in labels}
    log_likelihoods = {}
    for label in labels:
        total = sum(token_counts[label].values()) + smoothing * len(vocabulary)
        log_likelihoods[label] = {
            tok: math.log((token_counts[label][tok] + smoothing) / total)
            for tok in vocabulary
        }
    return NbClassifier(
        labels=tuple(labels),
        log_priors=log_priors,
        log_likelihoods=log_likelihoods,
        vocabulary=vocabulary,
    )


def classify(clf: NbClassifier, text: str) -> str:
    """Most probable label for a text; unknown tokens are ignored."""
    best_label = clf.labels[0]
    best_score = -math.inf
    for label in clf.labels:
        score = clf.log_priors[label]
        likelihoods = clf.log_likelihoods[label]
        for token in text.split():
            if token in clf.vocabulary:
                score += likelihoods[token]
        if score > best_score:
            best_label = label
            best_score = score
    return best_label


def transfer_accuracy(
    clf: NbClassifier, predictions: Sequence[str], intended_label: str
) -> float:
    """Percentage of predictions the classifier assigns to intended_label."""
    if intended_label not in clf.labels:
        raise ValueError(f"unknown label {intended_label!r}, expected one of {clf.labels}")
    if not predictions:
        return 0.0
    hits = sum(classify(clf, text) == intended_label for text in predictions)
    return 100.0 * hits / len(predictions)
