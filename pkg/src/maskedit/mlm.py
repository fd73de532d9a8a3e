"""Padded masked language model with a count-with-backoff backend.

One joint conditional model serves both text domains: count tables are keyed
by a domain tag, which behaves exactly like a special token prepended to the
input. Every masked input carries a fixed block of ``n_p`` mask slots; the
model may fill any slot with [PAD], so an infill can be 0 to ``n_p`` tokens
long without a separate length model.

Per-slot distributions interpolate four estimators, each with additive
smoothing, so probabilities are always strictly positive:

    0.60 * p(token | domain, slot, left context, right context)
  + 0.25 * p(token | domain, slot, left context)
  + 0.10 * p(token | domain, slot)
  + 0.05 * uniform

Left/right context means up to ``k_ctx`` visible tokens on each side of the
mask block. Unseen contexts decay gracefully: with zero counts, additive
smoothing makes every level uniform.

Trained models are immutable and safe for unlimited concurrent readers;
prediction is a pure function of (model, input).
"""

from __future__ import annotations

import gzip
import json
import os
import random
import tempfile
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .tokenizer import PAD, SOURCE_TAG, SPECIAL_TOKENS, TARGET_TAG, UNK, Vocab, build_vocab

FORMAT_MAGIC = "maskedit-model"
FORMAT_VERSION = 1

# Interpolation weights: full context, left-only, slot unigram, uniform floor.
WEIGHT_FULL = 0.60
WEIGHT_LEFT = 0.25
WEIGHT_UNIGRAM = 0.10
WEIGHT_UNIFORM = 0.05


class Domain(Enum):
    """Which of the two text domains a query or training line belongs to."""

    SOURCE = SOURCE_TAG
    TARGET = TARGET_TAG

    @property
    def tag(self) -> str:
        return self.value


class ModelFormatError(ValueError):
    """Raised when a model file is unreadable, truncated, or wrong-version."""


@dataclass(frozen=True)
class MlmConfig:
    """Hyperparameters for training and prediction.

    spans_per_example caps how many masked spans are sampled per training
    line; None means every legal span is used.
    """

    n_p: int = 4
    k_ctx: int = 2
    alpha: float = 0.1
    spans_per_example: int | None = None
    min_count: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_p < 1:
            raise ValueError(f"n_p must be >= 1, got {self.n_p}")
        if self.k_ctx < 0:
            raise ValueError(f"k_ctx must be >= 0, got {self.k_ctx}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.spans_per_example is not None and self.spans_per_example < 1:
            raise ValueError("spans_per_example must be >= 1 or None")


@dataclass(frozen=True)
class MaskedInput:
    """A domain tag plus visible context around a block of n_p mask slots."""

    domain: Domain
    left: tuple[str, ...]
    right: tuple[str, ...]


@dataclass(frozen=True)
class TrainingExample:
    """A masked input and its n_p slot targets ([PAD] past the span end)."""

    input: MaskedInput
    targets: tuple[str, ...]


@dataclass(frozen=True)
class PredictionGrid:
    """Per-slot distributions over the predictable tokens.

    Each slot maps token -> probability, iterating in vocabulary id order
    ([PAD] first, then [UNK], then regular tokens), and sums to 1.
    """

    slots: tuple[dict[str, float], ...]

    @property
    def n_p(self) -> int:
        return len(self.slots)


def span_positions(length: int, n_p: int) -> list[tuple[int, int]]:
    """Every legal (start, span_length) pair for a sequence of this length.

    start ranges over 0..length (length marks insertion at the end) and
    span_length over 0..min(n_p, length - start). A zero-length span is a
    pure insertion point.
    """
    out = []
    for start in range(length + 1):
        for span_len in range(min(n_p, length - start) + 1):
            out.append((start, span_len))
    return out


def make_training_examples(
    line: Sequence[str],
    domain: Domain,
    config: MlmConfig,
    rng: random.Random,
) -> list[TrainingExample]:
    """Mask single contiguous spans of 0..n_p whole tokens out of a line.

    Each example masks one span: the targets are the deleted tokens in order,
    padded with [PAD] up to n_p. Positions are sampled uniformly without
    replacement from all legal (start, length) pairs, capped at
    config.spans_per_example.
    """
    if not line:
        raise ValueError("cannot build training examples from an empty line")
    positions = span_positions(len(line), config.n_p)
    cap = config.spans_per_example
    if cap is not None and cap < len(positions):
        positions = rng.sample(positions, cap)
    examples = []
    for start, span_len in positions:
        targets = tuple(line[start:start + span_len]) + (PAD,) * (config.n_p - span_len)
        examples.append(
            TrainingExample(
                input=MaskedInput(
                    domain=domain,
                    left=tuple(line[:start]),
                    right=tuple(line[start + span_len:]),
                ),
                targets=targets,
            )
        )
    return examples


def _new_slot_counts(n_p: int) -> list[dict[str, int]]:
    return [{} for _ in range(n_p)]


@dataclass(frozen=True)
class PaddedMlm:
    """Joint conditional padded MLM backed by backoff count tables.

    Count tables map a context key to one count dict per slot. Totals are
    per-key per-slot event counts; they always equal the sum of the counts
    beneath them.
    """

    vocab: Vocab
    config: MlmConfig
    full_counts: dict[tuple, list[dict[str, int]]]
    left_counts: dict[tuple, list[dict[str, int]]]
    unigram_counts: dict[str, list[dict[str, int]]]
    full_totals: dict[tuple, list[int]] = field(repr=False)
    left_totals: dict[tuple, list[int]] = field(repr=False)
    unigram_totals: dict[str, list[int]] = field(repr=False)

    @property
    def support(self) -> tuple[str, ...]:
        """Predictable tokens in id order: [PAD], [UNK], then regular tokens."""
        return (PAD, UNK) + self.vocab.regular_tokens

    def _context_key(self, input: MaskedInput) -> tuple[tuple[str, ...], tuple[str, ...]]:
        k = self.config.k_ctx
        canon = self.vocab.canonical
        left = tuple(canon(t) for t in input.left[len(input.left) - k:]) if k else ()
        right = tuple(canon(t) for t in input.right[:k]) if k else ()
        return left, right

    def predict(self, input: MaskedInput) -> PredictionGrid:
        """Backoff-smoothed distribution for each of the n_p mask slots."""
        left, right = self._context_key(input)
        tag = input.domain.tag
        support = self.support
        v = len(support)
        alpha = self.config.alpha
        full_key = (tag, left, right)
        left_key = (tag, left)
        slots = tuple(
            self._slot_distribution(slot, full_key, left_key, tag, support, v, alpha)
            for slot in range(self.config.n_p)
        )
        return PredictionGrid(slots=slots)

    def _slot_distribution(self, slot, full_key, left_key, tag, support, v, alpha):
        full = self.full_counts.get(full_key)
        left = self.left_counts.get(left_key)
        uni = self.unigram_counts.get(tag)
        d_full = (self.full_totals[full_key][slot] if full else 0) + alpha * v
        d_left = (self.left_totals[left_key][slot] if left else 0) + alpha * v
        d_uni = (self.unigram_totals[tag][slot] if uni else 0) + alpha * v
        floor = (
            WEIGHT_FULL * alpha / d_full
            + WEIGHT_LEFT * alpha / d_left
            + WEIGHT_UNIGRAM * alpha / d_uni
            + WEIGHT_UNIFORM / v
        )
        dist = dict.fromkeys(support, floor)
        if full:
            w = WEIGHT_FULL / d_full
            for token, count in full[slot].items():
                dist[token] += w * count
        if left:
            w = WEIGHT_LEFT / d_left
            for token, count in left[slot].items():
                dist[token] += w * count
        if uni:
            w = WEIGHT_UNIGRAM / d_uni
            for token, count in uni[slot].items():
                dist[token] += w * count
        return dist

    def save(self, path: str) -> None:
        """Write a versioned, gzip-compressed model file (atomically)."""
        payload = {
            "magic": FORMAT_MAGIC,
            "version": FORMAT_VERSION,
            "config": {
                "n_p": self.config.n_p,
                "k_ctx": self.config.k_ctx,
                "alpha": self.config.alpha,
                "spans_per_example": self.config.spans_per_example,
                "min_count": self.config.min_count,
                "seed": self.config.seed,
            },
            "tokens": list(self.vocab.regular_tokens),
            "full": [
                [key[0], list(key[1]), list(key[2]), per_slot]
                for key, per_slot in self.full_counts.items()
            ],
            "left": [
                [key[0], list(key[1]), per_slot]
                for key, per_slot in self.left_counts.items()
            ],
            "unigram": [[tag, per_slot] for tag, per_slot in self.unigram_counts.items()],
        }
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as raw:
                # mtime pinned so identical models produce identical bytes
                with gzip.GzipFile(fileobj=raw, mode="wb", mtime=0) as zf:
                    zf.write(json.dumps(payload, ensure_ascii=False).encode("utf-8"))
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @classmethod
    def load(cls, path: str) -> "PaddedMlm":
        """Read a model file written by save(); validates magic and version."""
        try:
            with gzip.open(path, "rb") as zf:
                payload = json.loads(zf.read().decode("utf-8"))
        except (OSError, EOFError, json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise ModelFormatError(f"unreadable model file {path!r}: {exc}") from exc
        if not isinstance(payload, dict) or payload.get("magic") != FORMAT_MAGIC:
            raise ModelFormatError(f"{path!r} is not a maskedit model file")
        if payload.get("version") != FORMAT_VERSION:
            raise ModelFormatError(
                f"unsupported model version {payload.get('version')!r}, "
                f"expected {FORMAT_VERSION}"
            )
        cfg = payload["config"]
        config = MlmConfig(
            n_p=cfg["n_p"],
            k_ctx=cfg["k_ctx"],
            alpha=cfg["alpha"],
            spans_per_example=cfg["spans_per_example"],
            min_count=cfg["min_count"],
            seed=cfg["seed"],
        )
        tokens = SPECIAL_TOKENS + tuple(payload["tokens"])
        vocab = Vocab(tokens=tokens, id_of={tok: i for i, tok in enumerate(tokens)})
        full_counts = {
            (tag, tuple(left), tuple(right)): per_slot
            for tag, left, right, per_slot in payload["full"]
        }
        left_counts = {
            (tag, tuple(left)): per_slot for tag, left, per_slot in payload["left"]
        }
        unigram_counts = {tag: per_slot for tag, per_slot in payload["unigram"]}
        return cls(
            vocab=vocab,
            config=config,
            full_counts=full_counts,
            left_counts=left_counts,
            unigram_counts=unigram_counts,
            full_totals=_totals_of(full_counts, config.n_p),
            left_totals=_totals_of(left_counts, config.n_p),
            unigram_totals=_totals_of(unigram_counts, config.n_p),
        )


def _totals_of(tables: dict, n_p: int) -> dict:
    return {
        key: [sum(per_slot[t].values()) for t in range(n_p)]
        for key, per_slot in tables.items()
    }


def train(
    source_corpus: Sequence[Sequence[str]],
    target_corpus: Sequence[Sequence[str]],
    config: MlmConfig | None = None,
) -> PaddedMlm:
    """Train the joint conditional model on two nonparallel corpora.

    The vocabulary is built over the union of both corpora. Span sampling is
    seeded per line index (not per domain), so identical corpora yield
    identical count tables for both domains, and sharding a corpus across
    workers cannot change the result.
    """
    config = config or MlmConfig()
    if not source_corpus or not target_corpus:
        raise ValueError("both corpora must be non-empty")
    vocab = build_vocab(list(source_corpus) + list(target_corpus), config.min_count)
    n_p = config.n_p
    k = config.k_ctx
    canon = vocab.canonical

    full_counts: dict[tuple, list[dict[str, int]]] = {}
    left_counts: dict[tuple, list[dict[str, int]]] = {}
    unigram_counts: dict[str, list[dict[str, int]]] = {}

    for corpus, domain in ((source_corpus, Domain.SOURCE), (target_corpus, Domain.TARGET)):
        tag = domain.tag
        uni = unigram_counts.setdefault(tag, _new_slot_counts(n_p))
        for index, line in enumerate(corpus):
            if not line:
                raise ValueError(f"corpus line {index} is empty")
            rng = random.Random(f"{config.seed}:{index}")
            for example in make_training_examples(line, domain, config, rng):
                left_raw = example.input.left
                right_raw = example.input.right
                left = tuple(canon(t) for t in left_raw[len(left_raw) - k:]) if k else ()
                right = tuple(canon(t) for t in right_raw[:k]) if k else ()
                full = full_counts.setdefault((tag, left, right), _new_slot_counts(n_p))
                left_tbl = left_counts.setdefault((tag, left), _new_slot_counts(n_p))
                for slot, target in enumerate(example.targets):
                    token = target if target == PAD else canon(target)
                    full[slot][token] = full[slot].get(token, 0) + 1
                    left_tbl[slot][token] = left_tbl[slot].get(token, 0) + 1
                    uni[slot][token] = uni[slot].get(token, 0) + 1

    return PaddedMlm(
        vocab=vocab,
        config=config,
        full_counts=full_counts,
        left_counts=left_counts,
        unigram_counts=unigram_counts,
        full_totals=_totals_of(full_counts, n_p),
        left_totals=_totals_of(left_counts, n_p),
        unigram_totals=_totals_of(unigram_counts, n_p),
    )


def infill_argmax(grid: PredictionGrid) -> tuple[list[str], list[float]]:
    """Most likely token for every slot independently, with its probability.

    Ties break toward the lowest vocabulary id, which is the slot dict's
    iteration order.
    """
    choices = []
    probs = []
    for dist in grid.slots:
        best_token = None
        best_p = -1.0
        for token, p in dist.items():
            if p > best_p:
                best_token = token
                best_p = p
        choices.append(best_token)
        probs.append(best_p)
    return choices, probs


def strip_pads(slot_choices: Sequence[str]) -> list[str]:
    """Drop every [PAD], preserving the order of the remaining tokens."""
    return [tok for tok in slot_choices if tok != PAD]
