"""Disagreement scoring: where do the two domain models disagree the most?

For every candidate span the destination-domain model proposes its own best
infill. target_score measures how much that model prefers its infill over the
original span; source_score cancels the gain when the origin-domain model
prefers the same rewrite (capped at zero so it can only penalize). The span
with the highest combined score is the edit site.

Probabilities are accumulated in log space to avoid underflow; the exposed
values are plain probabilities.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .mlm import Domain, MaskedInput, PaddedMlm, PredictionGrid, infill_argmax, span_positions
from .tokenizer import PAD, UNK


@dataclass(frozen=True)
class SpanCandidate:
    """A deletion site: del_len tokens starting at ``start``.

    del_len 0 means pure insertion before the token at ``start``.
    """

    start: int
    del_len: int


@dataclass(frozen=True)
class SpanScore:
    """Scores for one candidate.

    l1: likelihood of the proposed infill under the destination model.
    l2: likelihood of the original span under the destination model.
    l3: likelihood of the proposed infill under the origin model.
    l4: likelihood of the original span under the origin model.
    """

    candidate: SpanCandidate
    replacement_slots: tuple[str, ...]
    l1: float
    l2: float
    l3: float
    l4: float
    target_score: float
    source_score: float
    score: float


def compose_scores(l1: float, l2: float, l3: float, l4: float) -> tuple[float, float, float]:
    """(target_score, source_score, score) from the four likelihoods.

    target_score = l1 - l2; source_score = -max(0, l3 - l4), never positive;
    score is their sum.
    """
    target_score = l1 - l2
    source_score = -max(0.0, l3 - l4)
    return target_score, source_score, target_score + source_score


def pseudo_likelihood(grid: PredictionGrid, span_tokens: Sequence[str]) -> float:
    """Product of per-slot probabilities of the span, [PAD] past its end.

    span_tokens may itself contain [PAD] entries (a padded infill), in which
    case the [PAD] probability of that slot is used, matching the slot-wise
    product exactly. Tokens missing from a slot distribution fall back to the
    [UNK] entry.
    """
    if len(span_tokens) > grid.n_p:
        raise ValueError(
            f"span of {len(span_tokens)} tokens exceeds the {grid.n_p} mask slots"
        )
    log_p = 0.0
    for slot, dist in enumerate(grid.slots):
        if slot < len(span_tokens):
            token = span_tokens[slot]
            p = dist.get(token)
            if p is None:
                p = dist[UNK]
        else:
            p = dist[PAD]
        log_p += math.log(p)
    return math.exp(log_p)


def score_candidate(
    target_grid: PredictionGrid,
    source_grid: PredictionGrid,
    original_span: Sequence[str],
    candidate: SpanCandidate,
) -> SpanScore:
    """Score one candidate given grids for its masked context.

    Both grids must come from the same (start, del_len) masking; only the
    conditioning domain differs. The proposed infill is always the
    destination-domain argmax, under both models.
    """
    replacement, slot_probs = infill_argmax(target_grid)
    l1 = pseudo_likelihood(target_grid, replacement)
    l2 = pseudo_likelihood(target_grid, original_span)
    l3 = pseudo_likelihood(source_grid, replacement)
    l4 = pseudo_likelihood(source_grid, original_span)
    assert l1 >= l2, "slot-wise argmax product cannot be beaten by the original span"
    target_score, source_score, score = compose_scores(l1, l2, l3, l4)
    return SpanScore(
        candidate=candidate,
        replacement_slots=tuple(replacement),
        l1=l1,
        l2=l2,
        l3=l3,
        l4=l4,
        target_score=target_score,
        source_score=source_score,
        score=score,
    )


def _prefer(challenger: SpanScore, incumbent: SpanScore | None, key: str) -> bool:
    if incumbent is None:
        return True
    a = getattr(challenger, key)
    b = getattr(incumbent, key)
    if a != b:
        return a > b
    return (challenger.candidate.start, challenger.candidate.del_len) < (
        incumbent.candidate.start,
        incumbent.candidate.del_len,
    )


def _argmax(table: Sequence[SpanScore], key: str) -> SpanScore:
    best: SpanScore | None = None
    for entry in table:
        if _prefer(entry, best, key):
            best = entry
    assert best is not None
    return best


def best_span(
    model: PaddedMlm,
    seq: Sequence[str],
    n_p: int | None = None,
    *,
    target_domain: Domain = Domain.TARGET,
    source_domain: Domain = Domain.SOURCE,
    workers: int = 1,
) -> tuple[SpanScore, list[SpanScore]]:
    """Score every legal span candidate and return (winner, full table).

    Candidates are evaluated independently (optionally across worker
    threads); the result is identical for any worker count. Ties break
    toward the smaller start, then the smaller deletion length.
    """
    if not seq:
        raise ValueError("cannot search spans of an empty sequence")
    if n_p is None:
        n_p = model.config.n_p
    elif not 1 <= n_p <= model.config.n_p:
        raise ValueError(
            f"n_p must be in [1, {model.config.n_p}] for this model, got {n_p}"
        )
    seq = list(seq)
    candidates = [SpanCandidate(s, d) for s, d in span_positions(len(seq), n_p)]

    def score_one(cand: SpanCandidate) -> SpanScore:
        left = tuple(seq[:cand.start])
        right = tuple(seq[cand.start + cand.del_len:])
        target_grid = model.predict(MaskedInput(target_domain, left, right))
        source_grid = model.predict(MaskedInput(source_domain, left, right))
        span = seq[cand.start:cand.start + cand.del_len]
        return score_candidate(target_grid, source_grid, span, cand)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            table = list(pool.map(score_one, candidates))
    else:
        table = [score_one(cand) for cand in candidates]
    return _argmax(table, "score"), table


def ablate_source(table: Sequence[SpanScore]) -> SpanScore:
    """Winner when ranking by target_score alone (same tie-breaking)."""
    return _argmax(table, "target_score")


TABLE_COLUMNS = (
    "start",
    "del_len",
    "replacement",
    "L1",
    "L2",
    "L3",
    "L4",
    "target_score",
    "source_score",
    "score",
)


def table_rows(table: Sequence[SpanScore]) -> list[dict[str, object]]:
    """Flatten a score table for TSV or JSON output."""
    return [
        {
            "start": entry.candidate.start,
            "del_len": entry.candidate.del_len,
            "replacement": " ".join(entry.replacement_slots),
            "L1": entry.l1,
            "L2": entry.l2,
            "L3": entry.l3,
            "L4": entry.l4,
            "target_score": entry.target_score,
            "source_score": entry.source_score,
            "score": entry.score,
        }
        for entry in table
    ]


def table_tsv(table: Sequence[SpanScore]) -> str:
    """Render a score table as TSV, one line per candidate, with header."""
    lines = ["\t".join(TABLE_COLUMNS)]
    for row in table_rows(table):
        lines.append(
            "\t".join(
                f"{row[col]:.6f}" if isinstance(row[col], float) else str(row[col])
                for col in TABLE_COLUMNS
            )
        )
    return "\n".join(lines) + "\n"
