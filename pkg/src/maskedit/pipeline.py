"""Batch editing and silver-pair generation over line-oriented corpora.

Lines fan out over worker processes sharing one immutable model; results are
reassembled in input order, so output is byte-identical for any worker
count. Empty lines are skipped and counted, never silently dropped:
len(pairs) + skipped == len(corpus).
"""

from __future__ import annotations

import json
import multiprocessing
import os
import tempfile
from dataclasses import dataclass
from typing import Iterable, Sequence

from .editor import EditDirection, EditResult, edit_tokens
from .mlm import PaddedMlm
from .tokenizer import detokenize, tokenize


@dataclass(frozen=True)
class SilverMeta:
    line: int
    start: int
    del_len: int
    replacement: tuple[str, ...]
    score: float
    identity: bool


@dataclass(frozen=True)
class SilverPair:
    """An aligned training pair: noisy edited text vs. the untouched original."""

    source_text: str
    target_text: str
    meta: SilverMeta


@dataclass(frozen=True)
class SilverResult:
    pairs: tuple[SilverPair, ...]
    skipped: int


# Per-worker-process state, installed by the pool initializer. Passing the
# model through initargs (rather than a module global set before fork) keeps
# concurrent pools from different callers independent.
_WORK: dict = {}


def _init_worker(model: PaddedMlm, direction: EditDirection) -> None:
    _WORK["model"] = model
    _WORK["direction"] = direction


def _edit_indexed(item: tuple[int, list[str]]) -> tuple[int, EditResult]:
    index, tokens = item
    return index, edit_tokens(_WORK["model"], tokens, _WORK["direction"])


def batch_edit(
    model: PaddedMlm,
    corpus: Sequence[str],
    direction: EditDirection,
    workers: int = 1,
) -> list[EditResult]:
    """Edit every line of a corpus; results keep the input order.

    Every line must tokenize to a non-empty sequence (use generate_silver for
    corpora that may contain blank lines). With workers > 1 the lines fan
    out over a process pool; the output is identical either way.
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    items = []
    for index, line in enumerate(corpus):
        tokens = tokenize(line)
        if not tokens:
            raise ValueError(f"line {index} is empty")
        items.append((index, tokens))
    if not items:
        return []
    if (
        workers == 1
        or len(items) < 2 * workers
        or "fork" not in multiprocessing.get_all_start_methods()
    ):
        return [edit_tokens(model, tokens, direction) for _, tokens in items]

    ctx = multiprocessing.get_context("fork")
    chunk = max(1, len(items) // (workers * 4))
    with ctx.Pool(
        processes=workers, initializer=_init_worker, initargs=(model, direction)
    ) as pool:
        indexed = pool.map(_edit_indexed, items, chunksize=chunk)
    indexed.sort(key=lambda pair: pair[0])
    return [result for _, result in indexed]


def generate_silver(
    model: PaddedMlm,
    corpus: Sequence[str],
    direction: EditDirection,
    workers: int = 1,
) -> SilverResult:
    """One silver pair per usable corpus line, in corpus order.

    The pair's source side is the edited text, the target side the original
    line (whitespace-normalized, tokens untouched). Identity edits are kept
    and flagged in meta so downstream consumers can filter them.
    """
    usable: list[tuple[int, str]] = []
    skipped = 0
    for index, line in enumerate(corpus):
        if tokenize(line):
            usable.append((index, line))
        else:
            skipped += 1
    results = batch_edit(model, [line for _, line in usable], direction, workers=workers)
    pairs = []
    for (index, _), result in zip(usable, results):
        pairs.append(
            SilverPair(
                source_text=result.output_text,
                target_text=result.input_text,
                meta=SilverMeta(
                    line=index,
                    start=result.winner.candidate.start,
                    del_len=result.winner.candidate.del_len,
                    replacement=result.winner.replacement_slots,
                    score=result.winner.score,
                    identity=result.is_identity,
                ),
            )
        )
    return SilverResult(pairs=tuple(pairs), skipped=skipped)


def silver_tsv(pairs: Iterable[SilverPair]) -> str:
    """Two-column TSV: edited source, TAB, original target."""
    return "".join(f"{p.source_text}\t{p.target_text}\n" for p in pairs)


def silver_meta_jsonl(pairs: Iterable[SilverPair]) -> str:
    """One JSON object per pair with the edit provenance."""
    lines = []
    for p in pairs:
        lines.append(
            json.dumps(
                {
                    "line": p.meta.line,
                    "start": p.meta.start,
                    "del_len": p.meta.del_len,
                    "replacement": list(p.meta.replacement),
                    "score": p.meta.score,
                    "identity": p.meta.identity,
                },
                ensure_ascii=False,
            )
        )
    return "".join(line + "\n" for line in lines)


def read_lines(path: str) -> list[str]:
    """Read a UTF-8 corpus, one example per line, newline stripped."""
    with open(path, "r", encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


def write_text(path: str, content: str) -> None:
    """Write text atomically: temp file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
