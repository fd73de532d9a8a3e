"""Single-span editing: find the most disagreed-on span and splice in the
destination model's infill.

Edits are applied unconditionally, exactly once per call; an edit whose
winner keeps the text unchanged is reported as-is and callers decide whether
to keep it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .mlm import Domain, PaddedMlm, strip_pads
from .scoring import SpanScore, best_span
from .tokenizer import detokenize, tokenize


class EditDirection(str, Enum):
    SOURCE_TO_TARGET = "source-to-target"
    TARGET_TO_SOURCE = "target-to-source"

    @property
    def origin(self) -> Domain:
        return Domain.SOURCE if self is EditDirection.SOURCE_TO_TARGET else Domain.TARGET

    @property
    def destination(self) -> Domain:
        return Domain.TARGET if self is EditDirection.SOURCE_TO_TARGET else Domain.SOURCE


@dataclass(frozen=True)
class EditResult:
    """One applied edit with full provenance."""

    input_tokens: tuple[str, ...]
    output_tokens: tuple[str, ...]
    winner: SpanScore
    direction: EditDirection
    table: tuple[SpanScore, ...] | None = None

    @property
    def output_text(self) -> str:
        return detokenize(self.output_tokens)

    @property
    def input_text(self) -> str:
        return detokenize(self.input_tokens)

    @property
    def is_identity(self) -> bool:
        return self.output_tokens == self.input_tokens


def edit_tokens(
    model: PaddedMlm,
    tokens: list[str],
    direction: EditDirection,
    *,
    include_table: bool = False,
    workers: int = 1,
) -> EditResult:
    """Edit an already-tokenized sequence. See edit()."""
    if not tokens:
        raise ValueError("cannot edit an empty token sequence")
    winner, table = best_span(
        model,
        tokens,
        target_domain=direction.destination,
        source_domain=direction.origin,
        workers=workers,
    )
    start = winner.candidate.start
    end = start + winner.candidate.del_len
    output = tokens[:start] + strip_pads(winner.replacement_slots) + tokens[end:]
    return EditResult(
        input_tokens=tuple(tokens),
        output_tokens=tuple(output),
        winner=winner,
        direction=direction,
        table=tuple(table) if include_table else None,
    )


def edit(
    model: PaddedMlm,
    text: str,
    direction: EditDirection,
    *,
    include_table: bool = False,
    workers: int = 1,
) -> EditResult:
    """Apply one edit to raw text: delete the winning span, infill, splice.

    Tokens outside the winning span are preserved verbatim; the output length
    can differ from the input by at most n_p tokens in either direction.
    Raises ValueError when the text tokenizes to nothing.
    """
    tokens = tokenize(text)
    if not tokens:
        raise ValueError("cannot edit empty input text")
    return edit_tokens(
        model, tokens, direction, include_table=include_table, workers=workers
    )
