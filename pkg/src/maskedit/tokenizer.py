"""Whitespace tokenization, vocabulary construction, and special-token handling.

Tokens are plain strings throughout; integer ids exist only inside Vocab.
Raw text that happens to spell a reserved token (for example a literal
"[MASK]") is escaped with a backslash sentinel so that tokenize() can never
emit a reserved surface form and detokenize() can undo the escaping.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

PAD = "[PAD]"
UNK = "[UNK]"
MASK = "[MASK]"
SOURCE_TAG = "[SOURCE]"
TARGET_TAG = "[TARGET]"

# Reserved ids 0..4, in this order, in every Vocab.
SPECIAL_TOKENS: tuple[str, ...] = (PAD, UNK, MASK, SOURCE_TAG, TARGET_TAG)

ESCAPE_CHAR = "\\"
_ESCAPABLE = re.compile(r"^(\\*)(\[(?:PAD|UNK|MASK|SOURCE|TARGET)\])$")


def _escape(token: str) -> str:
    m = _ESCAPABLE.match(token)
    if m:
        return ESCAPE_CHAR + token
    return token


def _unescape(token: str) -> str:
    m = _ESCAPABLE.match(token)
    if m and m.group(1):
        return token[1:]
    return token


def tokenize(text: str) -> list[str]:
    """Split text into maximal non-whitespace runs, escaping reserved forms."""
    return [_escape(tok) for tok in text.split()]


def detokenize(tokens: Sequence[str]) -> str:
    """Join tokens with single spaces, reversing reserved-form escaping."""
    return " ".join(_unescape(tok) for tok in tokens)


@dataclass(frozen=True)
class Vocab:
    """Ordered token inventory with reserved specials at ids 0..4.

    ``tokens[k]`` has id ``k``; lookups of unseen tokens resolve to [UNK].
    Immutable after construction, safe to share across threads and workers.
    """

    tokens: tuple[str, ...]
    id_of: dict[str, int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.id_of

    def lookup(self, token: str) -> int:
        """Id of token, or the [UNK] id when the token is out of vocabulary."""
        return self.id_of.get(token, self.id_of[UNK])

    def canonical(self, token: str) -> str:
        """The token itself when in vocabulary, else [UNK]."""
        return token if token in self.id_of else UNK

    @property
    def regular_tokens(self) -> tuple[str, ...]:
        """Non-special entries, in id order."""
        return self.tokens[len(SPECIAL_TOKENS):]


def build_vocab(corpora: Iterable[Sequence[str]], min_count: int = 1) -> Vocab:
    """Build a Vocab over every token whose corpus frequency is >= min_count.

    Deterministic given corpus order: surviving tokens are numbered in order
    of first appearance, after the reserved specials.
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    counts: Counter[str] = Counter()
    first_seen: dict[str, int] = {}
    position = 0
    for line in corpora:
        for token in line:
            counts[token] += 1
            if token not in first_seen:
                first_seen[token] = position
                position += 1
    kept = [t for t in first_seen if counts[t] >= min_count and t not in SPECIAL_TOKENS]
    kept.sort(key=first_seen.__getitem__)
    tokens = SPECIAL_TOKENS + tuple(kept)
    return Vocab(tokens=tokens, id_of={tok: i for i, tok in enumerate(tokens)})
