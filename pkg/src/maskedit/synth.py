"""Deterministic synthetic corpora for sentence fusion and sentiment transfer.

Both tasks are built so the gold transformation is always a single
contiguous edit of at most four tokens, with gold pairs held out of training
at the sentence level.

Fusion grammar:

    unfused:  <name> <vp1> . she <verb> the <obj> [<rare>] .
    fused:    <name> <vp1> <conn> <verb> the <obj> [<rare>] .

The connective is a deterministic function of the two verb-phrase classes.
Some second verbs take two possible objects of different classes; since
the object sits outside the two-token context window around the connective
slot, those lines make the connective genuinely ambiguous from local
context, which is what separates the two editing directions. Distractor
lines insert a rare proper noun before the final period, in both domains
alike: a tempting, nearly deterministic deletion for a destination-only
scorer, which the origin-domain score exists to veto.

Polarity grammar:

    the|my <noun> was|seemed <adj> <tail> .

Each noun owns one antonym pair, so the positive rewrite of a negative
adjective is recoverable from the visible context. The two corpora are
disjoint exactly in the polar adjectives.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

TASK_FUSION = "fusion"
TASK_POLARITY = "polarity"

STEADY = "steady"
CONTRAST = "contrast"
CAUSE = "cause"

NAMES = ("anna", "maria", "laura", "nina", "rosa", "elena", "julia", "vera")

# (two-token verb phrase, class)
VP1 = (
    ("slept deeply", STEADY),
    ("rested calmly", STEADY),
    ("smiled warmly", STEADY),
    ("nodded politely", STEADY),
    ("struggled badly", CONTRAST),
    ("stumbled twice", CONTRAST),
    ("hesitated visibly", CONTRAST),
    ("worried constantly", CONTRAST),
)

# verb -> ((major object, class), (minor object, class) | None)
VP2 = {
    "visited": (("museum", STEADY), None),
    "cooked": (("dinner", STEADY), None),
    "painted": (("fence", STEADY), None),
    "watered": (("garden", STEADY), None),
    "failed": (("exam", CONTRAST), None),
    "missed": (("train", CONTRAST), None),
    "feared": (("storm", CAUSE), None),
    "heard": (("alarm", CAUSE), None),
    "checked": (("mirror", STEADY), ("engine", CAUSE)),
    "watched": (("sunset", STEADY), ("siren", CAUSE)),
    "opened": (("window", STEADY), ("furnace", CAUSE)),
    "cleaned": (("kitchen", STEADY), ("cellar", CAUSE)),
    "sensed": (("danger", CAUSE), ("recipe", STEADY)),
    "studied": (("omen", CAUSE), ("poem", STEADY)),
    "chased": (("thief", CONTRAST), ("leopard", CAUSE)),
    "carried": (("burden", CONTRAST), ("torch", CAUSE)),
}

MAJOR_BRANCH_WEIGHT = 0.7

PRONOUN = "she"

_RARE_PREFIXES = (
    "vor", "zel", "mun", "tak", "ril", "bex", "quo", "naz",
    "fip", "gor", "hul", "jyr", "kov", "lum", "pyx", "wib",
)
_RARE_SUFFIXES = (
    "ana", "eth", "ix", "oro", "une", "ald", "emi", "osk",
    "urn", "ayo", "ell", "ims", "oqu", "ust", "yne",
)
RARE_ENTITIES = tuple(p + s for p in _RARE_PREFIXES for s in _RARE_SUFFIXES)


def connective(vp1_class: str, vp2_class: str) -> str:
    """The discourse connective implied by the two verb-phrase classes."""
    if vp2_class == CAUSE:
        return "because"
    if vp1_class == CONTRAST or vp2_class == CONTRAST:
        return "but"
    return "and"


@dataclass(frozen=True)
class SynthConfig:
    """Generation parameters shared by both tasks."""

    n_train: int
    n_test: int
    seed: int
    task: str = TASK_FUSION
    distractor_rate: float = 0.0

    def __post_init__(self) -> None:
        if self.n_train < 1:
            raise ValueError(f"n_train must be >= 1, got {self.n_train}")
        if self.n_test < 0:
            raise ValueError(f"n_test must be >= 0, got {self.n_test}")
        if not 0.0 <= self.distractor_rate <= 1.0:
            raise ValueError(f"distractor_rate must be in [0, 1], got {self.distractor_rate}")
        if self.task not in (TASK_FUSION, TASK_POLARITY):
            raise ValueError(f"unknown task {self.task!r}")


@dataclass(frozen=True)
class FusionData:
    source_corpus: tuple[str, ...]  # unfused
    target_corpus: tuple[str, ...]  # fused
    gold_pairs: tuple[tuple[str, str], ...]  # (unfused, fused)


@dataclass(frozen=True)
class PolarityData:
    negative_corpus: tuple[str, ...]
    positive_corpus: tuple[str, ...]
    gold_pairs: tuple[tuple[str, str], ...]  # (negative, positive)


def _fusion_render(
    name: str,
    vp1: str,
    vp1_class: str,
    verb: str,
    obj: str,
    obj_class: str,
    rare: str | None,
) -> tuple[str, str]:
    tail = f"{verb} the {obj}" + (f" {rare}" if rare else "") + " ."
    unfused = f"{name} {vp1} . {PRONOUN} {tail}"
    fused = f"{name} {vp1} {connective(vp1_class, obj_class)} {tail}"
    return unfused, fused


def _pick_branch(rng: random.Random, verb: str) -> tuple[str, str]:
    major, minor = VP2[verb]
    if minor is not None and rng.random() >= MAJOR_BRANCH_WEIGHT:
        return minor
    return major


def _fusion_sentence(
    rng: random.Random,
    triple: tuple[str, tuple[str, str], str],
    distractor_rate: float,
) -> tuple[str, str]:
    name, (vp1, vp1_class), verb = triple
    obj, obj_class = _pick_branch(rng, verb)
    rare = rng.choice(RARE_ENTITIES) if rng.random() < distractor_rate else None
    return _fusion_render(name, vp1, vp1_class, verb, obj, obj_class, rare)


def gen_fusion(config: SynthConfig) -> FusionData:
    """Nonparallel unfused/fused corpora plus held-out gold pairs.

    The (name, vp1, verb) triples are split once into train and test pools;
    training lines and gold pairs never share a triple, so no gold sentence
    appears in training. The two corpora are sampled independently from the
    train pool (nonparallel by construction).
    """
    rng = random.Random(config.seed)
    triples = [
        (name, vp1, verb) for name in NAMES for vp1 in VP1 for verb in VP2
    ]
    rng.shuffle(triples)
    n_test_pool = len(triples) // 4
    test_pool = triples[:n_test_pool]
    train_pool = triples[n_test_pool:]

    source = []
    target = []
    for _ in range(config.n_train):
        unfused, _ = _fusion_sentence(rng, rng.choice(train_pool), config.distractor_rate)
        source.append(unfused)
    for _ in range(config.n_train):
        _, fused = _fusion_sentence(rng, rng.choice(train_pool), config.distractor_rate)
        target.append(fused)

    gold = []
    for _ in range(config.n_test):
        gold.append(
            _fusion_sentence(rng, rng.choice(test_pool), config.distractor_rate)
        )
    return FusionData(
        source_corpus=tuple(source),
        target_corpus=tuple(target),
        gold_pairs=tuple(gold),
    )


# Polarity task inventory. Each noun owns one antonym pair so the positive
# counterpart of a negative adjective is predictable from the noun alone.
POLARITY_NOUNS = {
    "food": ("awful", "great"),
    "pasta": ("bland", "tasty"),
    "coffee": ("bitter", "smooth"),
    "bread": ("stale", "fresh"),
    "soup": ("greasy", "hearty"),
    "dessert": ("soggy", "divine"),
    "service": ("rude", "friendly"),
    "staff": ("hostile", "gracious"),
    "waiter": ("sloppy", "attentive"),
    "manager": ("dismissive", "helpful"),
    "room": ("dirty", "spotless"),
    "lobby": ("shabby", "elegant"),
    "bathroom": ("grimy", "pristine"),
    "bed": ("lumpy", "comfy"),
    "view": ("dreary", "stunning"),
    "pool": ("murky", "sparkling"),
    "music": ("grating", "soothing"),
    "lighting": ("harsh", "cozy"),
    "menu": ("confusing", "inviting"),
    "price": ("outrageous", "reasonable"),
    "parking": ("chaotic", "effortless"),
    "wifi": ("unusable", "reliable"),
    "checkin": ("tedious", "seamless"),
    "atmosphere": ("gloomy", "charming"),
}

POLARITY_FRAMES = (("the", "was"), ("the", "seemed"), ("my", "was"), ("my", "seemed"))
POLARITY_TAILS = ("today", "yesterday", "overall", "somehow", "honestly")

NEGATIVE = "negative"
POSITIVE = "positive"


def _polarity_render(noun: str, frame: tuple[str, str], tail: str, positive: bool) -> str:
    determiner, verb = frame
    negative_adj, positive_adj = POLARITY_NOUNS[noun]
    adjective = positive_adj if positive else negative_adj
    return f"{determiner} {noun} {verb} {adjective} {tail} ."


def gen_polarity(config: SynthConfig) -> PolarityData:
    """Nonparallel negative/positive corpora plus held-out swapped gold pairs.

    Every (noun, verb, tail) shape exists with two determiners; exactly one
    determiner variant per shape is held out for testing. Gold sentences are
    therefore never seen in training, while every local context window
    around the adjective slot is.
    """
    rng = random.Random(config.seed)
    test_pool = []
    train_pool = []
    for noun in POLARITY_NOUNS:
        for verb in ("was", "seemed"):
            for tail in POLARITY_TAILS:
                determiners = [d for d, v in POLARITY_FRAMES if v == verb]
                held = rng.choice(determiners)
                for det in determiners:
                    combo = (noun, (det, verb), tail)
                    (test_pool if det == held else train_pool).append(combo)

    negative = [
        _polarity_render(*rng.choice(train_pool), positive=False)
        for _ in range(config.n_train)
    ]
    positive = [
        _polarity_render(*rng.choice(train_pool), positive=True)
        for _ in range(config.n_train)
    ]
    gold = []
    for _ in range(config.n_test):
        combo = rng.choice(test_pool)
        gold.append(
            (_polarity_render(*combo, positive=False), _polarity_render(*combo, positive=True))
        )
    return PolarityData(
        negative_corpus=tuple(negative),
        positive_corpus=tuple(positive),
        gold_pairs=tuple(gold),
    )


def generate(config: SynthConfig) -> FusionData | PolarityData:
    """Dispatch on config.task."""
    if config.task == TASK_FUSION:
        return gen_fusion(config)
    return gen_polarity(config)
