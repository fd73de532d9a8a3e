import math
import random

import pytest

from maskedit.mlm import (
    Domain,
    MaskedInput,
    MlmConfig,
    ModelFormatError,
    PaddedMlm,
    infill_argmax,
    make_training_examples,
    span_positions,
    strip_pads,
    train,
)
from maskedit.tokenizer import PAD, UNK, tokenize


# ---------------------------------------------------------------------------
# Independent oracles. These re-derive training bookkeeping with none of the
# production code paths: plain triple loops over every line, span, and slot.
# ---------------------------------------------------------------------------

def oracle_span_pairs(length, n_p):
    pairs = set()
    for start in range(0, length + 1):
        for span_len in range(0, n_p + 1):
            if start + span_len <= length:
                pairs.add((start, span_len))
    return pairs


def oracle_count_events(corpora_with_domains, n_p, k_ctx, vocab_tokens):
    """Exhaustively enumerate (level, key, slot, target) -> count."""
    def canon(tok):
        return tok if tok in vocab_tokens else UNK

    events = {}
    for corpus, tag in corpora_with_domains:
        for line in corpus:
            for start, span_len in sorted(oracle_span_pairs(len(line), n_p)):
                left_all = line[:start]
                right_all = line[start + span_len:]
                left = tuple(canon(t) for t in left_all[max(0, len(left_all) - k_ctx):])
                right = tuple(canon(t) for t in right_all[:k_ctx])
                masked = list(line[start:start + span_len]) + [PAD] * (n_p - span_len)
                for slot, target in enumerate(masked):
                    tgt = target if target == PAD else canon(target)
                    for key in (
                        ("full", tag, left, right, slot, tgt),
                        ("left", tag, left, slot, tgt),
                        ("uni", tag, slot, tgt),
                    ):
                        events[key] = events.get(key, 0) + 1
    return events


def model_events(model):
    events = {}
    for (tag, left, right), per_slot in model.full_counts.items():
        for slot, counts in enumerate(per_slot):
            for tgt, c in counts.items():
                events[("full", tag, left, right, slot, tgt)] = c
    for (tag, left), per_slot in model.left_counts.items():
        for slot, counts in enumerate(per_slot):
            for tgt, c in counts.items():
                events[("left", tag, left, slot, tgt)] = c
    for tag, per_slot in model.unigram_counts.items():
        for slot, counts in enumerate(per_slot):
            for tgt, c in counts.items():
                events[("uni", tag, slot, tgt)] = c
    return events


def random_input(rng, words, k=3):
    return MaskedInput(
        domain=rng.choice((Domain.SOURCE, Domain.TARGET)),
        left=tuple(rng.choice(words) for _ in range(rng.randrange(0, k + 1))),
        right=tuple(rng.choice(words) for _ in range(rng.randrange(0, k + 1))),
    )


# ---------------------------------------------------------------------------
# Training example construction
# ---------------------------------------------------------------------------

class TestMakeTrainingExamples:
    def test_legal_pair_count_matches_enumeration(self):
        # For a 3-token line and n_p=4 the oracle enumerates 10 pairs.
        assert len(oracle_span_pairs(3, 4)) == 10
        assert sorted(span_positions(3, 4)) == sorted(oracle_span_pairs(3, 4))
        line = tokenize("a b c")
        examples = make_training_examples(line, Domain.SOURCE, MlmConfig(), random.Random(0))
        assert len(examples) == 10

    def test_span_pair_enumeration_property(self):
        for length in range(1, 9):
            for n_p in (1, 2, 4, 6):
                assert sorted(span_positions(length, n_p)) == sorted(
                    oracle_span_pairs(length, n_p)
                )

    def test_masked_span_construction(self):
        line = tokenize("a b c")
        examples = make_training_examples(line, Domain.TARGET, MlmConfig(), random.Random(0))
        by_pos = {
            (len(e.input.left), sum(t != PAD for t in e.targets)): e for e in examples
        }
        mid = by_pos[(1, 2)]
        assert mid.input.left == ("a",)
        assert mid.input.right == ()  # span covers "b c", nothing remains
        assert mid.targets == ("b", "c", PAD, PAD)
        one = by_pos[(1, 1)]
        assert one.input.left == ("a",)
        assert one.input.right == ("c",)
        assert one.targets == ("b", PAD, PAD, PAD)

    def test_zero_length_span(self):
        line = tokenize("a b c")
        examples = make_training_examples(line, Domain.SOURCE, MlmConfig(), random.Random(0))
        empty = [
            e for e in examples
            if e.targets == (PAD, PAD, PAD, PAD) and e.input.left == ("a", "b")
        ]
        assert len(empty) == 1
        assert empty[0].input.right == ("c",)

    def test_targets_are_span_then_pad_suffix(self):
        rng = random.Random(3)
        words = ["w", "x", "y", "z", "q"]
        for _ in range(100):
            line = [rng.choice(words) for _ in range(rng.randrange(1, 7))]
            for e in make_training_examples(line, Domain.SOURCE, MlmConfig(), rng):
                assert len(e.targets) == 4
                seen_pad = False
                for t in e.targets:
                    if t == PAD:
                        seen_pad = True
                    else:
                        assert not seen_pad, "padding must be a suffix"
                span_len = sum(t != PAD for t in e.targets)
                start = len(e.input.left)
                assert e.targets[:span_len] == tuple(line[start:start + span_len])

    def test_spans_per_example_caps_without_replacement(self):
        line = tokenize("a b c d e")
        config = MlmConfig(spans_per_example=6)
        examples = make_training_examples(line, Domain.SOURCE, config, random.Random(9))
        assert len(examples) == 6
        keys = {(len(e.input.left), sum(t != PAD for t in e.targets)) for e in examples}
        assert len(keys) == 6

    def test_empty_line_rejected(self):
        with pytest.raises(ValueError):
            make_training_examples([], Domain.SOURCE, MlmConfig(), random.Random(0))


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

class TestTrain:
    def test_count_tables_match_bruteforce_oracle_exactly(self):
        source = [tokenize(s) for s in ("x y", "x z y", "w")]
        target = [tokenize(s) for s in ("y x", "q q q q q")]
        config = MlmConfig(n_p=4, k_ctx=2, min_count=1, spans_per_example=None)
        model = train(source, target, config)
        vocab_tokens = set(model.vocab.tokens)
        expected = oracle_count_events(
            [(source, Domain.SOURCE.tag), (target, Domain.TARGET.tag)],
            config.n_p,
            config.k_ctx,
            vocab_tokens,
        )
        assert model_events(model) == expected

    def test_count_oracle_with_unk_mapping(self):
        # min_count=2 pushes singletons through [UNK] in contexts and targets.
        source = [tokenize(s) for s in ("a a rare b", "b a")]
        target = [tokenize(s) for s in ("b b a", "a b once")]
        config = MlmConfig(n_p=2, k_ctx=1, min_count=2)
        model = train(source, target, config)
        vocab_tokens = set(model.vocab.tokens)
        assert "rare" not in vocab_tokens and "once" not in vocab_tokens
        expected = oracle_count_events(
            [(source, Domain.SOURCE.tag), (target, Domain.TARGET.tag)],
            config.n_p,
            config.k_ctx,
            vocab_tokens,
        )
        assert model_events(model) == expected

    def test_per_slot_totals_equal_event_counts(self):
        source = [tokenize("x y")]
        target = [tokenize("y z")]
        model = train(source, target, MlmConfig(min_count=1, n_p=2))
        # 2-token line, n_p=2: (0,0),(0,1),(0,2),(1,0),(1,1),(2,0) = 6 spans.
        assert len(oracle_span_pairs(2, 2)) == 6
        for tag in (Domain.SOURCE.tag, Domain.TARGET.tag):
            for slot in range(2):
                assert model.unigram_totals[tag][slot] == 6

    def test_identical_corpora_make_domains_agree(self):
        corpus = [tokenize(s) for s in ("a b c", "c b a", "b b")]
        model = train(corpus, corpus, MlmConfig(min_count=1, seed=42))
        rng = random.Random(0)
        words = ["a", "b", "c", "zzz"]
        for _ in range(30):
            probe = random_input(rng, words)
            g_src = model.predict(MaskedInput(Domain.SOURCE, probe.left, probe.right))
            g_tgt = model.predict(MaskedInput(Domain.TARGET, probe.left, probe.right))
            for s_src, s_tgt in zip(g_src.slots, g_tgt.slots):
                for tok, p in s_src.items():
                    assert abs(p - s_tgt[tok]) < 1e-12

    def test_deterministic_given_seed(self):
        source = [tokenize(s) for s in ("a b c d", "d c b")]
        target = [tokenize(s) for s in ("p q", "q p r")]
        config = MlmConfig(min_count=1, spans_per_example=3, seed=5)
        m1 = train(source, target, config)
        m2 = train(source, target, config)
        assert model_events(m1) == model_events(m2)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            train([], [tokenize("a")], MlmConfig())
        with pytest.raises(ValueError):
            train([tokenize("a")], [], MlmConfig())


# ---------------------------------------------------------------------------
# Prediction
# ---------------------------------------------------------------------------

class TestPredict:
    def test_untrained_model_is_uniform(self):
        # A model with no counts collapses every backoff level to uniform.
        trained = train([tokenize("a b")], [tokenize("c d")], MlmConfig(min_count=1))
        fresh = PaddedMlm(
            vocab=trained.vocab,
            config=trained.config,
            full_counts={},
            left_counts={},
            unigram_counts={},
            full_totals={},
            left_totals={},
            unigram_totals={},
        )
        v = len(fresh.support)
        grid = fresh.predict(MaskedInput(Domain.SOURCE, ("a",), ("b",)))
        for dist in grid.slots:
            for p in dist.values():
                assert abs(p - 1.0 / v) < 1e-12

    def test_distributions_sum_to_one(self):
        source = [tokenize(s) for s in ("a b c", "b c d", "d a")]
        target = [tokenize(s) for s in ("c c b", "a d d d")]
        model = train(source, target, MlmConfig(min_count=1, alpha=0.3))
        rng = random.Random(7)
        words = ["a", "b", "c", "d", "weird"]
        for _ in range(100):
            grid = model.predict(random_input(rng, words))
            for dist in grid.slots:
                assert abs(sum(dist.values()) - 1.0) < 1e-9
                assert all(p > 0 for p in dist.values())

    def test_learned_association_dominates(self):
        # Slot 1 target is always "and" for context left=("poland",),
        # right=("died",); brute-force counting confirms it dominates.
        source = [tokenize(s) for s in (
            "poland and died",
            "war poland and died old",
            "poland and died young",
        )]
        target = [tokenize("poland and died")]
        model = train(source, target, MlmConfig(min_count=1))
        grid = model.predict(MaskedInput(Domain.SOURCE, ("poland",), ("died",)))
        choices, probs = infill_argmax(grid)
        assert choices[0] == "and"
        assert probs[0] == max(grid.slots[0].values())

    def test_prediction_is_pure(self):
        model = train([tokenize("a b c")], [tokenize("c b a")], MlmConfig(min_count=1))
        probe = MaskedInput(Domain.TARGET, ("a",), ("c",))
        g1 = model.predict(probe)
        g2 = model.predict(probe)
        assert g1.slots == g2.slots

    def test_increasing_alpha_moves_toward_uniform(self):
        import dataclasses

        source = [tokenize(s) for s in ("a b c d", "a b c e", "b a")]
        target = [tokenize(s) for s in ("e d c", "c d e a")]
        base = train(source, target, MlmConfig(min_count=1, alpha=0.05))
        rng = random.Random(13)
        words = ["a", "b", "c", "d", "e"]
        probes = [random_input(rng, words) for _ in range(20)]
        v = len(base.support)
        uniform = 1.0 / v

        def kl_to_uniform(dist):
            return sum(p * math.log(p / uniform) for p in dist.values())

        previous = None
        for alpha in (0.05, 0.2, 1.0, 5.0, 50.0):
            model = dataclasses.replace(
                base, config=dataclasses.replace(base.config, alpha=alpha)
            )
            total = sum(
                kl_to_uniform(dist)
                for probe in probes
                for dist in model.predict(probe).slots
            )
            if previous is not None:
                assert total <= previous + 1e-12
            previous = total


# ---------------------------------------------------------------------------
# Argmax infilling and pad stripping
# ---------------------------------------------------------------------------

class TestInfill:
    def _grid(self, slot_maps):
        from maskedit.mlm import PredictionGrid

        return PredictionGrid(slots=tuple(dict(m) for m in slot_maps))

    def test_mid_sequence_pads_returned_verbatim(self):
        grid = self._grid([
            {PAD: 0.1, UNK: 0.0, "was": 0.9},
            {PAD: 0.8, UNK: 0.0, "was": 0.2},
            {PAD: 0.3, UNK: 0.0, "was": 0.7},
            {PAD: 0.6, UNK: 0.0, "was": 0.4},
        ])
        choices, probs = infill_argmax(grid)
        assert choices == ["was", PAD, "was", PAD]
        assert probs == [0.9, 0.8, 0.7, 0.6]

    def test_all_pad_slots_mean_zero_insertion(self):
        grid = self._grid([{PAD: 0.9, "x": 0.1}] * 4)
        choices, _ = infill_argmax(grid)
        assert choices == [PAD] * 4
        assert strip_pads(choices) == []

    def test_tie_breaks_to_lowest_vocab_id(self):
        # Slot dicts iterate in vocab id order; "a" precedes "b".
        grid = self._grid([{PAD: 0.0, UNK: 0.0, "a": 0.5, "b": 0.5}])
        choices, probs = infill_argmax(grid)
        assert choices == ["a"]
        assert probs == [0.5]

    def test_strip_pads_keeps_order(self):
        assert strip_pads(["and", PAD, PAD, PAD]) == ["and"]
        assert strip_pads(["was", PAD, "was", PAD]) == ["was", "was"]
        assert strip_pads([PAD] * 4) == []


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

class TestSaveLoad:
    def _model(self):
        source = [tokenize(s) for s in ("a b c", "c a", "rare b c a")]
        target = [tokenize(s) for s in ("c b a", "a c")]
        return train(source, target, MlmConfig(min_count=2, alpha=0.2, seed=3))

    def test_round_trip_predictions_identical(self, tmp_path):
        model = self._model()
        path = str(tmp_path / "model.mlm")
        model.save(path)
        loaded = PaddedMlm.load(path)
        assert loaded.vocab.tokens == model.vocab.tokens
        assert loaded.config == model.config
        rng = random.Random(21)
        words = ["a", "b", "c", "unseen"]
        for _ in range(50):
            probe = random_input(rng, words)
            g1 = model.predict(probe)
            g2 = loaded.predict(probe)
            assert g1.slots == g2.slots

    def test_save_is_byte_deterministic(self, tmp_path):
        model = self._model()
        p1 = tmp_path / "m1.mlm"
        p2 = tmp_path / "m2.mlm"
        model.save(str(p1))
        self._model().save(str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_truncated_file_raises_format_error(self, tmp_path):
        model = self._model()
        path = tmp_path / "model.mlm"
        model.save(str(path))
        data = path.read_bytes()
        path.write_bytes(data[: len(data) // 2])
        with pytest.raises(ModelFormatError):
            PaddedMlm.load(str(path))

    def test_wrong_version_raises_format_error(self, tmp_path):
        import gzip
        import json

        path = tmp_path / "model.mlm"
        payload = {"magic": "maskedit-model", "version": 99}
        with gzip.open(path, "wb") as fh:
            fh.write(json.dumps(payload).encode())
        with pytest.raises(ModelFormatError, match="version"):
            PaddedMlm.load(str(path))

    def test_not_a_model_file(self, tmp_path):
        path = tmp_path / "nope.mlm"
        path.write_text("hello")
        with pytest.raises(ModelFormatError):
            PaddedMlm.load(str(path))
