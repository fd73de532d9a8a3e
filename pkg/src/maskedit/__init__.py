"""maskedit: unsupervised text editing with padded masked language models.

Train one joint conditional MLM on two nonparallel corpora, find the span
where the two domain conditionings disagree the most, delete it, and infill
with the destination domain's most likely tokens.
"""

from .editor import EditDirection, EditResult, edit
from .metrics import NbClassifier, bleu, classify, exact_score, train_classifier, transfer_accuracy
from .mlm import (
    Domain,
    MaskedInput,
    MlmConfig,
    PaddedMlm,
    PredictionGrid,
    TrainingExample,
    infill_argmax,
    make_training_examples,
    strip_pads,
    train,
)
from .pipeline import SilverPair, SilverResult, batch_edit, generate_silver
from .scoring import (
    SpanCandidate,
    SpanScore,
    ablate_source,
    best_span,
    compose_scores,
    pseudo_likelihood,
    score_candidate,
)
from .synth import SynthConfig, gen_fusion, gen_polarity
from .tokenizer import Vocab, build_vocab, detokenize, tokenize

__version__ = "0.1.0"

__all__ = [
    "Domain",
    "EditDirection",
    "EditResult",
    "MaskedInput",
    "MlmConfig",
    "NbClassifier",
    "PaddedMlm",
    "PredictionGrid",
    "SilverPair",
    "SilverResult",
    "SpanCandidate",
    "SpanScore",
    "SynthConfig",
    "TrainingExample",
    "Vocab",
    "ablate_source",
    "batch_edit",
    "best_span",
    "bleu",
    "build_vocab",
    "classify",
    "compose_scores",
    "detokenize",
    "edit",
    "exact_score",
    "gen_fusion",
    "gen_polarity",
    "generate_silver",
    "infill_argmax",
    "make_training_examples",
    "pseudo_likelihood",
    "score_candidate",
    "strip_pads",
    "tokenize",
    "train",
    "train_classifier",
    "transfer_accuracy",
]
