"""Emotion-guided, domain-adaptive, multi-task fake news detection at desk scale."""

from .data import Document, load_docs, save_docs
from .evaluate import EvalReport, accuracy, emit_table, parse_table, run_matrix
from .model import Batch, LossWeights, MtlModel, Variant, forward_loss, backward
from .synth import SynthConfig, generate
from .textprep import (
    EKMAN,
    PLUTCHIK,
    EmotionLexicon,
    EmotionTaxonomy,
    Vocabulary,
    annotate_emotion,
    build_vocab,
    builtin_lexicon,
    encode_ids,
    get_taxonomy,
    preprocess,
)
from .train import TrainConfig, TrainRecord, grid_search, train

__version__ = "0.1.0"
