"""Combine the outputs of several constituency parsers into one parse."""

from .combiner import (
    NaiveBayesModel,
    NBCounts,
    VoteConfig,
    bayes_switch,
    constituent_voting,
    has_crossing,
    nb_hybridize,
    nb_posterior,
    similarity_switch,
    spans_cross,
    train_naive_bayes,
)
from .evaluation import (
    Metrics,
    f_measure,
    max_precision_oracle,
    score_corpus,
    score_sentence,
    significance_test,
    switching_oracle,
)
from .treebank_io import (
    Constituent,
    ConstituentSet,
    NormalizationConfig,
    SentenceBundle,
    Tree,
    build_tree,
    extract_constituents,
    parse_bracketed,
    read_corpus,
    render_bracketed,
)

__version__ = "0.1.0"
