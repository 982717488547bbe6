"""Caption granularity-bias toolkit.

Thin package wrapper around the compiled `_gmc` extension: corpus loading,
consensus caption metrics, information-content scoring, gradient checks, and
the toy training loop.
"""

from ._gmc import (
    Corpus,
    __version__,
    evaluate_caption,
    gradcheck,
    info_score_sentence,
    info_score_video,
    load_corpus,
    ngrams,
    score_bias,
    tokenize,
    train_toy,
    write_toy_corpus,
    write_zipf_corpus,
)

__all__ = [
    "Corpus",
    "__version__",
    "evaluate_caption",
    "gradcheck",
    "info_score_sentence",
    "info_score_video",
    "load_corpus",
    "ngrams",
    "score_bias",
    "tokenize",
    "train_toy",
    "write_toy_corpus",
    "write_zipf_corpus",
]
