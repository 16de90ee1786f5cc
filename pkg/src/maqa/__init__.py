"""maqa: a model-agnostic toolkit for multi-answer reading comprehension.

Corpus loaders, exact/partial-match metrics, the answer-count question
taxonomy, multi-span decoding and ensembling, and a two-stage annotation
workbench, all sharing one data model (maqa.core).
"""

__version__ = "0.1.0"

from maqa.core import (
    AnswerSet,
    AnswerSpan,
    ClueMark,
    Instance,
    PredictionSet,
    TaxonomyLabel,
    TokenizedText,
    ground_span,
    normalize,
    tokenize,
)

__all__ = [
    "AnswerSet",
    "AnswerSpan",
    "ClueMark",
    "Instance",
    "PredictionSet",
    "TaxonomyLabel",
    "TokenizedText",
    "ground_span",
    "normalize",
    "tokenize",
    "__version__",
]
