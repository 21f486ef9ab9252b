"""Recipe ingredient amounts: parsing, gram conversion, prediction, evaluation."""

__version__ = "0.1.0"

from .quantity_parser import (
    ParsedIngredientLine,
    Quantity,
    UnitVocabulary,
    parse_ingredient_line,
    parse_quantity,
)
from .canonicalizer import CanonicalVocabulary, MergeProposal
from .unit_converter import ConversionTable, ConvertedLine
from .vectorizer import RecipeVector, normalize_amounts, vectorize_recipe
from .amount_models import HeadParams, TrainConfig, predict_topk, train
from .metrics_eval import MetricsReport, evaluate_dataset

__all__ = [
    "CanonicalVocabulary",
    "ConversionTable",
    "ConvertedLine",
    "HeadParams",
    "MergeProposal",
    "MetricsReport",
    "ParsedIngredientLine",
    "Quantity",
    "RecipeVector",
    "TrainConfig",
    "UnitVocabulary",
    "evaluate_dataset",
    "normalize_amounts",
    "parse_ingredient_line",
    "parse_quantity",
    "predict_topk",
    "train",
    "vectorize_recipe",
]
