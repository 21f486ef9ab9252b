"""Assemble converted recipes into fixed-length amount and range vectors.

Amounts only define a recipe up to scale, so vectors are normalized to a
chosen total C: training targets use C=1, metric evaluation C=1000.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .unit_converter import ConvertedLine


class UnresolvedIngredient(ValueError):
    pass


class ZeroTotal(ValueError):
    """Amount vector sums to zero and cannot be normalized."""


@dataclass(frozen=True)
class RecipeVector:
    """Per-ingredient grams (amounts) and range widths (ranges), length I.

    A zero amount means the ingredient is absent; a positive range entry
    requires a positive amount.
    """

    recipe_id: str
    amounts: np.ndarray
    ranges: np.ndarray

    def __post_init__(self) -> None:
        amounts = np.asarray(self.amounts, dtype=np.float64)
        ranges = np.asarray(self.ranges, dtype=np.float64)
        if amounts.shape != ranges.shape or amounts.ndim != 1:
            raise ValueError("amounts and ranges must be 1-D vectors of equal length")
        if np.any(amounts < 0) or np.any(ranges < 0):
            raise ValueError("amounts and ranges must be nonnegative")
        if np.any((ranges > 0) & (amounts == 0)):
            raise ValueError("a range entry requires a nonzero amount")
        object.__setattr__(self, "amounts", amounts)
        object.__setattr__(self, "ranges", ranges)

    def __len__(self) -> int:
        return len(self.amounts)

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.amounts > 0)

    def to_dict(self) -> dict:
        return {
            "id": self.recipe_id,
            "amounts": [[int(i), float(self.amounts[i])] for i in self.support()],
            "ranges": [
                [int(i), float(self.ranges[i])] for i in np.flatnonzero(self.ranges > 0)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict, size: int) -> RecipeVector:
        amounts = np.zeros(size)
        ranges = np.zeros(size)
        for index, grams in data["amounts"]:
            amounts[index] += grams
        for index, grams in data.get("ranges", []):
            ranges[index] += grams
        return cls(data["id"], amounts, ranges)


def vectorize_recipe(
    lines: list[ConvertedLine] | tuple[ConvertedLine, ...],
    vocab_size: int,
    recipe_id: str = "",
) -> RecipeVector:
    """Sum converted lines per canonical index; duplicates accumulate."""
    amounts = np.zeros(vocab_size)
    ranges = np.zeros(vocab_size)
    for line in lines:
        if not 0 <= line.ingredient_idx < vocab_size:
            raise UnresolvedIngredient(
                f"{line.name!r}: index {line.ingredient_idx} outside vocabulary of {vocab_size}"
            )
        amounts[line.ingredient_idx] += line.grams_value
        ranges[line.ingredient_idx] += line.grams_range
    return RecipeVector(recipe_id, amounts, ranges)


def normalize_amounts(vector: RecipeVector, C: float) -> RecipeVector:
    """Scale amounts to sum C; ranges ride the same scale."""
    if C <= 0:
        raise ValueError("C must be positive")
    total = float(vector.amounts.sum())
    if total == 0.0:
        raise ZeroTotal(vector.recipe_id or "<recipe>")
    scale = C / total
    return RecipeVector(vector.recipe_id, vector.amounts * scale, vector.ranges * scale)
