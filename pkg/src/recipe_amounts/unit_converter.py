"""Convert parsed quantities to grams via per-ingredient conversion tables.

Weight units are global constants; volume and counting units are
per-ingredient entries built either from TSV tables or from nutrition
database response records.  Grams are double-precision from here onward.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

from .canonicalizer import CanonicalVocabulary, _as_fraction
from .quantity_parser import ParsedIngredientLine, UnitVocabulary

log = logging.getLogger(__name__)

# The worked conversion example in common use is 24.5 oz -> 686 g, i.e. an
# exact 28 g ounce; the pound follows as 16 of those ounces.
DEFAULT_WEIGHT_GRAMS = {"g": 1.0, "kg": 1000.0, "ounce": 28.0, "lb": 448.0}


class DuplicateName(ValueError):
    """Two mapping records share a raw ingredient name."""


@dataclass(frozen=True)
class MappingRecord:
    """One nutrition-database response for one raw ingredient name."""

    name: str
    items: tuple[str, ...]
    alt_measures: tuple[tuple[str, float], ...] = ()
    nf_calories: float | None = None
    serving_weight_grams: float | None = None

    def __post_init__(self) -> None:
        for _, grams in self.alt_measures:
            if grams <= 0:
                raise ValueError(f"{self.name!r}: alt measure grams must be positive")

    @property
    def multiplicity(self) -> int:
        return len(self.items)

    @property
    def item(self) -> str | None:
        return self.items[0] if len(self.items) == 1 else None

    @classmethod
    def from_dict(cls, data: dict) -> MappingRecord:
        if "items" in data:
            items = tuple(data["items"])
        elif data.get("item") is not None:
            items = (data["item"],)
        else:
            items = ()
        measures = tuple(
            (m["measure"], float(m["serving_weight"])) for m in data.get("alt_measures", [])
        )
        return cls(
            name=data["name"],
            items=items,
            alt_measures=measures,
            nf_calories=data.get("nf_calories"),
            serving_weight_grams=data.get("serving_weight_grams"),
        )


@dataclass(frozen=True)
class ResolvedMapping:
    item: str
    measures: tuple[tuple[str, float], ...]
    calorie_density: float  # kCal per gram


def _singularize(name: str) -> str:
    if len(name) > 4 and name.endswith("ies"):
        return name[:-3] + "y"
    if len(name) > 3 and name.endswith(("oes", "xes", "ches", "shes", "sses")):
        return name[:-2]
    if len(name) > 3 and name.endswith("s") and not name.endswith("ss"):
        return name[:-1]
    return name


def _plural_equivalent(a: str, b: str) -> bool:
    """True when a and b are the same word up to singular/plural form."""
    return a == b or _singularize(a) == _singularize(b)


def _density(record: MappingRecord) -> float:
    if record.nf_calories is None or not record.serving_weight_grams:
        log.warning("no calorie data for %r; density defaults to 0", record.name)
        return 0.0
    return record.nf_calories / record.serving_weight_grams


def resolve_mappings(
    records: list[MappingRecord],
) -> tuple[dict[str, ResolvedMapping], dict[str, str]]:
    """Split records into clean resolutions and flagged names.

    A record resolves when it maps to exactly one item equal to the name
    or its singular/plural form.  Flag reasons: no_result,
    multiple_mappings, mismatch.  Fallback records (e.g. from a second
    database) are merged by a second pass plus merge_resolutions.
    """
    resolved: dict[str, ResolvedMapping] = {}
    flagged: dict[str, str] = {}
    seen: set[str] = set()
    for record in records:
        if record.name in seen:
            raise DuplicateName(record.name)
        seen.add(record.name)
        if record.multiplicity == 0:
            flagged[record.name] = "no_result"
        elif record.multiplicity > 1:
            flagged[record.name] = "multiple_mappings"
        elif not _plural_equivalent(record.name, record.items[0]):
            flagged[record.name] = "mismatch"
        else:
            resolved[record.name] = ResolvedMapping(
                item=record.items[0],
                measures=record.alt_measures,
                calorie_density=_density(record),
            )
    return resolved, flagged


def merge_resolutions(
    primary: dict[str, ResolvedMapping], fallback: dict[str, ResolvedMapping]
) -> dict[str, ResolvedMapping]:
    """Overlay fallback resolutions for names the primary pass flagged."""
    merged = dict(primary)
    for name, resolution in fallback.items():
        merged.setdefault(name, resolution)
    return merged


@dataclass(frozen=True)
class ConversionTable:
    """(ingredient index, unit) -> grams, plus per-ingredient kCal/g.

    Weight units convert identically for every ingredient through
    weight_grams; volume and counting units need per-ingredient entries.
    """

    grams_per_unit: dict[tuple[int, str], float]
    calorie_density: dict[int, float] = field(default_factory=dict)
    weight_grams: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_WEIGHT_GRAMS))

    def __post_init__(self) -> None:
        for key, grams in self.grams_per_unit.items():
            if grams <= 0:
                raise ValueError(f"grams_per_unit{key} must be positive")
        for idx, density in self.calorie_density.items():
            if density < 0:
                raise ValueError(f"calorie density for ingredient {idx} must be >= 0")

    def lookup(self, ingredient_idx: int, unit: str) -> float | None:
        grams = self.grams_per_unit.get((ingredient_idx, unit))
        if grams is not None:
            return grams
        return self.weight_grams.get(unit)

    def density(self, ingredient_idx: int) -> float:
        return self.calorie_density.get(ingredient_idx, 0.0)


def table_from_resolved(
    resolved: dict[str, ResolvedMapping],
    vocab: CanonicalVocabulary,
    unit_vocab: UnitVocabulary,
) -> ConversionTable:
    """Build a table from resolved database records.

    Alt-measure names are matched into the basic-unit vocabulary (plural
    forms stripped); unmatched measures are skipped.  Densities land on
    the canonical index of each record's name.
    """
    grams: dict[tuple[int, str], float] = {}
    density: dict[int, float] = {}
    for name in sorted(resolved):
        resolution = resolved[name]
        idx = vocab.resolve(name)
        if idx is None:
            continue
        for measure, measure_grams in resolution.measures:
            unit = measure if measure == "no_unit" else unit_vocab.match_unit(measure)
            if unit is None:
                continue
            grams[(idx, unit)] = measure_grams
        if resolution.calorie_density > 0 or idx not in density:
            density[idx] = resolution.calorie_density
    return ConversionTable(grams, density)


def load_table_tsv(
    path: str, vocab: CanonicalVocabulary, calories_path: str | None = None
) -> ConversionTable:
    """Read `ingredient<TAB>unit<TAB>grams` rows; `*` rows set weight constants.

    The optional calories file holds `ingredient<TAB>kcal_per_gram` rows.
    Ingredient names resolve through the vocabulary's alias map.
    """
    grams: dict[tuple[int, str], float] = {}
    weight = dict(DEFAULT_WEIGHT_GRAMS)
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields")
            name, unit, value = parts
            if name == "*":
                weight[unit] = float(value)
                continue
            idx = vocab.resolve(name)
            if idx is None:
                log.warning("%s:%d: ingredient %r not in vocabulary; row skipped", path, lineno, name)
                continue
            grams[(idx, unit)] = float(value)
    density: dict[int, float] = {}
    if calories_path is not None:
        with open(calories_path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ValueError(f"{calories_path}:{lineno}: expected 2 tab-separated fields")
                idx = vocab.resolve(parts[0])
                if idx is None:
                    log.warning(
                        "%s:%d: ingredient %r not in vocabulary; row skipped",
                        calories_path, lineno, parts[0],
                    )
                    continue
                density[idx] = float(parts[1])
    return ConversionTable(grams, density, weight)


@dataclass(frozen=True)
class ConvertedLine:
    ingredient_idx: int
    name: str
    grams_value: float
    grams_range: float


@dataclass(frozen=True)
class Unconvertible:
    """No table entry for (ingredient, unit); counted by the recipe filter."""

    name: str
    unit: str


@dataclass(frozen=True)
class KeptConversion:
    lines: tuple[ConvertedLine, ...]


@dataclass(frozen=True)
class DroppedConversion:
    converted: int
    total: int


def convert_line(
    line: ParsedIngredientLine, ingredient_idx: int, table: ConversionTable
) -> ConvertedLine | Unconvertible:
    """Grams for one line: value × size multiplier × parenthetical × grams/unit.

    A parenthetical sub-quantity supplies the effective unit and an extra
    factor ("1 (15 1/4 ounce) box" converts through the ounce).
    """
    if line.parenthetical is not None:
        effective_unit = line.parenthetical.unit
        factor = line.parenthetical.quantity.value
    else:
        effective_unit = line.unit
        factor = Fraction(1)
    grams_per = table.lookup(ingredient_idx, effective_unit)
    if grams_per is None:
        return Unconvertible(line.ingredient_name, effective_unit)
    scale = line.size_multiplier * factor
    return ConvertedLine(
        ingredient_idx=ingredient_idx,
        name=line.ingredient_name,
        grams_value=float(line.quantity.value * scale) * grams_per,
        grams_range=float(line.quantity.range_width * scale) * grams_per,
    )


def filter_by_conversion(
    results: list[ConvertedLine | Unconvertible],
    min_fraction: float | str | Fraction = 0.8,
) -> KeptConversion | DroppedConversion:
    """Keep the recipe when converted/total >= min_fraction (exact compare)."""
    threshold = _as_fraction(min_fraction)
    converted = [r for r in results if isinstance(r, ConvertedLine)]
    total = len(results)
    if total == 0 or Fraction(len(converted), total) < threshold:
        return DroppedConversion(converted=len(converted), total=total)
    return KeptConversion(tuple(converted))
