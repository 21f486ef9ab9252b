"""Parse raw recipe ingredient lines into quantity, unit, and name.

The grammar is fixed and greedy, left to right: quantity, optional
parenthetical sub-quantity, optional size word, optional basic unit,
optional "of", ingredient name.  Quantities are kept as exact rationals;
nothing is converted to floats here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

NO_UNIT = "no_unit"

# large/big scale a counted quantity up by 1.2, small down by 0.8
SIZE_MULTIPLIERS = {
    "large": Fraction(6, 5),
    "big": Fraction(6, 5),
    "medium": Fraction(1),
    "small": Fraction(4, 5),
}

# Unicode fraction glyphs survive on recipe sites where the ASCII slash does not.
_FRACTION_GLYPHS = {
    "½": "1/2",
    "⅓": "1/3",
    "⅔": "2/3",
    "¼": "1/4",
    "¾": "3/4",
    "⅛": "1/8",
    "⅜": "3/8",
    "⅝": "5/8",
    "⅞": "7/8",
}

_TRAILING_PUNCT = ",.;:!?"
_DASHES = ("-", "–")

_INT_RE = re.compile(r"\d+")
_DECIMAL_RE = re.compile(r"\d*\.\d+")
_FRACTION_RE = re.compile(r"(\d+)/(\d+)")


class NotAQuantity(ValueError):
    """Text does not start with any recognized numeric form."""


class ZeroDenominator(ValueError):
    """Fraction with denominator zero, e.g. "1/0"."""


class EmptyRecipe(ValueError):
    """Recipe has no quantity-bearing ingredient lines."""


@dataclass(frozen=True)
class UnitVocabulary:
    """The basic-unit vocabulary: volume, weight, and counting units.

    The bundled default carries 52 units.  ``no_unit`` is a counting unit
    that is never matched against text; it marks a bare count ("2 apples").
    """

    volume_units: frozenset[str]
    weight_units: frozenset[str]
    counting_units: frozenset[str]
    _matchable: frozenset[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        v, w, c = self.volume_units, self.weight_units, self.counting_units
        if (v & w) or (v & c) or (w & c):
            raise ValueError("unit classes must be pairwise disjoint")
        if NO_UNIT not in c:
            raise ValueError(f"counting units must include {NO_UNIT!r}")
        # size words and "of" are consumed by their own grammar slots,
        # never as the unit itself
        reserved = set(SIZE_MULTIPLIERS) | {NO_UNIT, "of"}
        object.__setattr__(self, "_matchable", frozenset((v | w | c) - reserved))

    @property
    def all_units(self) -> frozenset[str]:
        return self.volume_units | self.weight_units | self.counting_units

    def __contains__(self, unit: str) -> bool:
        return unit in self.all_units

    def is_weight(self, unit: str) -> bool:
        return unit in self.weight_units

    def match_unit(self, token: str) -> str | None:
        """Resolve a token to a vocabulary unit, stripping plural -s/-es."""
        if token in self._matchable:
            return token
        if token.endswith("s") and token[:-1] in self._matchable:
            return token[:-1]
        if token.endswith("es") and token[:-2] in self._matchable:
            return token[:-2]
        return None

    @classmethod
    def from_text(cls, text: str) -> UnitVocabulary:
        sections: dict[str, set[str]] = {"volume": set(), "weight": set(), "count": set()}
        current: set[str] | None = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                name = line[1:-1]
                if name not in sections:
                    raise ValueError(f"line {lineno}: unknown section [{name}]")
                current = sections[name]
            elif current is None:
                raise ValueError(f"line {lineno}: unit before any section header")
            else:
                current.add(line)
        return cls(
            volume_units=frozenset(sections["volume"]),
            weight_units=frozenset(sections["weight"]),
            counting_units=frozenset(sections["count"]),
        )

    @classmethod
    def load(cls, path: str) -> UnitVocabulary:
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    @classmethod
    def default(cls) -> UnitVocabulary:
        text = resources.files("recipe_amounts.data").joinpath("basic_units.txt").read_text("utf-8")
        return cls.from_text(text)


@dataclass(frozen=True)
class Quantity:
    """A parsed quantity in unit counts: exact value plus range width.

    A range "a-b" becomes value (a+b)/2 with range_width b-a;
    exact quantities have range_width 0.
    """

    value: Fraction
    range_width: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        if self.value < 0 or self.range_width < 0:
            raise ValueError("quantity value and range width must be nonnegative")


@dataclass(frozen=True)
class Parenthetical:
    """Sub-quantity in parentheses, e.g. the "(15 1/4 ounce)" in a boxed item."""

    quantity: Quantity
    unit: str


@dataclass(frozen=True)
class ParsedIngredientLine:
    quantity: Quantity
    unit: str
    size_multiplier: Fraction
    parenthetical: Parenthetical | None
    ingredient_name: str
    raw: str


@dataclass(frozen=True)
class NoQuantity:
    """Line with no quantity field ("some salt"); the caller skips it."""

    raw: str


@dataclass(frozen=True)
class UnknownUnitWords:
    """Words between quantity and name that are not in the unit vocabulary."""

    raw: str
    words: tuple[str, ...]


@dataclass(frozen=True)
class KeptRecipe:
    lines: tuple[ParsedIngredientLine, ...]


@dataclass(frozen=True)
class DroppedRecipe:
    line: str
    words: tuple[str, ...]


@dataclass(frozen=True)
class UnitPhrase:
    unit: str
    size_multiplier: Fraction
    parenthetical: Parenthetical | None
    remainder: tuple[str, ...]


def normalize_fraction_glyphs(text: str) -> str:
    """Rewrite unicode fraction glyphs as ASCII fractions ("1½" -> "1 1/2")."""
    out: list[str] = []
    for ch in text:
        if ch in _FRACTION_GLYPHS:
            if out and out[-1][-1].isdigit():
                out.append(" ")
            out.append(_FRACTION_GLYPHS[ch])
        elif ch == "⁄":  # unicode fraction slash
            out.append("/")
        else:
            out.append(ch)
    return "".join(out)


def tokenize(raw: str) -> list[str]:
    """Lowercase, keep parentheses as tokens, strip trailing punctuation."""
    text = normalize_fraction_glyphs(raw.lower())
    text = text.replace("(", " ( ").replace(")", " ) ")
    tokens = []
    for tok in text.split():
        if tok not in ("(", ")"):
            tok = tok.rstrip(_TRAILING_PUNCT)
        if tok:
            tokens.append(tok)
    return tokens


def _parse_simple_number(token: str) -> Fraction | None:
    """Integer, decimal, or fraction held in a single token."""
    if _INT_RE.fullmatch(token):
        return Fraction(int(token))
    if _DECIMAL_RE.fullmatch(token):
        return Fraction(token)
    m = _FRACTION_RE.fullmatch(token)
    if m:
        num, den = int(m.group(1)), int(m.group(2))
        if den == 0:
            raise ZeroDenominator(token)
        return Fraction(num, den)
    return None


def _parse_atom(tokens: list[str], i: int) -> tuple[Fraction, int] | None:
    """Number at position i; a mixed number "n p/q" consumes two tokens."""
    if i >= len(tokens):
        return None
    value = _parse_simple_number(tokens[i])
    if value is None:
        return None
    if (
        _INT_RE.fullmatch(tokens[i])
        and i + 1 < len(tokens)
        and _FRACTION_RE.fullmatch(tokens[i + 1])
    ):
        return value + _parse_simple_number(tokens[i + 1]), i + 2
    return value, i + 1


def _split_range_token(token: str) -> tuple[str, str] | None:
    for dash in _DASHES:
        if dash in token:
            left, _, right = token.partition(dash)
            if left and right:
                return left, right
            return None
    return None


def _parse_quantity_tokens(tokens: list[str], i: int = 0) -> tuple[Quantity, int]:
    """Parse a quantity starting at token i; returns (quantity, next index)."""
    if i >= len(tokens):
        raise NotAQuantity("empty input")
    halves = _split_range_token(tokens[i])
    if halves is not None:
        lo, hi = _parse_simple_number(halves[0]), _parse_simple_number(halves[1])
        if lo is not None and hi is not None and lo <= hi:
            return Quantity((lo + hi) / 2, hi - lo), i + 1
        raise NotAQuantity(tokens[i])
    atom = _parse_atom(tokens, i)
    if atom is None:
        raise NotAQuantity(tokens[i])
    lo, j = atom
    if j < len(tokens) and tokens[j] == "to":
        upper = _parse_atom(tokens, j + 1)
        if upper is not None and upper[0] >= lo:
            hi, k = upper
            return Quantity((lo + hi) / 2, hi - lo), k
    return Quantity(lo), j


def parse_quantity(text: str) -> Quantity:
    """Parse the quantity expression at the start of text.

    Accepts integers, decimals, fractions "p/q", mixed numbers "n p/q",
    and ranges "a-b" / "a–b" / "a to b".  Raises NotAQuantity when the
    text starts with no numeric form, ZeroDenominator for "p/0".
    """
    quantity, _ = _parse_quantity_tokens(tokenize(text))
    return quantity


def _parse_parenthetical(
    tokens: list[str], i: int, vocab: UnitVocabulary
) -> tuple[Parenthetical, int] | None:
    """Match "( <quantity> <basic-unit> )" at position i, or give up."""
    try:
        close = tokens.index(")", i + 1)
    except ValueError:
        return None
    inner = tokens[i + 1 : close]
    if "(" in inner:
        return None
    try:
        quantity, k = _parse_quantity_tokens(inner, 0)
    except (NotAQuantity, ZeroDenominator):
        return None
    if k != len(inner) - 1:
        return None
    unit = vocab.match_unit(inner[k])
    if unit is None:
        return None
    return Parenthetical(quantity, unit), close + 1


def parse_unit_phrase(
    tokens: list[str] | tuple[str, ...], vocab: UnitVocabulary
) -> UnitPhrase:
    """Parse what follows a quantity: parenthetical, size word, unit, "of".

    Never fails; anything unmatched falls through to the remainder, with
    unit no_unit when no unit token matched.
    """
    tokens = list(tokens)
    i = 0
    parenthetical = None
    if i < len(tokens) and tokens[i] == "(":
        matched = _parse_parenthetical(tokens, i, vocab)
        if matched is not None:
            parenthetical, i = matched
    multiplier = Fraction(1)
    if i < len(tokens) and tokens[i] in SIZE_MULTIPLIERS:
        multiplier = SIZE_MULTIPLIERS[tokens[i]]
        i += 1
    unit = NO_UNIT
    if i < len(tokens):
        matched_unit = vocab.match_unit(tokens[i])
        if matched_unit is not None:
            unit = matched_unit
            i += 1
    if i < len(tokens) and tokens[i] == "of":
        i += 1
    return UnitPhrase(unit, multiplier, parenthetical, tuple(tokens[i:]))


def parse_ingredient_line(
    raw: str, vocab: UnitVocabulary
) -> ParsedIngredientLine | NoQuantity | UnknownUnitWords:
    """Parse one raw ingredient line.

    NoQuantity and UnknownUnitWords are ordinary outcomes: the first marks
    a line the caller skips, the second a line whose unit-position words
    fall outside the vocabulary (the whole recipe gets dropped).
    """
    tokens = tokenize(raw)
    try:
        quantity, i = _parse_quantity_tokens(tokens)
    except NotAQuantity:
        return NoQuantity(raw)
    phrase = parse_unit_phrase(tokens[i:], vocab)
    name_tokens = phrase.remainder
    if "(" in name_tokens or ")" in name_tokens:
        first = min(k for k, t in enumerate(name_tokens) if t in ("(", ")"))
        return UnknownUnitWords(raw, words=name_tokens[first:])
    if phrase.unit == NO_UNIT and "of" in name_tokens:
        # words sitting in the unit slot were not units
        before_of = name_tokens[: name_tokens.index("of")]
        return UnknownUnitWords(raw, words=before_of)
    if not name_tokens:
        # quantity with no ingredient name carries nothing usable
        return NoQuantity(raw)
    return ParsedIngredientLine(
        quantity=quantity,
        unit=phrase.unit,
        size_multiplier=phrase.size_multiplier,
        parenthetical=phrase.parenthetical,
        ingredient_name=" ".join(name_tokens),
        raw=raw,
    )


def filter_recipe_units(
    lines: list[str] | tuple[str, ...], vocab: UnitVocabulary
) -> KeptRecipe | DroppedRecipe:
    """Keep a recipe only if every line's unit-position words are known units.

    Quantity-free lines are skipped without dropping the recipe.  Raises
    EmptyRecipe when nothing quantity-bearing remains.
    """
    if not lines:
        raise EmptyRecipe("recipe has no ingredient lines")
    parsed: list[ParsedIngredientLine] = []
    for raw in lines:
        outcome = parse_ingredient_line(raw, vocab)
        if isinstance(outcome, UnknownUnitWords):
            return DroppedRecipe(line=outcome.raw, words=outcome.words)
        if isinstance(outcome, ParsedIngredientLine):
            parsed.append(outcome)
    if not parsed:
        raise EmptyRecipe("all lines lack a quantity")
    return KeptRecipe(tuple(parsed))


def render_rational(value: Fraction) -> str:
    """Exact text form: integer, proper fraction, or mixed number."""
    if value.denominator == 1:
        return str(value.numerator)
    whole, rem = divmod(value.numerator, value.denominator)
    if whole == 0:
        return f"{value.numerator}/{value.denominator}"
    return f"{whole} {rem}/{value.denominator}"


def render_quantity(quantity: Quantity) -> str:
    if quantity.range_width == 0:
        return render_rational(quantity.value)
    lo = quantity.value - quantity.range_width / 2
    hi = quantity.value + quantity.range_width / 2
    lo_text, hi_text = render_rational(lo), render_rational(hi)
    if " " in lo_text or " " in hi_text:
        return f"{lo_text} to {hi_text}"
    return f"{lo_text}-{hi_text}"


def render_line(line: ParsedIngredientLine) -> str:
    """Canonical text form that parses back to the same line."""
    parts = [render_quantity(line.quantity)]
    if line.parenthetical is not None:
        p = line.parenthetical
        parts.append(f"( {render_quantity(p.quantity)} {p.unit} )")
    if line.size_multiplier == Fraction(6, 5):
        parts.append("large")
    elif line.size_multiplier == Fraction(4, 5):
        parts.append("small")
    if line.unit != NO_UNIT:
        parts.append(line.unit)
    parts.append(line.ingredient_name)
    return " ".join(parts)
