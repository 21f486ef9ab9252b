"""Reduce raw ingredient names to a canonical vocabulary.

Merging is semi-automatic: stemming groups plus three pairwise proposal
rules (embedding proximity, shared words, shared database mapping), all
routed through a human decision ledger before anything is unioned.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

MERGE_RULES = ("stem", "embedding", "shared_words", "same_mapping")


class UnknownProposal(ValueError):
    """Ledger references a proposal that was never generated."""


class EmptyRecipeSet(ValueError):
    pass


@dataclass(frozen=True)
class MergeProposal:
    source: str
    target: str
    rule: str
    score: float = 1.0

    def __post_init__(self) -> None:
        if self.rule not in MERGE_RULES:
            raise ValueError(f"unknown merge rule {self.rule!r}")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError("score must be in [0, 1]")

    def key(self) -> tuple[str, str, str]:
        return (self.source, self.target, self.rule)


@dataclass(frozen=True)
class CanonicalVocabulary:
    """Ordered canonical ingredient names plus raw-name -> index aliases."""

    names: tuple[str, ...]
    alias_map: dict[str, int]

    def __post_init__(self) -> None:
        if len(set(self.names)) != len(self.names):
            raise ValueError("canonical names contain duplicates")
        for raw, idx in self.alias_map.items():
            if not 0 <= idx < len(self.names):
                raise ValueError(f"alias {raw!r} targets index {idx} out of range")
        for i, name in enumerate(self.names):
            if self.alias_map.get(name) != i:
                raise ValueError(f"canonical name {name!r} must alias to itself")

    def __len__(self) -> int:
        return len(self.names)

    def resolve(self, raw_name: str) -> int | None:
        return self.alias_map.get(raw_name)

    def to_dict(self) -> dict:
        return {"names": list(self.names), "alias_map": dict(sorted(self.alias_map.items()))}

    @classmethod
    def from_dict(cls, data: dict) -> CanonicalVocabulary:
        return cls(names=tuple(data["names"]), alias_map=dict(data["alias_map"]))

    @classmethod
    def identity(cls, names: list[str] | tuple[str, ...]) -> CanonicalVocabulary:
        ordered = tuple(names)
        return cls(ordered, {name: i for i, name in enumerate(ordered)})


class EmbeddingTable:
    """word -> vector lookup; all vectors share one dimension."""

    def __init__(self, vectors: dict[str, tuple[float, ...]]):
        dims = {len(v) for v in vectors.values()}
        if len(dims) > 1:
            raise ValueError(f"mixed embedding dimensions: {sorted(dims)}")
        if dims and next(iter(dims)) == 0:
            raise ValueError("embedding dimension must be positive")
        self._vectors = dict(vectors)
        self.dim = next(iter(dims)) if dims else 0

    def __contains__(self, word: str) -> bool:
        return word in self._vectors

    def get(self, word: str) -> tuple[float, ...] | None:
        return self._vectors.get(word)

    def name_vector(self, name: str) -> tuple[float, ...] | None:
        """Unweighted mean of token vectors; None when no token has one."""
        found = [self._vectors[t] for t in name.split() if t in self._vectors]
        if not found:
            return None
        n = len(found)
        return tuple(sum(v[k] for v in found) / n for k in range(self.dim))

    @classmethod
    def from_text(cls, text: str) -> EmbeddingTable:
        vectors: dict[str, tuple[float, ...]] = {}
        for line in text.splitlines():
            parts = line.split()
            if not parts:
                continue
            vectors[parts[0]] = tuple(float(x) for x in parts[1:])
        return cls(vectors)

    @classmethod
    def load(cls, path: str) -> EmbeddingTable:
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def stem_token(token: str) -> str:
    """Deterministic suffix stripper: plural -s/-es/-ies and -ing/-ed."""
    if len(token) > 4 and token.endswith("ies"):
        return token[:-3] + "y"
    if len(token) > 3 and token.endswith(("oes", "xes", "ches", "shes", "sses")):
        return token[:-2]
    if len(token) > 5 and token.endswith("ing"):
        return token[:-3]
    if len(token) > 4 and token.endswith("ed"):
        return token[:-2]
    if len(token) > 3 and token.endswith("s") and not token.endswith("ss"):
        return token[:-1]
    return token


def stem_name(name: str) -> tuple[str, ...]:
    return tuple(stem_token(t) for t in name.split())


def stem_merge(names: list[str] | tuple[str, ...]) -> list[list[str]]:
    """Partition names into groups whose per-token stems are equal."""
    if not names:
        raise ValueError("names must be nonempty")
    groups: dict[tuple[str, ...], list[str]] = {}
    for name in names:
        groups.setdefault(stem_name(name), []).append(name)
    return list(groups.values())


def stem_proposals(names: list[str] | tuple[str, ...]) -> list[MergeProposal]:
    """Pairwise merge proposals within each stem group."""
    proposals = []
    for group in stem_merge(names):
        for a, b in itertools.combinations(sorted(group), 2):
            proposals.append(MergeProposal(source=b, target=a, rule="stem"))
    return proposals


def _cosine(u: tuple[float, ...], v: tuple[float, ...]) -> float:
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return dot / (nu * nv)


def propose_merges(
    names: list[str] | tuple[str, ...],
    emb: EmbeddingTable,
    mapping: dict[str, str],
    threshold: float = 0.85,
) -> list[MergeProposal]:
    """Pairwise proposals from the embedding, shared-words and same-mapping rules.

    A name pair can trigger several rules and then yields one proposal per
    rule.  Pairs where either name has no embeddable token skip the
    embedding rule only.  Output order is (rule, descending score, pair).
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    vectors = {name: emb.name_vector(name) for name in names}
    tokens = {name: set(name.split()) for name in names}
    proposals = []
    for target, source in itertools.combinations(sorted(set(names)), 2):
        va, vb = vectors[target], vectors[source]
        if va is not None and vb is not None:
            similarity = _cosine(va, vb)
            if similarity >= threshold:
                score = min(max(similarity, 0.0), 1.0)
                proposals.append(MergeProposal(source, target, "embedding", score))
        if len(tokens[target] & tokens[source]) >= 2:
            proposals.append(MergeProposal(source, target, "shared_words"))
        item_a, item_b = mapping.get(target), mapping.get(source)
        if item_a is not None and item_a == item_b:
            proposals.append(MergeProposal(source, target, "same_mapping"))
    proposals.sort(key=lambda p: (p.rule, -p.score, p.target, p.source))
    return proposals


@dataclass(frozen=True)
class Decision:
    accepted: bool
    source: str
    target: str
    rule: str | None = None  # None matches any rule for the pair


@dataclass
class DecisionLedger:
    """Replayable accept/reject record of the human annotation step."""

    decisions: list[Decision] = field(default_factory=list)

    @classmethod
    def from_text(cls, text: str) -> DecisionLedger:
        decisions = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            verdict, _, rest = line.partition(" ")
            if verdict not in ("accept", "reject"):
                raise ValueError(f"ledger line {lineno}: expected accept/reject")
            rule = None
            if rest.endswith("]") and "[" in rest:
                rest, _, bracket = rest.rpartition("[")
                rule = bracket[:-1].strip()
                rest = rest.strip()
            source, sep, target = rest.partition(" -> ")
            if not sep:
                raise ValueError(f"ledger line {lineno}: expected '<source> -> <target>'")
            decisions.append(Decision(verdict == "accept", source.strip(), target.strip(), rule))
        return cls(decisions)

    @classmethod
    def load(cls, path: str) -> DecisionLedger:
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def apply_decisions(
    names: list[str] | tuple[str, ...],
    frequencies: dict[str, int],
    proposals: list[MergeProposal],
    ledger: DecisionLedger,
) -> CanonicalVocabulary:
    """Union the accepted merges; each union keeps its most frequent member.

    Frequency ties break lexicographically.  Canonical names are ordered by
    descending total member frequency, then name.  Raises UnknownProposal
    when the ledger references a pair/rule not in the proposal list.
    """
    known = {p.key() for p in proposals}
    pairs_any_rule = {(p.source, p.target) for p in proposals}
    uf = _UnionFind(list(names))
    for decision in ledger.decisions:
        pair = (decision.source, decision.target)
        if decision.rule is not None:
            if (decision.source, decision.target, decision.rule) not in known:
                raise UnknownProposal(f"{pair[0]} -> {pair[1]} [{decision.rule}]")
        elif pair not in pairs_any_rule:
            raise UnknownProposal(f"{pair[0]} -> {pair[1]}")
        if decision.accepted:
            uf.union(decision.source, decision.target)

    members: dict[str, list[str]] = {}
    for name in names:
        members.setdefault(uf.find(name), []).append(name)

    def canonical_of(group: list[str]) -> str:
        return min(group, key=lambda n: (-frequencies.get(n, 0), n))

    groups = [(canonical_of(g), g) for g in members.values()]
    groups.sort(key=lambda cg: (-sum(frequencies.get(n, 0) for n in cg[1]), cg[0]))
    canonical_names = tuple(c for c, _ in groups)
    alias_map: dict[str, int] = {}
    for index, (_, group) in enumerate(groups):
        for member in group:
            alias_map[member] = index
    return CanonicalVocabulary(canonical_names, alias_map)


def compute_coverage(
    recipes: list[list[str]], vocab: CanonicalVocabulary
) -> tuple[list[Fraction], Fraction]:
    """Per-recipe fraction of ingredients resolvable in the vocabulary.

    Returns exact rationals; the mean is the plain average over recipes.
    """
    if not recipes:
        raise EmptyRecipeSet("no recipes")
    per_recipe = []
    for ingredients in recipes:
        if not ingredients:
            raise EmptyRecipeSet("recipe with zero parsed ingredients")
        covered = sum(1 for name in ingredients if vocab.resolve(name) is not None)
        per_recipe.append(Fraction(covered, len(ingredients)))
    mean = sum(per_recipe, Fraction(0)) / len(per_recipe)
    return per_recipe, mean


def _as_fraction(x) -> Fraction:
    """Exact threshold: floats go through their shortest decimal repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def filter_by_coverage(
    recipes: list[tuple[str, list]],
    vocab: CanonicalVocabulary,
    min_coverage: float | str | Fraction = 0.8,
    name_of=None,
) -> list[tuple[str, list]]:
    """Keep (id, ingredients) recipes with coverage >= min_coverage.

    Uncovered ingredients are dropped from the kept recipes; the boundary
    is inclusive and compared exactly.  Ingredients may be raw name strings
    or richer records reached through name_of.
    """
    threshold = _as_fraction(min_coverage)
    if name_of is None:
        name_of = lambda item: item
    kept = []
    for recipe_id, ingredients in recipes:
        if not ingredients:
            continue
        covered = [x for x in ingredients if vocab.resolve(name_of(x)) is not None]
        if Fraction(len(covered), len(ingredients)) >= threshold:
            kept.append((recipe_id, covered))
    return kept
