"""Sense-similarity payoffs.

A single c x c matrix Z holds the pairwise similarity of every concept in
the text's global concept list; each two-player game then reads its payoff
matrix as the Z slice over the two players' sense inventories. Providers:
taxonomy path similarity (wup), information-content distance (jcn), gloss
cosine with raw or tf-idf term weights, or a precomputed matrix file.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import EngineError, ParseError, UnknownConcept

JCN_EPSILON = 1e-9
JCN_CAP = 1e9


class Provider(str, Enum):
    WUP = "wup"
    JCN = "jcn"
    GLOSS_COSINE_TFIDF = "gloss_cosine_tfidf"
    GLOSS_COSINE_RAW = "gloss_cosine_raw"
    PRECOMPUTED = "precomputed"

    @classmethod
    def parse(cls, name: str) -> "Provider":
        normalized = name.strip().lower().replace("-", "_")
        for p in cls:
            if p.value == normalized:
                return p
        raise ValueError(f"unknown payoff provider {name!r}")


class NoCommonAncestor(EngineError):
    """Two concepts share no taxonomy ancestor (e.g. different POS trees)."""


class MissingIC(EngineError):
    """A concept or the most specific ancestor lacks an IC record."""


class EmptyGloss(EngineError):
    """A concept's gloss has no tokens; its vector is all zero."""


@dataclass(frozen=True)
class TaxonomyRecord:
    concept: str
    depth: int  # root = 1
    ic: float
    parent: str | None


class Taxonomy:
    """Concept records plus derived ancestor chains (self first, root last)."""

    def __init__(self, records: dict[str, TaxonomyRecord]):
        self.records = records
        self._ancestors: dict[str, tuple[str, ...]] = {}

    def record(self, concept: str) -> TaxonomyRecord:
        try:
            return self.records[concept]
        except KeyError:
            raise UnknownConcept(f"{concept!r} not in taxonomy") from None

    def ancestors(self, concept: str) -> tuple[str, ...]:
        if concept in self._ancestors:
            return self._ancestors[concept]
        chain = []
        seen = set()
        current: str | None = concept
        while current is not None:
            if current in seen:
                raise EngineError(f"taxonomy cycle through {current!r}")
            seen.add(current)
            chain.append(current)
            current = self.record(current).parent
        result = tuple(chain)
        self._ancestors[concept] = result
        return result

    def most_specific_ancestor(self, a: str, b: str) -> str:
        """Deepest node on both ancestor chains (a concept counts as its
        own ancestor, so msa(a, a) = a)."""
        chain_b = set(self.ancestors(b))
        for node in self.ancestors(a):  # self first = deepest first
            if node in chain_b:
                return node
        raise NoCommonAncestor(f"{a!r} and {b!r} share no ancestor")


def wup(a: str, b: str, tax: Taxonomy) -> float:
    """Path similarity 2*depth(msa) / (depth(a) + depth(b)), in (0, 1].

    Concepts in disjoint taxonomies are maximally dissimilar: 0.
    """
    try:
        msa = tax.most_specific_ancestor(a, b)
    except NoCommonAncestor:
        return 0.0
    return 2.0 * tax.record(msa).depth / (tax.record(a).depth + tax.record(b).depth)


def jcn(a: str, b: str, tax: Taxonomy, invert: bool = False) -> float:
    """Information-content distance IC(a) + IC(b) - 2*IC(msa).

    The raw value is a distance (0 for identical concepts). With
    invert=True it is mapped to a similarity 1/(d + 1e-9), capped at 1e9.
    Missing concepts or no shared ancestor yield 0.
    """
    try:
        msa = tax.most_specific_ancestor(a, b)
        distance = tax.record(a).ic + tax.record(b).ic - 2.0 * tax.record(msa).ic
    except (NoCommonAncestor, UnknownConcept):
        return 0.0
    if not invert:
        return distance
    if distance <= 0.0:  # identical concepts: the inverse saturates the cap
        return JCN_CAP
    return min(1.0 / (distance + JCN_EPSILON), JCN_CAP)


GlossVector = dict[str, float]


def _tokens(text: str) -> list[str]:
    return text.lower().split()


def build_gloss_vectors(
    glosses: dict[str, str],
    relations: dict[str, tuple[str, ...]] | None = None,
    weighting: str = "tfidf",
) -> dict[str, GlossVector]:
    """Bag-of-words vector per concept over its super-gloss.

    A super-gloss is the concept's own gloss concatenated with the glosses
    of its directly related concepts (one hop along the relation records).
    raw keeps term frequencies; tfidf multiplies by ln(N/df) with N the
    number of super-gloss documents and df the number containing the term,
    so a term present in every super-gloss contributes nothing.
    """
    if weighting not in ("tfidf", "raw"):
        raise ValueError(f"weighting must be 'tfidf' or 'raw', got {weighting!r}")
    relations = relations or {}
    super_tokens: dict[str, Counter] = {}
    for concept, gloss in glosses.items():
        tokens = Counter(_tokens(gloss))
        for related in relations.get(concept, ()):
            if related in glosses:
                tokens.update(_tokens(glosses[related]))
        super_tokens[concept] = tokens

    if weighting == "raw":
        return {c: {t: float(f) for t, f in tokens.items()} for c, tokens in super_tokens.items()}

    num_docs = len(super_tokens)
    df = Counter()
    for tokens in super_tokens.values():
        df.update(tokens.keys())
    vectors = {}
    for concept, tokens in super_tokens.items():
        vectors[concept] = {
            t: f * math.log(num_docs / df[t]) for t, f in tokens.items()
        }
    return vectors


def cosine(a: GlossVector, b: GlossVector) -> float:
    """Cosine of the angle between two sparse vectors; 0 if either is zero."""
    norm_a = math.sqrt(sum(w * w for w in a.values()))
    norm_b = math.sqrt(sum(w * w for w in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    if len(b) < len(a):
        a, b = b, a
    dot = sum(w * b[t] for t, w in a.items() if t in b)
    return dot / (norm_a * norm_b)


@dataclass(frozen=True)
class PayoffStore:
    """Symmetric global sense-similarity matrix over the concept list.

    warnings counts per-pair provider failures that were mapped to 0,
    which is the payoff of incompatible senses.
    """

    concepts: tuple[str, ...]
    z: np.ndarray
    provider: Provider
    warnings: int = 0

    def __post_init__(self):
        self.z.setflags(write=False)

    def index_of(self, concept: str) -> int:
        try:
            return self.concepts.index(concept)
        except ValueError:
            raise UnknownConcept(f"{concept!r} not in payoff store") from None


def build_payoff_store(
    concepts: tuple[str, ...],
    provider: Provider,
    *,
    taxonomy: Taxonomy | None = None,
    glosses: dict[str, str] | None = None,
    relations: dict[str, tuple[str, ...]] | None = None,
    precomputed: dict[tuple[str, str], float] | None = None,
    jcn_invert: bool = False,
) -> PayoffStore:
    """Fill the full symmetric matrix once; games only slice it afterwards.

    Per-pair provider failures (unknown concept, empty gloss) become 0
    with a warning count instead of aborting the build. Precomputed
    entries for concepts outside the global list are ignored: the file may
    cover a whole knowledge base.
    """
    size = len(concepts)
    z = np.zeros((size, size))
    warnings = 0

    if provider is Provider.PRECOMPUTED:
        if precomputed is None:
            raise ValueError("precomputed provider needs a similarity mapping")
        index = {c: k for k, c in enumerate(concepts)}
        for (a, b), value in precomputed.items():
            if a in index and b in index:
                z[index[a], index[b]] = value
                z[index[b], index[a]] = value
        return PayoffStore(concepts, z, provider, 0)

    if provider in (Provider.WUP, Provider.JCN):
        if taxonomy is None:
            raise ValueError(f"{provider.value} provider needs a taxonomy")

        def pair_sim(a: str, b: str) -> float:
            if provider is Provider.WUP:
                return wup(a, b, taxonomy)
            return jcn(a, b, taxonomy, invert=jcn_invert)

    else:
        if glosses is None:
            raise ValueError(f"{provider.value} provider needs glosses")
        weighting = "tfidf" if provider is Provider.GLOSS_COSINE_TFIDF else "raw"
        vectors = build_gloss_vectors(glosses, relations, weighting)
        zero = {c for c, v in vectors.items() if not any(v.values())}

        def pair_sim(a: str, b: str) -> float:
            if a not in vectors or b not in vectors:
                raise UnknownConcept(f"no gloss for {a!r} or {b!r}")
            if a in zero or b in zero:
                raise EmptyGloss(f"zero gloss vector for {a if a in zero else b!r}")
            return cosine(vectors[a], vectors[b])

    for h in range(size):
        for k in range(h, size):
            try:
                value = pair_sim(concepts[h], concepts[k])
            except EngineError:
                value = 0.0
                warnings += 1
            z[h, k] = z[k, h] = value
    return PayoffStore(concepts, z, provider, warnings)


def partial_payoff(store: PayoffStore, mi: list[str], mj: list[str]) -> np.ndarray:
    """Z slice over two sense inventories: (Z_ij)[h, k] = z[mi[h], mj[k]]."""
    rows = np.array([store.index_of(c) for c in mi], dtype=np.intp)
    cols = np.array([store.index_of(c) for c in mj], dtype=np.intp)
    return store.z[np.ix_(rows, cols)].copy()


def load_taxonomy(text: str, source: str = "taxonomy") -> Taxonomy:
    """Parse `concept<TAB>depth<TAB>ic<TAB>parent` lines; parent `-` = root."""
    records: dict[str, TaxonomyRecord] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise ParseError(source, line_no, "expected concept<TAB>depth<TAB>ic<TAB>parent")
        concept, raw_depth, raw_ic, parent = fields
        try:
            depth = int(raw_depth)
            ic = float(raw_ic)
        except ValueError:
            raise ParseError(source, line_no, "bad depth or ic") from None
        if depth < 1:
            raise ParseError(source, line_no, f"depth must be >= 1, got {depth}")
        if ic < 0:
            raise ParseError(source, line_no, f"ic must be >= 0, got {ic}")
        if concept in records:
            raise ParseError(source, line_no, f"duplicate concept {concept!r}")
        records[concept] = TaxonomyRecord(
            concept, depth, ic, None if parent == "-" else parent
        )
    return Taxonomy(records)


def load_glosses(text: str, source: str = "glosses") -> dict[str, str]:
    """Parse `concept<TAB>gloss text` lines."""
    glosses: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t", 1)
        if len(fields) != 2:
            raise ParseError(source, line_no, "expected concept<TAB>gloss text")
        concept, gloss = fields
        if concept in glosses:
            raise ParseError(source, line_no, f"duplicate gloss for {concept!r}")
        glosses[concept] = gloss
    return glosses


def load_relations(text: str, source: str = "relations") -> dict[str, tuple[str, ...]]:
    """Parse `concept<TAB>related_concept` lines (directed records)."""
    related: dict[str, list[str]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError(source, line_no, "expected concept<TAB>related_id")
        related.setdefault(fields[0], []).append(fields[1])
    return {c: tuple(ids) for c, ids in related.items()}


def load_precomputed(text: str, source: str = "payoffs") -> dict[tuple[str, str], float]:
    """Parse `concept_a<TAB>concept_b<TAB>similarity` lines; absent pairs are 0."""
    entries: dict[tuple[str, str], float] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(source, line_no, "expected concept_a<TAB>concept_b<TAB>similarity")
        try:
            value = float(fields[2])
        except ValueError:
            raise ParseError(source, line_no, f"bad similarity {fields[2]!r}") from None
        entries[(fields[0], fields[1])] = value
    return entries


def serialize_payoffs(store: PayoffStore) -> str:
    """Upper-triangle (including diagonal) nonzero entries as flat lines."""
    lines = []
    size = len(store.concepts)
    for h in range(size):
        for k in range(h, size):
            v = store.z[h, k]
            if v != 0.0:
                lines.append(f"{store.concepts[h]}\t{store.concepts[k]}\t{float(v)!r}")
    return "\n".join(lines) + ("\n" if lines else "")
