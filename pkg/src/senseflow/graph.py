"""Player-interaction graph over the target-word occurrences of a text.

Edge weights come from an association measure over corpus counts; a second
pass adds the graph's mean positive weight to every pair of content words
that fall within an n-token window, which reconnects words the corpus does
not cover.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contingency import CountsStore, Measure, score
from .errors import InvalidCounts, NoAlternativeFound, ParseError, UndefinedForTable


@dataclass(frozen=True)
class Occurrence:
    """One target-word occurrence: a player of the labeling game."""

    doc_id: str
    position: int
    lemma: str
    pos: str
    instance_id: str


@dataclass(frozen=True)
class WordGraph:
    players: tuple[Occurrence, ...]
    weights: np.ndarray  # symmetric, zero diagonal

    def __post_init__(self):
        self.weights.setflags(write=False)

    @property
    def size(self) -> int:
        return len(self.players)

    def mean_positive_weight(self) -> float:
        """Mean of the strictly positive upper-triangle weights, 0 if none.

        This is the n-gram augmentation increment; it is taken before any
        augmentation so the operation is independent of edge order.
        """
        upper = self.weights[np.triu_indices(self.size, k=1)]
        positive = upper[upper > 0]
        if positive.size == 0:
            return 0.0
        return float(positive.mean())


@dataclass(frozen=True)
class NgramPolicy:
    """Window size in content tokens; n=0 disables augmentation."""

    n: int
    stopwords: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("ngram window must be nonnegative")


def build_word_graph(
    occurrences: list[Occurrence],
    counts: CountsStore,
    measure: Measure,
) -> WordGraph:
    """Weight every within-document player pair by its association score.

    Pairs missing from the count store, with inconsistent counts, or
    failing a measure precondition get weight 0; cross-document weights
    are always 0. Two occurrences of the same lemma draw on the lemma's
    self-co-occurrence record like any other pair.
    """
    if not occurrences:
        raise ValueError("occurrence list is empty")
    n = len(occurrences)
    weights = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            a, b = occurrences[i], occurrences[j]
            if a.doc_id != b.doc_id:
                continue
            if not counts.has_pair(a.lemma, b.lemma):
                continue
            try:
                w = score(counts.table_for(a.lemma, b.lemma), measure)
            except (InvalidCounts, UndefinedForTable):
                continue
            weights[i, j] = weights[j, i] = w
    return WordGraph(tuple(occurrences), weights)


def _content_ranks(g: WordGraph, stopwords: frozenset[str]) -> dict[int, int]:
    """Player index -> rank in its document's stop-word-free token stream.

    Stop-word players get no rank and therefore no proximity edges.
    """
    by_doc: dict[str, list[int]] = {}
    for idx, occ in enumerate(g.players):
        by_doc.setdefault(occ.doc_id, []).append(idx)
    ranks: dict[int, int] = {}
    for indices in by_doc.values():
        indices.sort(key=lambda i: g.players[i].position)
        rank = 0
        for i in indices:
            if g.players[i].lemma.lower() in stopwords:
                continue
            ranks[i] = rank
            rank += 1
    return ranks


def augment_with_ngram(g: WordGraph, policy: NgramPolicy) -> WordGraph:
    """Raise proximity-related pairs by the graph's mean positive weight.

    Two players interact by proximity when they sit in the same document
    within `n` of each other, distance measured over the content-token
    stream (stop-word players are dropped from the ranking and excluded
    from proximity edges). No weight ever decreases.
    """
    if policy.n == 0:
        return g
    increment = g.mean_positive_weight()
    ranks = _content_ranks(g, policy.stopwords)
    weights = g.weights.copy()
    indices = sorted(ranks)
    for a_pos, i in enumerate(indices):
        for j in indices[a_pos + 1 :]:
            if g.players[i].doc_id != g.players[j].doc_id:
                continue
            if abs(ranks[i] - ranks[j]) <= policy.n:
                weights[i, j] += increment
                weights[j, i] += increment
    return WordGraph(g.players, weights)


def expand_query(
    lemma: str,
    alternatives: list[str],
    counts: CountsStore,
    context: list[str],
) -> str:
    """Substitute a corpus-absent lemma by its best alternative form.

    The original lemma wins when the store already knows it. Otherwise the
    known alternative with the highest summed pair count against the
    context lemmas wins, ties broken by resource order.
    """
    if not alternatives:
        raise ValueError("alternatives list is empty")
    if counts.contains(lemma):
        return lemma
    best: str | None = None
    best_sum = -1
    for alt in alternatives:
        if not counts.contains(alt):
            continue
        total = sum(counts.pair_count(alt, c) for c in context)
        if total > best_sum:
            best, best_sum = alt, total
    if best is None:
        raise NoAlternativeFound(
            f"{lemma!r} and its alternatives are all absent from the count store"
        )
    return best


def load_occurrences(text: str, source: str = "occurrences") -> list[Occurrence]:
    """Parse `doc_id<TAB>position<TAB>lemma<TAB>pos<TAB>instance_id` lines."""
    occurrences = []
    seen_instances = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 5:
            raise ParseError(
                source, line_no, "expected doc_id<TAB>position<TAB>lemma<TAB>pos<TAB>instance_id"
            )
        doc_id, raw_pos, lemma, pos, instance_id = fields
        try:
            position = int(raw_pos)
        except ValueError:
            raise ParseError(source, line_no, f"bad position {raw_pos!r}") from None
        if instance_id in seen_instances:
            raise ParseError(source, line_no, f"duplicate instance id {instance_id!r}")
        seen_instances.add(instance_id)
        occurrences.append(Occurrence(doc_id, position, lemma, pos, instance_id))
    return occurrences


def load_stopwords(text: str) -> frozenset[str]:
    """One surface form per line, lowercased; blank and # lines skipped."""
    words = set()
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        words.add(line.lower())
    return frozenset(words)


def serialize_graph(g: WordGraph) -> str:
    """Upper-triangle nonzero edges as `i<TAB>j<TAB>w` lines."""
    lines = []
    for i in range(g.size):
        for j in range(i + 1, g.size):
            w = g.weights[i, j]
            if w != 0.0:
                lines.append(f"{i}\t{j}\t{float(w)!r}")
    return "\n".join(lines) + ("\n" if lines else "")


def load_graph(
    text: str, players: list[Occurrence], source: str = "graph"
) -> WordGraph:
    """Rebuild a WordGraph from serialize_graph output and its player list."""
    n = len(players)
    weights = np.zeros((n, n))
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(source, line_no, "expected i<TAB>j<TAB>weight")
        try:
            i, j, w = int(fields[0]), int(fields[1]), float(fields[2])
        except ValueError:
            raise ParseError(source, line_no, "bad edge record") from None
        if not (0 <= i < n and 0 <= j < n):
            raise ParseError(source, line_no, f"edge ({i},{j}) outside {n} players")
        if i == j:
            raise ParseError(source, line_no, "self-loops are not allowed")
        weights[i, j] = weights[j, i] = w
    return WordGraph(tuple(players), weights)
