"""Sense inventories and the players' mixed-strategy matrix.

Each player owns one row of an N x c matrix: a probability distribution
over the global concept list, supported only on that player's own senses.
Rows start uniform, or geometrically decreasing by sense rank, or
geometrically decreasing by cluster rank with equal mass inside a cluster.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MissingClusters, MissingInventory, ParseError
from .graph import Occurrence

ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class SenseInventory:
    """Ranked concept lists per (lemma, pos), with optional sense clusters."""

    senses: dict[tuple[str, str], tuple[str, ...]]
    clusters: dict[tuple[str, str], tuple[tuple[str, ...], ...]] | None = None

    def lookup(self, lemma: str, pos: str) -> tuple[str, ...]:
        try:
            return self.senses[(lemma, pos)]
        except KeyError:
            raise MissingInventory(lemma, pos) from None

    def lookup_clusters(self, lemma: str, pos: str) -> tuple[tuple[str, ...], ...]:
        if self.clusters is None or (lemma, pos) not in self.clusters:
            raise MissingClusters(f"no sense clusters for {lemma!r}/{pos}")
        return self.clusters[(lemma, pos)]

    def has(self, lemma: str, pos: str) -> bool:
        return (lemma, pos) in self.senses


@dataclass
class StrategyState:
    """Row-stochastic strategy matrix over the global concept list.

    supports[i] holds the column indices of player i's senses in rank
    order; entries outside a player's support are structurally zero.
    """

    concepts: tuple[str, ...]
    matrix: np.ndarray
    supports: tuple[np.ndarray, ...]

    @property
    def num_players(self) -> int:
        return self.matrix.shape[0]

    def column_of(self, concept: str) -> int:
        return self.concepts.index(concept)

    def copy(self) -> "StrategyState":
        return StrategyState(self.concepts, self.matrix.copy(), self.supports)

    def check_simplex(self, tol: float = ROW_SUM_TOL) -> None:
        sums = self.matrix.sum(axis=1)
        if np.any(self.matrix < 0):
            raise AssertionError("negative strategy entry")
        if np.any(np.abs(sums - 1.0) > tol):
            raise AssertionError(f"row sums off the simplex: {sums}")


def concept_list(
    inventories: SenseInventory, players: list[Occurrence]
) -> tuple[str, ...]:
    """All distinct concept ids over the players, in first-appearance order."""
    seen: dict[str, None] = {}
    for occ in players:
        for concept in inventories.lookup(occ.lemma, occ.pos):
            seen.setdefault(concept)
    return tuple(seen)


def _empty_state(
    inventories: SenseInventory, players: list[Occurrence]
) -> tuple[StrategyState, list[tuple[str, ...]]]:
    concepts = concept_list(inventories, players)
    index = {c: k for k, c in enumerate(concepts)}
    matrix = np.zeros((len(players), len(concepts)))
    supports = []
    sense_lists = []
    for occ in players:
        senses = inventories.lookup(occ.lemma, occ.pos)
        supports.append(np.array([index[s] for s in senses], dtype=np.intp))
        sense_lists.append(senses)
    return StrategyState(concepts, matrix, tuple(supports)), sense_lists


def init_uniform(
    inventories: SenseInventory, players: list[Occurrence]
) -> StrategyState:
    """Equal probability over each player's senses."""
    state, sense_lists = _empty_state(inventories, players)
    for i, senses in enumerate(sense_lists):
        state.matrix[i, state.supports[i]] = 1.0 / len(senses)
    return state


def _geometric_row(p: float, ranks: np.ndarray) -> np.ndarray:
    """p(1-p)^rank, normalized. Rank 0 is the top sense; a 1-based rank
    convention differs by the common factor (1-p), which cancels here."""
    raw = p * (1.0 - p) ** ranks
    return raw / raw.sum()

def init_geometric(
    inventories: SenseInventory, players: list[Occurrence], p: float
) -> StrategyState:
    """Probability decreasing geometrically with sense rank."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"geometric parameter must lie in (0, 1), got {p}")
    state, sense_lists = _empty_state(inventories, players)
    for i, senses in enumerate(sense_lists):
        ranks = np.arange(len(senses), dtype=float)
        state.matrix[i, state.supports[i]] = _geometric_row(p, ranks)
    return state


def init_clustered(
    inventories: SenseInventory, players: list[Occurrence], p: float
) -> StrategyState:
    """Geometric over cluster rank, equal probability inside a cluster."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"geometric parameter must lie in (0, 1), got {p}")
    state, sense_lists = _empty_state(inventories, players)
    for i, occ in enumerate(players):
        senses = sense_lists[i]
        clusters = inventories.lookup_clusters(occ.lemma, occ.pos)
        clustered = [s for group in clusters for s in group]
        if sorted(clustered) != sorted(senses) or len(clustered) != len(senses):
            raise MissingClusters(
                f"clusters for {occ.lemma!r}/{occ.pos} do not partition its senses"
            )
        cluster_rank = {s: r for r, group in enumerate(clusters) for s in group}
        ranks = np.array([cluster_rank[s] for s in senses], dtype=float)
        state.matrix[i, state.supports[i]] = _geometric_row(p, ranks)
    return state


def partition_by_inventory(
    players: list[Occurrence], inventories: SenseInventory
) -> tuple[list[Occurrence], list[Occurrence]]:
    """Split players into (covered, dropped) by inventory coverage.

    Dropped players cannot join the game; the pipeline reports them and
    they count against recall.
    """
    covered = [occ for occ in players if inventories.has(occ.lemma, occ.pos)]
    dropped = [occ for occ in players if not inventories.has(occ.lemma, occ.pos)]
    return covered, dropped


def load_inventory(
    text: str,
    clusters_text: str | None = None,
    source: str = "inventory",
    clusters_source: str = "clusters",
) -> SenseInventory:
    """Parse `lemma<TAB>pos<TAB>id,id,...` (rank order) and the optional
    cluster file `lemma<TAB>pos<TAB>{a,b}|{c}|...` (rank-ordered groups)."""
    senses: dict[tuple[str, str], tuple[str, ...]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(source, line_no, "expected lemma<TAB>pos<TAB>concept,...")
        lemma, pos, raw_ids = fields
        ids = tuple(s.strip() for s in raw_ids.split(",") if s.strip())
        if not ids:
            raise ParseError(source, line_no, "empty sense list")
        if len(set(ids)) != len(ids):
            raise ParseError(source, line_no, "duplicate concept id in inventory")
        if (lemma, pos) in senses:
            raise ParseError(source, line_no, f"duplicate entry for {lemma!r}/{pos}")
        senses[(lemma, pos)] = ids

    clusters = None
    if clusters_text is not None:
        clusters = {}
        for line_no, raw in enumerate(clusters_text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ParseError(
                    clusters_source, line_no, "expected lemma<TAB>pos<TAB>{a,b}|{c}"
                )
            lemma, pos, raw_groups = fields
            groups = []
            for chunk in raw_groups.split("|"):
                chunk = chunk.strip()
                if not (chunk.startswith("{") and chunk.endswith("}")):
                    raise ParseError(clusters_source, line_no, f"bad cluster {chunk!r}")
                members = tuple(s.strip() for s in chunk[1:-1].split(",") if s.strip())
                if not members:
                    raise ParseError(clusters_source, line_no, "empty cluster")
                groups.append(members)
            clusters[(lemma, pos)] = tuple(groups)
    return SenseInventory(senses, clusters)
