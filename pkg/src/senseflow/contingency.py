"""Corpus association measures over 2x2 co-occurrence contingency tables.

A table counts, for a word pair (w_i, w_j): o11 = both together, o12 = w_i
without w_j, o21 = w_j without w_i, o22 = neither. Marginals r1 = o11+o12,
c1 = o11+o21 and the sample size n give expected cells e_hk = R_h * C_k / n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import InvalidCounts, ParseError, UndefinedForTable


class Measure(str, Enum):
    """The eight supported association measures."""

    DICE = "dice"
    MDICE = "mdice"
    PMI = "pmi"
    T_SCORE = "t-score"
    Z_SCORE = "z-score"
    ODDS_R = "odds-r"
    CHI_S = "chi-s"
    CHI_S_C = "chi-s-c"

    @classmethod
    def parse(cls, name: str) -> "Measure":
        normalized = name.strip().lower().replace("_", "-")
        for m in cls:
            if m.value == normalized:
                return m
        raise ValueError(f"unknown association measure {name!r}")


@dataclass(frozen=True)
class ContingencyTable:
    o11: int
    o12: int
    o21: int
    o22: int

    @property
    def r1(self) -> int:
        return self.o11 + self.o12

    @property
    def r2(self) -> int:
        return self.o21 + self.o22

    @property
    def c1(self) -> int:
        return self.o11 + self.o21

    @property
    def c2(self) -> int:
        return self.o12 + self.o22

    @property
    def n(self) -> int:
        return self.o11 + self.o12 + self.o21 + self.o22

    @property
    def e11(self) -> float:
        return self.r1 * self.c1 / self.n

    @property
    def e12(self) -> float:
        return self.r1 * self.c2 / self.n

    @property
    def e21(self) -> float:
        return self.r2 * self.c1 / self.n

    @property
    def e22(self) -> float:
        return self.r2 * self.c2 / self.n


def table_from_counts(o11: int, r1: int, c1: int, n: int) -> ContingencyTable:
    """Complete a table from the joint count, the two marginals and n.

    o12 = r1 - o11, o21 = c1 - o11, o22 = n - r1 - c1 + o11; all four
    observed cells must come out nonnegative and n must be positive.
    """
    if n <= 0:
        raise InvalidCounts(f"sample size must be positive, got n={n}")
    if min(o11, r1, c1) < 0:
        raise InvalidCounts(f"negative count: o11={o11}, r1={r1}, c1={c1}")
    o12 = r1 - o11
    o21 = c1 - o11
    o22 = n - r1 - c1 + o11
    if o12 < 0 or o21 < 0:
        raise InvalidCounts(f"o11={o11} exceeds a marginal (r1={r1}, c1={c1})")
    if o22 < 0:
        raise InvalidCounts(f"marginals r1={r1}, c1={c1} exceed n={n}")
    return ContingencyTable(o11, o12, o21, o22)


def score(t: ContingencyTable, m: Measure) -> float:
    """Association score of a table under one of the eight measures.

    dice     2*O11 / (R1+C1)
    mdice    log2(O11) * 2*O11 / (R1+C1)
    pmi      log2(O11 / E11)
    t-score  (O11-E11) / sqrt(O11)
    z-score  (O11-E11) / sqrt(E11)
    odds-r   ln( (O11+1/2)(O22+1/2) / (O12+1/2)(O21+1/2) )
    chi-s    sum_hk (O_hk-E_hk)^2 / E_hk
    chi-s-c  N * (|O11*O22 - O12*O21| - N/2)^2 / (R1*R2*C1*C2)

    Raises UndefinedForTable when the table violates the measure's
    precondition (o11 = 0 for the log/sqrt-of-O11 measures, a zero expected
    cell for chi-s and z-score, a zero marginal product for chi-s-c); graph
    construction maps that to edge weight 0. Values may be negative for
    pmi, t-score, z-score and odds-r; they are passed through unchanged.
    """
    if m is Measure.DICE:
        if t.r1 + t.c1 <= 0:
            raise UndefinedForTable("dice needs r1 + c1 > 0")
        return 2.0 * t.o11 / (t.r1 + t.c1)
    if m is Measure.MDICE:
        if t.o11 <= 0:
            raise UndefinedForTable("mdice needs o11 > 0")
        return math.log2(t.o11) * 2.0 * t.o11 / (t.r1 + t.c1)
    if m is Measure.PMI:
        if t.o11 <= 0:
            raise UndefinedForTable("pmi needs o11 > 0")
        return math.log2(t.o11 / t.e11)
    if m is Measure.T_SCORE:
        if t.o11 <= 0:
            raise UndefinedForTable("t-score needs o11 > 0")
        return (t.o11 - t.e11) / math.sqrt(t.o11)
    if m is Measure.Z_SCORE:
        if t.e11 <= 0:
            raise UndefinedForTable("z-score needs e11 > 0")
        return (t.o11 - t.e11) / math.sqrt(t.e11)
    if m is Measure.ODDS_R:
        return math.log(
            ((t.o11 + 0.5) * (t.o22 + 0.5)) / ((t.o12 + 0.5) * (t.o21 + 0.5))
        )
    if m is Measure.CHI_S:
        cells = (
            (t.o11, t.e11),
            (t.o12, t.e12),
            (t.o21, t.e21),
            (t.o22, t.e22),
        )
        if any(e <= 0 for _, e in cells):
            raise UndefinedForTable("chi-s needs every expected cell > 0")
        return sum((o - e) ** 2 / e for o, e in cells)
    if m is Measure.CHI_S_C:
        denom = t.r1 * t.r2 * t.c1 * t.c2
        if denom <= 0:
            raise UndefinedForTable("chi-s-c needs every marginal > 0")
        return t.n * (abs(t.o11 * t.o22 - t.o12 * t.o21) - t.n / 2.0) ** 2 / denom
    raise ValueError(f"unhandled measure {m}")


class CountsStore:
    """Pair and unigram frequencies backing contingency tables.

    Pair counts are stored under the unordered lemma pair. The corpus size
    comes from a `#N <total>` header in either input file.
    """

    def __init__(
        self,
        pairs: dict[tuple[str, str], int],
        unigrams: dict[str, int],
        total: int,
    ):
        self.pairs = pairs
        self.unigrams = unigrams
        self.total = total

    @staticmethod
    def _key(a: str, b: str) -> tuple[str, str]:
        return (a, b) if a <= b else (b, a)

    def pair_count(self, a: str, b: str) -> int:
        return self.pairs.get(self._key(a, b), 0)

    def has_pair(self, a: str, b: str) -> bool:
        return self._key(a, b) in self.pairs

    def contains(self, lemma: str) -> bool:
        """True when the lemma occurs anywhere in the store."""
        if lemma in self.unigrams:
            return True
        return any(lemma in key for key in self.pairs)

    def table_for(self, a: str, b: str) -> ContingencyTable:
        """Contingency table for an unordered lemma pair.

        o11 is the stored pair count, r1/c1 the unigram counts, n the
        corpus size. Raises InvalidCounts on inconsistent data (also when
        a unigram record is missing, which makes a marginal 0 < o11).
        """
        o11 = self.pair_count(a, b)
        r1 = self.unigrams.get(a, 0)
        c1 = self.unigrams.get(b, 0)
        return table_from_counts(o11, r1, c1, self.total)


def _parse_tagged_lines(text: str, source: str):
    """Yield (line_no, fields) for data lines; capture a `#N` header."""
    total = None
    rows = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line.split()
            if parts[0] == "#N":
                if len(parts) != 2 or not parts[1].isdigit():
                    raise ParseError(source, line_no, "malformed #N header")
                total = int(parts[1])
            continue
        rows.append((line_no, line.split("\t")))
    return total, rows


def load_counts(
    pairs_text: str,
    unigrams_text: str,
    pairs_source: str = "counts",
    unigrams_source: str = "unigrams",
) -> CountsStore:
    """Build a CountsStore from the pair-count and unigram file contents.

    Pair lines are `word_a<TAB>word_b<TAB>o11`, unigram lines are
    `word<TAB>frequency`. The `#N <total>` corpus-size header may sit in
    either file; it must appear at least once.
    """
    pair_total, pair_rows = _parse_tagged_lines(pairs_text, pairs_source)
    uni_total, uni_rows = _parse_tagged_lines(unigrams_text, unigrams_source)

    pairs: dict[tuple[str, str], int] = {}
    for line_no, fields in pair_rows:
        if len(fields) != 3:
            raise ParseError(pairs_source, line_no, "expected word_a<TAB>word_b<TAB>count")
        a, b, raw_count = fields
        try:
            count = int(raw_count)
        except ValueError:
            raise ParseError(pairs_source, line_no, f"bad count {raw_count!r}") from None
        if count < 0:
            raise ParseError(pairs_source, line_no, "negative pair count")
        pairs[CountsStore._key(a, b)] = count

    unigrams: dict[str, int] = {}
    for line_no, fields in uni_rows:
        if len(fields) != 2:
            raise ParseError(unigrams_source, line_no, "expected word<TAB>frequency")
        word, raw_count = fields
        try:
            count = int(raw_count)
        except ValueError:
            raise ParseError(unigrams_source, line_no, f"bad count {raw_count!r}") from None
        if count < 0:
            raise ParseError(unigrams_source, line_no, "negative unigram count")
        unigrams[word] = count

    total = uni_total if uni_total is not None else pair_total
    if total is None:
        raise ParseError(unigrams_source, 1, "missing #N <total> corpus-size header")
    return CountsStore(pairs, unigrams, total)
