"""Scoring against a gold standard, plus the most-frequent-sense baseline.

Precision is correct answers over provided answers, recall is correct
answers over instances to be answered; unassigned instances therefore cost
recall but not precision. F1 is the harmonic mean scaled to a percentage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dynamics import Assignment, GameOutcome
from .errors import ParseError, UnknownInstance
from .graph import Occurrence
from .senses import SenseInventory

GoldStandard = dict[str, frozenset[str]]


@dataclass(frozen=True)
class Stats:
    correct: int
    answered: int
    total: int

    @property
    def precision(self) -> float:
        return 100.0 * self.correct / self.answered if self.answered else 0.0

    @property
    def recall(self) -> float:
        return 100.0 * self.correct / self.total if self.total else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        if p + r == 0.0:
            return 0.0
        return 2.0 * p * r / (p + r)


@dataclass(frozen=True)
class ScoreReport:
    overall: Stats
    per_pos: dict[str, Stats] = field(default_factory=dict)

    @property
    def precision(self) -> float:
        return self.overall.precision

    @property
    def recall(self) -> float:
        return self.overall.recall

    @property
    def f1(self) -> float:
        return self.overall.f1

    @property
    def precision_equals_recall(self) -> bool:
        """True when every instance got an answer, which forces P = R."""
        return self.overall.answered == self.overall.total


def score_outcome(outcome: GameOutcome, gold: GoldStandard) -> ScoreReport:
    """Score assignments against gold concept sets.

    A choice is correct when it is any member of the instance's gold set.
    Instances in gold with no assignment count toward the totals only.
    An answered instance missing from gold is a wiring bug and raises.
    """
    answered_by_instance: dict[str, tuple[str | None, str]] = {}
    for a in outcome.assignments:
        if a.player is None:
            raise UnknownInstance("assignment without player metadata cannot be scored")
        if a.player.instance_id not in gold:
            raise UnknownInstance(f"{a.player.instance_id!r} not in the gold standard")
        answered_by_instance[a.player.instance_id] = (a.concept, a.player.pos)

    def stats_for(instance_ids) -> Stats:
        correct = answered = 0
        for instance_id in instance_ids:
            concept, _ = answered_by_instance.get(instance_id, (None, ""))
            if concept is None:
                continue
            answered += 1
            if concept in gold[instance_id]:
                correct += 1
        return Stats(correct, answered, len(instance_ids))

    report_pos: dict[str, list[str]] = {}
    for instance_id, (_, pos) in answered_by_instance.items():
        report_pos.setdefault(pos, []).append(instance_id)
    per_pos = {
        pos: stats_for(ids) for pos, ids in sorted(report_pos.items())
    }
    return ScoreReport(stats_for(list(gold)), per_pos)


def score_answer_files(answers: dict[str, str], gold: GoldStandard) -> ScoreReport:
    """Score a flat answers mapping; no per-POS breakdown is available."""
    outcome = GameOutcome(
        assignments=[
            Assignment(Occurrence("-", i, "-", "", instance_id), concept, 1.0, True)
            for i, (instance_id, concept) in enumerate(answers.items())
        ],
        iterations=0,
        converged=True,
    )
    report = score_outcome(outcome, gold)
    return ScoreReport(report.overall, {})


def mfs_baseline(
    players: list[Occurrence], inventories: SenseInventory
) -> GameOutcome:
    """Assign every player its top-ranked sense.

    Players without an inventory entry stay unassigned; everyone else
    always gets an answer.
    """
    assignments = []
    for occ in players:
        if inventories.has(occ.lemma, occ.pos):
            top = inventories.lookup(occ.lemma, occ.pos)[0]
            assignments.append(Assignment(occ, top, 1.0, True))
        else:
            assignments.append(Assignment(occ, None, 0.0, False))
    return GameOutcome(assignments, iterations=0, converged=True)


def load_gold(text: str, source: str = "gold") -> GoldStandard:
    """Parse `instance_id<TAB>concept_id[,concept_id...]` lines."""
    gold: GoldStandard = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError(source, line_no, "expected instance_id<TAB>concept[,concept...]")
        instance_id, raw_ids = fields
        ids = frozenset(s.strip() for s in raw_ids.split(",") if s.strip())
        if not ids:
            raise ParseError(source, line_no, "empty gold concept set")
        if instance_id in gold:
            raise ParseError(source, line_no, f"duplicate instance {instance_id!r}")
        gold[instance_id] = ids
    return gold


def load_answers(text: str, source: str = "answers") -> dict[str, str]:
    """Parse `instance_id<TAB>concept_id` lines."""
    answers: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError(source, line_no, "expected instance_id<TAB>concept_id")
        if fields[0] in answers:
            raise ParseError(source, line_no, f"duplicate answer for {fields[0]!r}")
        answers[fields[0]] = fields[1]
    return answers


def _stats_row(label: str, s: Stats) -> str:
    return (
        f"{label}\t{s.correct}\t{s.answered}\t{s.total}"
        f"\t{s.precision:.2f}\t{s.recall:.2f}\t{s.f1:.2f}"
    )


def report_tsv(report: ScoreReport) -> str:
    """Machine-readable block: one row overall, one per part of speech."""
    lines = ["scope\tcorrect\tanswered\ttotal\tprecision\trecall\tf1"]
    lines.append(_stats_row("all", report.overall))
    for pos, stats in report.per_pos.items():
        lines.append(_stats_row(pos, stats))
    return "\n".join(lines) + "\n"


def report_text(report: ScoreReport) -> str:
    """Human-readable block."""
    s = report.overall
    lines = [
        f"answered   {s.answered} / {s.total}",
        f"correct    {s.correct}",
        f"precision  {s.precision:.2f}",
        f"recall     {s.recall:.2f}",
        f"f1         {s.f1:.2f}",
    ]
    if report.precision_equals_recall:
        lines.append("note       all instances answered (precision = recall)")
    for pos, stats in report.per_pos.items():
        lines.append(
            f"  {pos or '?'}: P {stats.precision:.2f}  R {stats.recall:.2f}"
            f"  F1 {stats.f1:.2f}  ({stats.correct}/{stats.answered}/{stats.total})"
        )
    return "\n".join(lines) + "\n"
