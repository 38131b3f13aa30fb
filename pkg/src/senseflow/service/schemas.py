"""Request and response models of the HTTP service.

Input files travel as raw text payloads so the service stays stateless:
one request carries everything a run needs, and identical requests always
produce identical responses.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class TableCounts(BaseModel):
    o11: int
    r1: int
    c1: int
    n: int


class AssociateRequest(BaseModel):
    measure: str = "mdice"
    tables: list[TableCounts] = Field(default_factory=list)
    pairs: list[tuple[str, str]] = Field(default_factory=list)
    counts: str | None = None
    unigrams: str | None = None


class AssociateResponse(BaseModel):
    # None marks a table on which the measure is undefined (weight-0 semantics)
    table_scores: list[float | None]
    pair_scores: list[float | None]


class FilePayload(BaseModel):
    occurrences: str
    inventory: str
    counts: str | None = None
    unigrams: str | None = None
    graph: str | None = None
    clusters: str | None = None
    glosses: str | None = None
    relations: str | None = None
    taxonomy: str | None = None
    payoffs: str | None = None
    stopwords: str | None = None
    gold: str | None = None


class OptionsPayload(BaseModel):
    measure: str = "mdice"
    provider: str = "gloss_cosine_tfidf"
    n: int = 5
    init: str = "uniform"
    p: float = 0.4
    jcn_invert: bool = False
    epsilon: float = 1e-6
    max_iterations: int = 1000
    fallback: str = "none"
    workers: int = 1
    trajectory: bool = False


class GraphRequest(BaseModel):
    occurrences: str
    counts: str
    unigrams: str
    inventory: str | None = None
    stopwords: str | None = None
    measure: str = "mdice"
    n: int = 5


class GraphResponse(BaseModel):
    players: list[str]  # instance ids in graph index order
    dropped: list[str]
    edges: str  # i<TAB>j<TAB>weight lines, upper triangle, nonzero


class StatsPayload(BaseModel):
    correct: int
    answered: int
    total: int
    precision: float
    recall: float
    f1: float


class ReportPayload(BaseModel):
    overall: StatsPayload
    per_pos: dict[str, StatsPayload]
    precision_equals_recall: bool


class AnswerPayload(BaseModel):
    instance_id: str
    concept: str
    probability: float


class DisambiguateRequest(BaseModel):
    files: FilePayload
    options: OptionsPayload = Field(default_factory=OptionsPayload)


class DisambiguateResponse(BaseModel):
    answers: list[AnswerPayload]
    answers_text: str
    unassigned: list[str]
    dropped: list[str]
    iterations: int
    converged: bool
    payoff_warnings: int
    report: ReportPayload | None = None
    report_text: str | None = None  # human-readable block
    report_tsv: str | None = None
    trajectory_text: str | None = None


class ScoreRequest(BaseModel):
    answers: str
    gold: str


class ScoreResponse(BaseModel):
    report: ReportPayload
    report_text: str  # human-readable block
    report_tsv: str


class DilemmaRequest(BaseModel):
    max_iterations: int = 200
    epsilon: float = 1e-6


class DilemmaResponse(BaseModel):
    # one row per iteration: [step, defect probability, cooperate probability]
    trajectory: list[tuple[int, float, float]]
    trajectory_text: str
    iterations: int
    converged: bool
    choice: str


class ErrorDetail(BaseModel):
    message: str
    source: str | None = None
    line: int | None = None
