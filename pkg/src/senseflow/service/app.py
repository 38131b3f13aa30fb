"""HTTP face of the engine.

Stateless JSON endpoints wrap the core package: score association tables,
build word graphs, run the full disambiguation pipeline, score answer
files and replay the bundled prisoner's-dilemma demonstration. Input
files arrive as text payloads; bad data comes back as a 400 with the
offending logical file and line.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..contingency import Measure, load_counts, score, table_from_counts
from ..dynamics import GameConfig, prisoners_dilemma, run
from ..errors import EngineError, ParseError, UndefinedForTable
from ..evaluate import (
    ScoreReport,
    load_answers,
    load_gold,
    report_text,
    report_tsv,
    score_answer_files,
)
from ..graph import (
    NgramPolicy,
    augment_with_ngram,
    build_word_graph,
    load_occurrences,
    load_stopwords,
    serialize_graph,
)
from ..payoff import Provider
from ..pipeline import (
    PipelineOptions,
    ResourceTexts,
    run_from_texts,
)
from ..senses import load_inventory, partition_by_inventory
from .schemas import (
    AnswerPayload,
    AssociateRequest,
    AssociateResponse,
    DilemmaRequest,
    DilemmaResponse,
    DisambiguateRequest,
    DisambiguateResponse,
    GraphRequest,
    GraphResponse,
    ReportPayload,
    ScoreRequest,
    ScoreResponse,
    StatsPayload,
)

app = FastAPI(
    title="senseflow",
    version=__version__,
    description="Consistent word-sense labeling by replicator dynamics",
)


def _bad_request(exc: EngineError) -> HTTPException:
    detail = {"message": str(exc), "source": None, "line": None}
    if isinstance(exc, ParseError):
        detail = {"message": exc.message, "source": exc.source, "line": exc.line}
    return HTTPException(status_code=400, detail=detail)


def _report_payload(report: ScoreReport) -> ReportPayload:
    def stats(s) -> StatsPayload:
        return StatsPayload(
            correct=s.correct,
            answered=s.answered,
            total=s.total,
            precision=s.precision,
            recall=s.recall,
            f1=s.f1,
        )

    return ReportPayload(
        overall=stats(report.overall),
        per_pos={pos: stats(s) for pos, s in report.per_pos.items()},
        precision_equals_recall=report.precision_equals_recall,
    )


def _options(payload) -> PipelineOptions:
    try:
        return PipelineOptions(
            measure=Measure.parse(payload.measure),
            provider=Provider.parse(payload.provider),
            ngram=payload.n,
            init=payload.init,
            p=payload.p,
            jcn_invert=payload.jcn_invert,
            game=GameConfig(
                max_iterations=payload.max_iterations,
                epsilon=payload.epsilon,
                fallback=payload.fallback.replace("-", "_"),
                workers=payload.workers,
            ),
            collect_trajectory=payload.trajectory,
        )
    except (ValueError, EngineError) as exc:
        raise HTTPException(status_code=400, detail={"message": str(exc)}) from exc


@app.get("/healthz")
def healthz() -> dict:
    return {"status": "ok"}


@app.get("/version")
def version() -> dict:
    return {"version": __version__}


@app.post("/associate", response_model=AssociateResponse)
def associate(request: AssociateRequest) -> AssociateResponse:
    try:
        measure = Measure.parse(request.measure)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail={"message": str(exc)}) from exc

    def safe_score(table) -> float | None:
        try:
            return score(table, measure)
        except UndefinedForTable:
            return None

    try:
        table_scores = [
            safe_score(table_from_counts(t.o11, t.r1, t.c1, t.n)) for t in request.tables
        ]
        pair_scores: list[float | None] = []
        if request.pairs:
            if request.counts is None or request.unigrams is None:
                raise HTTPException(
                    status_code=400,
                    detail={"message": "scoring word pairs needs counts and unigrams files"},
                )
            store = load_counts(request.counts, request.unigrams)
            for a, b in request.pairs:
                try:
                    pair_scores.append(safe_score(store.table_for(a, b)))
                except EngineError:
                    pair_scores.append(None)
    except EngineError as exc:
        raise _bad_request(exc) from exc
    return AssociateResponse(table_scores=table_scores, pair_scores=pair_scores)


@app.post("/graph", response_model=GraphResponse)
def build_graph(request: GraphRequest) -> GraphResponse:
    try:
        measure = Measure.parse(request.measure)
        occurrences = load_occurrences(request.occurrences)
        if not occurrences:
            raise HTTPException(
                status_code=400, detail={"message": "occurrence file holds no occurrences"}
            )
        dropped = []
        if request.inventory is not None:
            inventories = load_inventory(request.inventory)
            occurrences, dropped = partition_by_inventory(occurrences, inventories)
        store = load_counts(request.counts, request.unigrams)
        g = build_word_graph(occurrences, store, measure)
        stopwords = (
            load_stopwords(request.stopwords)
            if request.stopwords is not None
            else frozenset()
        )
        g = augment_with_ngram(g, NgramPolicy(request.n, stopwords))
    except EngineError as exc:
        raise _bad_request(exc) from exc
    except ValueError as exc:
        raise HTTPException(status_code=400, detail={"message": str(exc)}) from exc
    return GraphResponse(
        players=[occ.instance_id for occ in g.players],
        dropped=[occ.instance_id for occ in dropped],
        edges=serialize_graph(g),
    )


@app.post("/disambiguate", response_model=DisambiguateResponse)
def disambiguate(request: DisambiguateRequest) -> DisambiguateResponse:
    options = _options(request.options)
    resources = ResourceTexts(**request.files.model_dump())
    try:
        result = run_from_texts(resources, options)
    except EngineError as exc:
        raise _bad_request(exc) from exc
    answers = [
        AnswerPayload(
            instance_id=a.player.instance_id, concept=a.concept, probability=a.probability
        )
        for a in result.outcome.assignments
        if a.concept is not None
    ]
    dropped_ids = {occ.instance_id for occ in result.dropped}
    unassigned = [
        a.player.instance_id
        for a in result.outcome.assignments
        if a.concept is None and a.player.instance_id not in dropped_ids
    ]
    return DisambiguateResponse(
        answers=answers,
        answers_text=result.answers_text,
        unassigned=unassigned,
        dropped=sorted(dropped_ids),
        iterations=result.outcome.iterations,
        converged=result.outcome.converged,
        payoff_warnings=result.payoff_warnings,
        report=_report_payload(result.report) if result.report else None,
        report_text=report_text(result.report) if result.report else None,
        report_tsv=report_tsv(result.report) if result.report else None,
        trajectory_text=result.trajectory_text,
    )


@app.post("/score", response_model=ScoreResponse)
def score_answers(request: ScoreRequest) -> ScoreResponse:
    try:
        report = score_answer_files(
            load_answers(request.answers), load_gold(request.gold)
        )
    except EngineError as exc:
        raise _bad_request(exc) from exc
    return ScoreResponse(
        report=_report_payload(report),
        report_text=report_text(report),
        report_tsv=report_tsv(report),
    )


@app.post("/demo/prisoners-dilemma", response_model=DilemmaResponse)
def demo_prisoners_dilemma(request: DilemmaRequest) -> DilemmaResponse:
    try:
        cfg = GameConfig(max_iterations=request.max_iterations, epsilon=request.epsilon)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail={"message": str(exc)}) from exc
    state, graph, z = prisoners_dilemma()
    outcome = run(state, graph, z, cfg, collect_trajectory=True)
    rows = [
        (t, float(m[0, 0]), float(m[0, 1])) for t, m in enumerate(outcome.trajectory)
    ]
    lines = [f"{t}\t{d!r}\t{c!r}" for t, d, c in rows]
    return DilemmaResponse(
        trajectory=rows,
        trajectory_text="\n".join(lines) + "\n",
        iterations=outcome.iterations,
        converged=outcome.converged,
        choice=outcome.assignments[0].concept or "none",
    )
