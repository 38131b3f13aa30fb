"""End-to-end disambiguation pipeline.

From flat input files to per-instance answers: load occurrences, keep the
ones covered by the sense inventory, weight the word graph from corpus
counts, add proximity edges, initialize the strategy rows, build the
payoff matrix, run the dynamics and take each player's best strategy.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from .contingency import Measure, load_counts
from .dynamics import Assignment, GameConfig, GameOutcome, run
from .errors import ConfigError, ParseError
from .evaluate import ScoreReport, load_gold, score_outcome
from .graph import (
    NgramPolicy,
    Occurrence,
    WordGraph,
    augment_with_ngram,
    build_word_graph,
    load_graph,
    load_occurrences,
    load_stopwords,
)
from .payoff import (
    PayoffStore,
    Provider,
    build_payoff_store,
    load_glosses,
    load_precomputed,
    load_relations,
    load_taxonomy,
)
from .senses import (
    SenseInventory,
    StrategyState,
    init_clustered,
    init_geometric,
    init_uniform,
    load_inventory,
    partition_by_inventory,
)

INITS = ("uniform", "geometric", "clustered")


@dataclass(frozen=True)
class PipelineOptions:
    measure: Measure = Measure.MDICE
    provider: Provider = Provider.GLOSS_COSINE_TFIDF
    ngram: int = 5
    init: str = "uniform"
    p: float = 0.4
    jcn_invert: bool = False
    game: GameConfig = field(default_factory=GameConfig)
    collect_trajectory: bool = False

    def __post_init__(self):
        if self.init not in INITS:
            raise ConfigError(f"init must be one of {INITS}, got {self.init!r}")
        if self.ngram < 0:
            raise ConfigError("ngram window must be nonnegative")
        if self.init in ("geometric", "clustered") and not 0.0 < self.p < 1.0:
            raise ConfigError(f"p must lie in (0, 1), got {self.p}")


@dataclass(frozen=True)
class ResourceTexts:
    """Raw contents of the input files; None = file not supplied."""

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


@dataclass
class PipelineResult:
    players: list[Occurrence]  # players that joined the game
    dropped: list[Occurrence]  # occurrences without an inventory entry
    outcome: GameOutcome  # merged over all occurrences, file order
    graph: WordGraph
    state: StrategyState  # final strategy rows of the game players
    payoff_warnings: int
    report: ScoreReport | None
    answers_text: str
    trajectory_text: str | None


def _load_players(
    resources: ResourceTexts,
) -> tuple[list[Occurrence], SenseInventory, list[Occurrence], list[Occurrence]]:
    occurrences = load_occurrences(resources.occurrences)
    if not occurrences:
        raise ConfigError("occurrence file holds no occurrences")
    inventories = load_inventory(resources.inventory, resources.clusters)
    players, dropped = partition_by_inventory(occurrences, inventories)
    if not players:
        raise ConfigError("no occurrence has a sense inventory entry")
    return occurrences, inventories, players, dropped


def _build_graph(
    resources: ResourceTexts, options: PipelineOptions, players: list[Occurrence]
) -> WordGraph:
    if resources.graph is not None:
        return load_graph(resources.graph, players)
    if resources.counts is None or resources.unigrams is None:
        raise ConfigError("either a prebuilt graph or counts + unigrams files are required")
    store = load_counts(resources.counts, resources.unigrams)
    g = build_word_graph(players, store, options.measure)
    stopwords = (
        load_stopwords(resources.stopwords) if resources.stopwords is not None else frozenset()
    )
    return augment_with_ngram(g, NgramPolicy(options.ngram, stopwords))


def build_graph_from_texts(
    resources: ResourceTexts, options: PipelineOptions
) -> tuple[WordGraph, list[Occurrence], list[Occurrence]]:
    """Steps 1-3: players, association weights, proximity augmentation.

    Occurrences without an inventory entry are dropped before the graph is
    built, so emitted edge indices refer to the retained player list.
    """
    _, _, players, dropped = _load_players(resources)
    return _build_graph(resources, options, players), players, dropped


def _init_state(
    inventories: SenseInventory, players: list[Occurrence], options: PipelineOptions
) -> StrategyState:
    if options.init == "uniform":
        return init_uniform(inventories, players)
    if options.init == "geometric":
        return init_geometric(inventories, players, options.p)
    return init_clustered(inventories, players, options.p)


def _build_payoffs(
    concepts: tuple[str, ...], resources: ResourceTexts, options: PipelineOptions
) -> PayoffStore:
    provider = options.provider
    if provider in (Provider.WUP, Provider.JCN):
        if resources.taxonomy is None:
            raise ConfigError(f"provider {provider.value} needs a taxonomy file")
        return build_payoff_store(
            concepts,
            provider,
            taxonomy=load_taxonomy(resources.taxonomy),
            jcn_invert=options.jcn_invert,
        )
    if provider is Provider.PRECOMPUTED:
        if resources.payoffs is None:
            raise ConfigError("provider precomputed needs a payoffs file")
        return build_payoff_store(
            concepts, provider, precomputed=load_precomputed(resources.payoffs)
        )
    if resources.glosses is None:
        raise ConfigError(f"provider {provider.value} needs a glosses file")
    relations = (
        load_relations(resources.relations) if resources.relations is not None else None
    )
    return build_payoff_store(
        concepts, provider, glosses=load_glosses(resources.glosses), relations=relations
    )


def serialize_answers(outcome: GameOutcome) -> str:
    """`instance_id<TAB>concept_id` lines; unassigned instances are omitted."""
    lines = []
    for a in outcome.assignments:
        if a.concept is not None and a.player is not None:
            lines.append(f"{a.player.instance_id}\t{a.concept}")
    return "\n".join(lines) + ("\n" if lines else "")


def serialize_trajectory(
    trajectory, state: StrategyState, players: list[Occurrence]
) -> str:
    """`iteration<TAB>instance_id<TAB>concept<TAB>probability` records.

    One record per support entry per iteration, iteration 0 being the
    initial state; enough to replay how each sense rose or died.
    """
    lines = []
    for t, matrix in enumerate(trajectory):
        for i, occ in enumerate(players):
            for col in state.supports[i]:
                lines.append(
                    f"{t}\t{occ.instance_id}\t{state.concepts[col]}\t{float(matrix[i, col])!r}"
                )
    return "\n".join(lines) + ("\n" if lines else "")


def run_from_texts(resources: ResourceTexts, options: PipelineOptions) -> PipelineResult:
    """Run the whole pipeline over in-memory file contents."""
    occurrences, inventories, players, dropped = _load_players(resources)
    g = _build_graph(resources, options, players)
    state = _init_state(inventories, players, options)
    store = _build_payoffs(state.concepts, resources, options)
    outcome = run(
        state,
        g,
        store.z,
        options.game,
        players=players,
        collect_trajectory=options.collect_trajectory,
    )
    final_state = StrategyState(state.concepts, outcome.final, state.supports)

    trajectory_text = None
    if options.collect_trajectory and outcome.trajectory is not None:
        trajectory_text = serialize_trajectory(outcome.trajectory, state, players)

    by_instance = {a.player.instance_id: a for a in outcome.assignments}
    merged = []
    for occ in occurrences:
        if occ.instance_id in by_instance:
            merged.append(by_instance[occ.instance_id])
        else:
            merged.append(Assignment(occ, None, 0.0, False))
    merged_outcome = GameOutcome(
        merged, outcome.iterations, outcome.converged, outcome.final, outcome.trajectory
    )

    report = None
    if resources.gold is not None:
        report = score_outcome(merged_outcome, load_gold(resources.gold))

    return PipelineResult(
        players=players,
        dropped=dropped,
        outcome=merged_outcome,
        graph=g,
        state=final_state,
        payoff_warnings=store.warnings,
        report=report,
        answers_text=serialize_answers(merged_outcome),
        trajectory_text=trajectory_text,
    )


ROLE_FIELDS = (
    "occurrences",
    "inventory",
    "counts",
    "unigrams",
    "graph",
    "clusters",
    "glosses",
    "relations",
    "taxonomy",
    "payoffs",
    "stopwords",
    "gold",
)


@dataclass(frozen=True)
class PipelineConfig:
    """File-level pipeline configuration; input paths plus output paths."""

    occurrences: Path
    inventory: Path
    counts: Path | None = None
    unigrams: Path | None = None
    graph: Path | None = None
    clusters: Path | None = None
    glosses: Path | None = None
    relations: Path | None = None
    taxonomy: Path | None = None
    payoffs: Path | None = None
    stopwords: Path | None = None
    gold: Path | None = None
    answers_out: Path | None = None
    report_out: Path | None = None
    trajectory_out: Path | None = None
    options: PipelineOptions = field(default_factory=PipelineOptions)


def read_resources(cfg: PipelineConfig) -> ResourceTexts:
    """Read every configured input file, naming missing ones precisely."""
    texts = {}
    for role in ROLE_FIELDS:
        path: Path | None = getattr(cfg, role)
        if path is None:
            texts[role] = None
            continue
        try:
            texts[role] = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {role} file {path}: {exc}") from exc
    if texts["occurrences"] is None or texts["inventory"] is None:
        raise ConfigError("occurrences and inventory files are required")
    return ResourceTexts(**texts)


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    """File-in, file-out pipeline entry point.

    Parse errors are re-raised with the real file path in place of the
    logical role name. Output files are only written once the whole run
    has succeeded, so a failing run leaves no partial output.
    """
    resources = read_resources(cfg)
    trajectory_wanted = cfg.trajectory_out is not None or cfg.options.collect_trajectory
    options = replace(cfg.options, collect_trajectory=trajectory_wanted)
    try:
        result = run_from_texts(resources, options)
    except ParseError as exc:
        path = getattr(cfg, exc.source, None) if exc.source in ROLE_FIELDS else None
        raise ParseError(str(path) if path else exc.source, exc.line, exc.message) from None

    if cfg.answers_out is not None:
        cfg.answers_out.write_text(result.answers_text, encoding="utf-8")
    if cfg.report_out is not None and result.report is not None:
        from .evaluate import report_tsv

        cfg.report_out.write_text(report_tsv(result.report), encoding="utf-8")
    if cfg.trajectory_out is not None and result.trajectory_text is not None:
        cfg.trajectory_out.write_text(result.trajectory_text, encoding="utf-8")
    return result


def parse_flat_config(text: str, source: str = "config") -> dict[str, str]:
    """Parse `key = value` lines; callers resolve path values themselves."""
    values: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(source, line_no, "expected key = value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key:
            raise ParseError(source, line_no, "empty key")
        if key in values:
            raise ParseError(source, line_no, f"duplicate key {key!r}")
        values[key] = value
    return values


PATH_KEYS = ROLE_FIELDS + ("answers", "report", "trajectory")
OPTION_KEYS = (
    "measure",
    "provider",
    "n",
    "init",
    "p",
    "jcn_invert",
    "epsilon",
    "max_iterations",
    "fallback",
    "workers",
)


def config_from_mapping(values: dict[str, str], base_dir: Path) -> PipelineConfig:
    """Build a PipelineConfig from flat key/value strings (file or flags)."""
    unknown = set(values) - set(PATH_KEYS) - set(OPTION_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    def path_of(key: str) -> Path | None:
        if key not in values or not values[key]:
            return None
        p = Path(values[key])
        return p if p.is_absolute() else base_dir / p

    try:
        game = GameConfig(
            max_iterations=int(values.get("max_iterations", 1000)),
            epsilon=float(values.get("epsilon", 1e-6)),
            fallback=values.get("fallback", "none").replace("-", "_"),
            workers=int(values.get("workers", 1)),
        )
        options = PipelineOptions(
            measure=Measure.parse(values.get("measure", "mdice")),
            provider=Provider.parse(values.get("provider", "gloss_cosine_tfidf")),
            ngram=int(values.get("n", 5)),
            init=values.get("init", "uniform"),
            p=float(values.get("p", 0.4)),
            jcn_invert=values.get("jcn_invert", "false").lower() in ("1", "true", "yes"),
            game=game,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    occurrences = path_of("occurrences")
    inventory = path_of("inventory")
    if occurrences is None or inventory is None:
        raise ConfigError("config must set occurrences and inventory")
    return PipelineConfig(
        occurrences=occurrences,
        inventory=inventory,
        counts=path_of("counts"),
        unigrams=path_of("unigrams"),
        graph=path_of("graph"),
        clusters=path_of("clusters"),
        glosses=path_of("glosses"),
        relations=path_of("relations"),
        taxonomy=path_of("taxonomy"),
        payoffs=path_of("payoffs"),
        stopwords=path_of("stopwords"),
        gold=path_of("gold"),
        answers_out=path_of("answers"),
        report_out=path_of("report"),
        trajectory_out=path_of("trajectory"),
        options=options,
    )
