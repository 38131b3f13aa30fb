"""Command-line client.

Every subcommand is a thin wrapper around the HTTP service: it reads the
referenced files, posts their contents, and writes whatever comes back.
By default the service runs in-process, so no server is needed for batch
work; --server targets a remote instance instead.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import __version__
from .pipeline import ROLE_FIELDS as FILE_ROLES


class ServiceClient:
    """Minimal POST/GET wrapper over in-process or remote transport."""

    def __init__(self, server: str | None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=None)
        else:
            import warnings

            with warnings.catch_warnings():
                # this environment's starlette wants httpx2, which is not
                # published yet; the httpx-backed client works fine
                warnings.filterwarnings("ignore", message=".*httpx2.*")
                from fastapi.testclient import TestClient

            from .service.app import app

            self._client = TestClient(app)

    def post(self, path: str, payload: dict) -> dict:
        response = self._client.post(path, json=payload)
        if response.status_code != 200:
            raise ServiceError(response)
        return response.json()


class ServiceError(Exception):
    def __init__(self, response):
        self.status_code = response.status_code
        try:
            self.detail = response.json().get("detail")
        except Exception:
            self.detail = response.text
        super().__init__(str(self.detail))


def _fail_from_service(err: ServiceError, paths: dict[str, Path | None]) -> None:
    """Turn a service error into a message naming the real file and line."""
    detail = err.detail
    if isinstance(detail, dict) and detail.get("source"):
        source = detail["source"]
        path = paths.get(source)
        where = str(path) if path is not None else source
        line = detail.get("line")
        location = f"{where}, line {line}" if line else where
        raise click.ClickException(f"{location}: {detail.get('message')}")
    if isinstance(detail, dict) and "message" in detail:
        raise click.ClickException(str(detail["message"]))
    raise click.ClickException(str(detail))


def _read(path: Path | None, role: str) -> str | None:
    if path is None:
        return None
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise click.ClickException(f"cannot read {role} file {path}: {exc}") from exc


def _write_or_print(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


@click.group()
@click.version_option(__version__, prog_name="senseflow")
@click.option(
    "--server",
    default=None,
    envvar="SENSEFLOW_SERVER",
    metavar="URL",
    help="Base URL of a running service; default runs the service in-process.",
)
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Label word occurrences with senses by playing games on a word graph."""
    ctx.obj = ServiceClient(server)


@main.command()
@click.option("--measure", default="dice", show_default=True)
@click.option(
    "--table",
    "tables",
    multiple=True,
    metavar="O11,R1,C1,N",
    help="Score a raw contingency table; repeatable.",
)
@click.option("--counts", type=click.Path(path_type=Path), default=None)
@click.option("--unigrams", type=click.Path(path_type=Path), default=None)
@click.argument("words", nargs=-1)
@click.pass_obj
def assoc(client: ServiceClient, measure, tables, counts, unigrams, words):
    """Score word pairs (or raw tables) with an association measure.

    WORDS are word pairs, two at a time, looked up in the counts files.
    """
    if len(words) % 2 != 0:
        raise click.UsageError("word pairs must come two at a time")
    parsed_tables = []
    for raw in tables:
        parts = raw.split(",")
        if len(parts) != 4:
            raise click.UsageError(f"--table wants O11,R1,C1,N, got {raw!r}")
        try:
            o11, r1, c1, n = (int(p) for p in parts)
        except ValueError:
            raise click.UsageError(f"--table wants integers, got {raw!r}") from None
        parsed_tables.append({"o11": o11, "r1": r1, "c1": c1, "n": n})
    pairs = [[words[i], words[i + 1]] for i in range(0, len(words), 2)]
    paths = {"counts": counts, "unigrams": unigrams}
    payload = {
        "measure": measure,
        "tables": parsed_tables,
        "pairs": pairs,
        "counts": _read(counts, "counts"),
        "unigrams": _read(unigrams, "unigrams"),
    }
    try:
        result = client.post("/associate", payload)
    except ServiceError as err:
        _fail_from_service(err, paths)
    for value in result["table_scores"]:
        click.echo("undefined" if value is None else repr(value))
    for (a, b), value in zip(pairs, result["pair_scores"]):
        click.echo(f"{a}\t{b}\t{'undefined' if value is None else repr(value)}")


@main.command("build-graph")
@click.option("--occurrences", type=click.Path(path_type=Path), required=True)
@click.option("--counts", type=click.Path(path_type=Path), required=True)
@click.option("--unigrams", type=click.Path(path_type=Path), required=True)
@click.option("--inventory", type=click.Path(path_type=Path), default=None,
              help="Filter players to inventory coverage, like disambiguate does.")
@click.option("--stopwords", type=click.Path(path_type=Path), default=None)
@click.option("--measure", default="mdice", show_default=True)
@click.option("-n", "--ngram", default=5, show_default=True)
@click.option("-o", "--output", type=click.Path(path_type=Path), default=None)
@click.pass_obj
def build_graph(client, occurrences, counts, unigrams, inventory, stopwords, measure, ngram, output):
    """Build the weighted word graph and emit its edges."""
    paths = {
        "occurrences": occurrences,
        "counts": counts,
        "unigrams": unigrams,
        "inventory": inventory,
        "stopwords": stopwords,
    }
    payload = {
        "occurrences": _read(occurrences, "occurrences"),
        "counts": _read(counts, "counts"),
        "unigrams": _read(unigrams, "unigrams"),
        "inventory": _read(inventory, "inventory"),
        "stopwords": _read(stopwords, "stopwords"),
        "measure": measure,
        "n": ngram,
    }
    try:
        result = client.post("/graph", payload)
    except ServiceError as err:
        _fail_from_service(err, paths)
    _write_or_print(result["edges"], output)


@main.command()
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None,
              help="Flat key = value file; flags override its entries.")
@click.option("--occurrences", type=click.Path(path_type=Path), default=None)
@click.option("--inventory", type=click.Path(path_type=Path), default=None)
@click.option("--counts", type=click.Path(path_type=Path), default=None)
@click.option("--unigrams", type=click.Path(path_type=Path), default=None)
@click.option("--graph", type=click.Path(path_type=Path), default=None,
              help="Prebuilt edge file; skips graph construction.")
@click.option("--clusters", type=click.Path(path_type=Path), default=None)
@click.option("--glosses", type=click.Path(path_type=Path), default=None)
@click.option("--relations", type=click.Path(path_type=Path), default=None)
@click.option("--taxonomy", type=click.Path(path_type=Path), default=None)
@click.option("--payoffs", type=click.Path(path_type=Path), default=None)
@click.option("--stopwords", type=click.Path(path_type=Path), default=None)
@click.option("--gold", type=click.Path(path_type=Path), default=None)
@click.option("--measure", default=None)
@click.option("--provider", default=None)
@click.option("-n", "--ngram", type=int, default=None)
@click.option("--init", default=None, type=click.Choice(["uniform", "geometric", "clustered"]))
@click.option("-p", "--geometric-p", type=float, default=None)
@click.option("--jcn-invert", is_flag=True, default=False)
@click.option("--epsilon", type=float, default=None)
@click.option("--max-iterations", type=int, default=None)
@click.option("--fallback", default=None, type=click.Choice(["none", "first-sense"]))
@click.option("--workers", type=int, default=None)
@click.option("--answers", "answers_out", type=click.Path(path_type=Path), default=None,
              help="Answers output file; default prints to stdout.")
@click.option("--report", "report_out", type=click.Path(path_type=Path), default=None)
@click.option("--trajectory", "trajectory_out", type=click.Path(path_type=Path), default=None)
@click.pass_obj
def disambiguate(client, config_path, measure, provider, ngram, init, geometric_p,
                 jcn_invert, epsilon, max_iterations, fallback, workers,
                 answers_out, report_out, trajectory_out, **file_flags):
    """Run the full pipeline: files in, answers (and report) out."""
    from .pipeline import OPTION_KEYS, PATH_KEYS

    settings: dict[str, str] = {}
    base = Path.cwd()
    if config_path is not None:
        from .errors import ParseError
        from .pipeline import parse_flat_config

        try:
            settings = parse_flat_config(_read(config_path, "config"), str(config_path))
        except ParseError as exc:
            raise click.ClickException(str(exc)) from None
        unknown = set(settings) - set(PATH_KEYS) - set(OPTION_KEYS)
        if unknown:
            raise click.ClickException(
                f"{config_path}: unknown keys: {', '.join(sorted(unknown))}"
            )

    def settled_path(key: str, flag: Path | None) -> Path | None:
        if flag is not None:
            return flag if flag.is_absolute() else base / flag
        if settings.get(key):
            p = Path(settings[key])
            return p if p.is_absolute() else config_path.parent / p
        return None

    paths: dict[str, Path | None] = {
        role: settled_path(role, file_flags.get(role)) for role in FILE_ROLES
    }
    answers_out = settled_path("answers", answers_out)
    report_out = settled_path("report", report_out)
    trajectory_out = settled_path("trajectory", trajectory_out)

    option_values = {
        "measure": measure,
        "provider": provider,
        "n": ngram,
        "init": init,
        "p": geometric_p,
        "jcn_invert": jcn_invert or None,
        "epsilon": epsilon,
        "max_iterations": max_iterations,
        "fallback": fallback,
        "workers": workers,
    }
    defaults = {
        "measure": "mdice",
        "provider": "gloss_cosine_tfidf",
        "n": 5,
        "init": "uniform",
        "p": 0.4,
        "jcn_invert": False,
        "epsilon": 1e-6,
        "max_iterations": 1000,
        "fallback": "none",
        "workers": 1,
    }
    options = {}
    for key, default in defaults.items():
        if option_values[key] is not None:
            options[key] = option_values[key]
        elif key in settings:
            options[key] = settings[key]
        else:
            options[key] = default

    if paths["occurrences"] is None or paths["inventory"] is None:
        raise click.ClickException("occurrences and inventory files are required")

    files = {role: _read(paths[role], role) for role in FILE_ROLES}
    payload = {
        "files": files,
        "options": {
            "measure": str(options["measure"]),
            "provider": str(options["provider"]),
            "n": int(options["n"]),
            "init": str(options["init"]),
            "p": float(options["p"]),
            "jcn_invert": str(options["jcn_invert"]).lower() in ("1", "true", "yes"),
            "epsilon": float(options["epsilon"]),
            "max_iterations": int(options["max_iterations"]),
            "fallback": str(options["fallback"]).replace("-", "_"),
            "workers": int(options["workers"]),
            "trajectory": trajectory_out is not None,
        },
    }
    try:
        result = client.post("/disambiguate", payload)
    except ServiceError as err:
        _fail_from_service(err, paths)

    _write_or_print(result["answers_text"], answers_out)
    if trajectory_out is not None and result["trajectory_text"] is not None:
        trajectory_out.write_text(result["trajectory_text"], encoding="utf-8")
    if report_out is not None and result["report_tsv"] is not None:
        report_out.write_text(result["report_tsv"], encoding="utf-8")
    if result["report_text"] is not None:
        click.echo(result["report_text"], nl=False)
    for instance_id in result["dropped"]:
        click.echo(f"dropped (no inventory): {instance_id}", err=True)
    for instance_id in result["unassigned"]:
        click.echo(f"unassigned: {instance_id}", err=True)


@main.command()
@click.option("--answers", type=click.Path(path_type=Path), required=True)
@click.option("--gold", type=click.Path(path_type=Path), required=True)
@click.pass_obj
def score(client, answers, gold):
    """Score an answers file against a gold file."""
    paths = {"answers": answers, "gold": gold}
    payload = {"answers": _read(answers, "answers"), "gold": _read(gold, "gold")}
    try:
        result = client.post("/score", payload)
    except ServiceError as err:
        _fail_from_service(err, paths)
    click.echo(result["report_tsv"], nl=False)


@main.command("demo-pd")
@click.option("--max-iterations", default=200, show_default=True)
@click.option("--epsilon", type=float, default=1e-6, show_default=True)
@click.option("--trajectory", "trajectory_out", type=click.Path(path_type=Path), default=None)
@click.pass_obj
def demo_pd(client, max_iterations, epsilon, trajectory_out):
    """Replay the repeated prisoner's dilemma from a fifty-fifty start.

    Payoffs in this demonstration are negative; the multiplicative update
    is applied to them verbatim, which reproduces the classic numbers but
    differs from the sign-corrected continuous-time dynamics.
    """
    try:
        result = client.post(
            "/demo/prisoners-dilemma",
            {"max_iterations": max_iterations, "epsilon": epsilon},
        )
    except ServiceError as err:
        _fail_from_service(err, {})
    click.echo("step\tdefect\tcooperate")
    for t, defect, cooperate in result["trajectory"]:
        click.echo(f"{t}\t{defect:.6f}\t{cooperate:.6f}")
    click.echo(f"converged: {result['converged']} after {result['iterations']} steps")
    click.echo(f"winning strategy: {result['choice']}")
    if trajectory_out is not None:
        trajectory_out.write_text(result["trajectory_text"], encoding="utf-8")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("senseflow.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
