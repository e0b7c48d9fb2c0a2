"""Command-line interface: ingest models, ask questions, serve the API."""

import json
import os
import sys
from pathlib import Path

import click

from . import graph as graphmod
from .dictionary import Dictionary
from .errors import AskbimError, ConceptNotFoundError
from .express import parse_express
from .pipeline import Engine, PipelineError, default_schema_text, ingest

HISTORY_FILE = ".askbim_history"


@click.group()
def main():
    """Natural-language queries over IFC building models."""


@main.command("ingest")
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--schema", "schema_path", type=click.Path(exists=True, dir_okay=False),
              help="EXPRESS schema subset (defaults to the bundled one).")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False),
              help="Model directory to create.")
@click.option("--partitions", default=3, show_default=True,
              help="Simulated shard count.")
@click.option("--force", is_flag=True, help="Overwrite an existing model directory.")
def cli_ingest(model_file, schema_path, out_dir, partitions, force):
    """Parse MODEL_FILE, classify and serialize it into --out."""
    out = Path(out_dir)
    if (out / "manifest.json").exists() and not force:
        raise click.ClickException(
            f"{out_dir} already holds a model; pass --force to re-ingest")
    try:
        model = ingest(model_file, out_dir, schema_path, partition_count=partitions)
    except AskbimError as exc:
        raise click.ClickException(f"[{exc.stage}] {exc}")
    click.echo(f"ingested {model_file} -> {out_dir}")
    for name, count in model.census().items():
        click.echo(f"  {name}: {count}")
    click.echo(f"  blobs: {len(model.blobs)}")


@main.command("query")
@click.argument("model_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("text")
@click.option("--plan-only", is_flag=True, help="Stop after planning.")
@click.option("--format", "fmt", type=click.Choice(["text", "structured"]),
              default="text", show_default=True)
@click.option("--prejoin/--no-prejoin", default=False, show_default=True,
              help="Materialize pre-joined collections before executing.")
def cli_query(model_dir, text, plan_only, fmt, prejoin):
    """Run one natural-language query against an ingested model."""
    engine = Engine.open(model_dir)
    try:
        response = engine.query(text, use_prejoin=prejoin, plan_only=plan_only)
    except PipelineError as exc:
        click.echo(f"error [{exc.stage}]: {exc}", err=True)
        for s in exc.suggestions:
            click.echo(f"  did you mean: {s}", err=True)
        sys.exit(1)
    if fmt == "structured":
        click.echo(response.dumps(), nl=False)
        return
    for warning in response.warnings:
        click.echo(f"note: {warning}", err=True)
    if plan_only:
        click.echo(json.dumps(response.plan, indent=2, sort_keys=True))
    else:
        click.echo(engine.render(response), nl=False)


@main.command("repl")
@click.argument("model_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--prejoin/--no-prejoin", default=False, show_default=True)
def cli_repl(model_dir, prejoin):
    """Interactive query loop; history goes to .askbim_history."""
    engine = Engine.open(model_dir)
    history = Path(HISTORY_FILE)
    click.echo(f"model {engine.model.name}; empty line quits")
    while True:
        try:
            line = input("? ").strip()
        except (EOFError, KeyboardInterrupt):
            break
        if not line:
            break
        with history.open("a", encoding="utf-8") as fh:
            fh.write(line + "\n")
        try:
            response = engine.query(line, use_prejoin=prejoin)
        except PipelineError as exc:
            click.echo(f"error [{exc.stage}]: {exc}")
            for s in exc.suggestions:
                click.echo(f"  did you mean: {s}")
            continue
        click.echo(engine.render(response), nl=False)


@main.command("serve")
@click.argument("model_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--bind", default=None,
              help="host:port (default ASKBIM_BIND or 127.0.0.1:8008).")
@click.option("--static", "static_dir", type=click.Path(file_okay=False),
              default=None, help="Directory with the web console build.")
def cli_serve(model_dir, bind, static_dir):
    """Serve the HTTP API for one ingested model."""
    from .service import serve

    bind = bind or os.environ.get("ASKBIM_BIND", "127.0.0.1:8008")
    host, _, port = bind.rpartition(":")
    engine = Engine.open(model_dir)
    click.echo(f"serving {engine.model.name} on http://{host}:{port}")
    serve(engine, host=host or "127.0.0.1", port=int(port), static_dir=static_dir)


@main.command("export-graph")
@click.option("--schema", "schema_path", type=click.Path(exists=True, dir_okay=False),
              help="EXPRESS schema subset (defaults to the bundled one).")
@click.option("-o", "--out", "out_path", type=click.Path(dir_okay=False),
              default="-", help="Output file (default stdout).")
def cli_export_graph(schema_path, out_path):
    """Convert an EXPRESS schema into its xgml graph."""
    text = (Path(schema_path).read_text(encoding="utf-8")
            if schema_path else default_schema_text())
    xgml = graphmod.export_xgml(graphmod.build_graph(parse_express(text)))
    if out_path == "-":
        click.echo(xgml, nl=False)
    else:
        Path(out_path).write_text(xgml, encoding="utf-8")
        click.echo(f"wrote {out_path}")


@main.command("resolve")
@click.argument("word")
def cli_resolve(word):
    """Look a word up in the concept dictionary."""
    dictionary = Dictionary.load_seed()
    try:
        concept = dictionary.resolve_concept(word)
    except ConceptNotFoundError as exc:
        click.echo(f"error [map]: {exc}", err=True)
        sys.exit(1)
    click.echo(json.dumps({"word": word,
                           "normalized": dictionary.normalize(word),
                           "concept": concept.to_json()},
                          indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
