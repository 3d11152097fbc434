"""Operator command line: serve, validate, export, import, minute.

Exit codes: 0 success, 1 domain failure (invalid entries, unknown ids,
hash mismatches), 2 environment failure (unreadable files, bad config,
unbindable address).
"""

from __future__ import annotations

import json
import socket
import sys
from pathlib import Path

import click

from . import codec, minutes
from .acts import validate_act
from .errors import ReviewError, SchemaUnsupported
from .sessions import SessionManager
from .store import Query, Store


@click.group()
def main():
    """Collaborative annotation of 3D design models."""


@main.command()
@click.option("--data-dir", required=True, type=click.Path(), envvar="MESHREVIEW_DATA_DIR",
              help="Store directory.")
@click.option("--listen", default="127.0.0.1:8787", show_default=True,
              envvar="MESHREVIEW_LISTEN", help="host:port to bind.")
@click.option("--tokens", "token_file", required=True, type=click.Path(),
              envvar="MESHREVIEW_TOKENS", help="Token registry JSON.")
@click.option("--orphan-threshold", default=0.05, show_default=True, type=float,
              envvar="MESHREVIEW_ORPHAN_THRESHOLD",
              help="Anchor drift fraction of the bounding-box diagonal beyond which remaps orphan.")
def serve(data_dir, listen, token_file, orphan_threshold):
    """Run the review service until interrupted."""
    import uvicorn

    from .service import build_app, load_tokens

    try:
        tokens = load_tokens(token_file)
    except (OSError, ValueError, KeyError) as exc:
        click.echo(f"error: cannot load token file: {exc}", err=True)
        sys.exit(2)
    try:
        host, port = _split_listen(listen)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)

    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((host, port))
        sock.listen(128)
    except OSError as exc:
        sock.close()
        click.echo(f"error: cannot bind {listen}: {exc}", err=True)
        sys.exit(2)

    try:
        store = Store(data_dir=data_dir, orphan_threshold=orphan_threshold)
    except (OSError, ValueError) as exc:
        sock.close()
        click.echo(f"error: cannot open data dir {data_dir}: {exc}", err=True)
        sys.exit(2)
    sessions = SessionManager(store, data_dir=data_dir)
    app = build_app(store, sessions, tokens)

    config = uvicorn.Config(app, log_level="warning")
    server = uvicorn.Server(config)
    click.echo(f"meshreview serving on {host}:{port}, data in {data_dir}")
    try:
        server.run(sockets=[sock])
    finally:
        store.close()


@main.command()
@click.argument("set_file", type=click.Path())
def validate(set_file):
    """Check every annotation in a set file against the act grammar."""
    try:
        data = Path(set_file).read_bytes()
        payload = json.loads(data.decode("utf-8"))
        if not isinstance(payload, dict) or "annotations" not in payload:
            raise ValueError("not an annotation set")
    except (OSError, ValueError) as exc:
        click.echo(f"error: cannot read set file: {exc}", err=True)
        sys.exit(2)

    kinds = {}
    for entry in payload["annotations"]:
        try:
            kinds[entry["id"]] = codec.force_from_json(entry["force"]).kind
        except (KeyError, TypeError, ValueError):
            continue

    ok = invalid = 0
    for entry in payload["annotations"]:
        ann_id = entry.get("id", "?")
        codes = _entry_violations(entry, kinds)
        if codes:
            invalid += 1
            click.echo(f"{ann_id} {','.join(codes)}")
        else:
            ok += 1
            click.echo(f"{ann_id} OK")
    click.echo(f"{ok} ok, {invalid} invalid")
    sys.exit(1 if invalid else 0)


def _entry_violations(entry: dict, kinds: dict) -> list[str]:
    from .acts import ContentKind, ForceKind, RefKind, Utterance

    try:
        force = codec.force_from_json(entry["force"])
        utterance = Utterance(
            text=str(entry["utterance"]["text"]),
            content_kind=ContentKind(entry["utterance"]["content_kind"]),
        )
        refs = [
            (kinds.get(r["target"], ForceKind.PROPOSITION), RefKind(r["kind"]))
            for r in entry.get("references", [])
        ]
    except (KeyError, TypeError, ValueError, IndexError):
        return ["MALFORMED"]
    return list(validate_act(force, utterance, refs).violations)


@main.command("export")
@click.argument("document_id")
@click.option("--data-dir", required=True, type=click.Path(exists=True))
@click.option("--out", "out_file", required=True, type=click.Path())
def export_cmd(document_id, data_dir, out_file):
    """Write a document's annotation set to a file."""
    store = Store(data_dir=data_dir)
    try:
        payload = store.export_set(document_id)
    except ReviewError as exc:
        click.echo(f"error: {exc.code}: {exc}", err=True)
        sys.exit(1)
    finally:
        store.close()
    Path(out_file).write_bytes(payload)
    click.echo(f"exported {document_id} to {out_file}")


@main.command("import")
@click.argument("set_file", type=click.Path())
@click.option("--data-dir", required=True, type=click.Path())
def import_cmd(set_file, data_dir):
    """Import an annotation set file into the store."""
    try:
        data = Path(set_file).read_bytes()
    except OSError as exc:
        click.echo(f"error: cannot read set file: {exc}", err=True)
        sys.exit(2)
    store = Store(data_dir=data_dir)
    try:
        imported, skipped = store.import_set(data)
    except SchemaUnsupported as exc:
        click.echo(f"error: {exc.code}: {exc}", err=True)
        sys.exit(2)
    except ReviewError as exc:
        click.echo(f"error: {exc.code}: {exc}", err=True)
        sys.exit(1)
    finally:
        store.close()
    for ann_id, reason in skipped:
        click.echo(f"skipped {ann_id}: {reason}")
    click.echo(f"imported {imported}, skipped {len(skipped)}")


@main.command()
@click.argument("document_id")
@click.option("--data-dir", required=True, type=click.Path(exists=True))
@click.option("--revision", default=None, type=int, help="Defaults to the latest revision.")
@click.option("--format", "fmt", default="json", type=click.Choice(["json", "html"]), show_default=True)
@click.option("--out", "out_file", required=True, type=click.Path())
def minute(document_id, data_dir, revision, fmt, out_file):
    """Compile an ad-hoc design minute for a document."""
    store = Store(data_dir=data_dir)
    try:
        compiled = minutes.generate_minute(store, document=document_id, revision=revision, query=Query())
    except ReviewError as exc:
        click.echo(f"error: {exc.code}: {exc}", err=True)
        sys.exit(1)
    finally:
        store.close()
    Path(out_file).write_bytes(minutes.render_minute(compiled, fmt))
    click.echo(f"wrote {fmt} minute for {document_id} to {out_file}")


def _split_listen(listen: str) -> tuple[str, int]:
    host, _, port = listen.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"listen address must be host:port, got {listen!r}")
    return host, int(port)


if __name__ == "__main__":
    main()
