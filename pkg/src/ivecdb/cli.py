"""Command-line interface.

Databases live under a home directory (--home or $IVECDB_HOME, default
./ivecdb_data), one subdirectory per database holding catalog.json and
vector.csv.  Federations are JSON files listing members with catalog and
store paths (relative to the config file).  Exit codes: 0 success, 2 user
error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import algebra as ra
from . import federation as fd
from . import rewriter, schemalog, storage
from .algebra_parser import parse_term
from .errors import (FederationError, HashCollisionError, IvecdbError,
                     StorageError, VectorError)
from .relations import Relation
from .values import Value, infer_value
from .vector import check_canonical, matter, view

USER_ERROR, DATA_ERROR = 2, 3


def _home(args) -> Path:
    if args.home:
        return Path(args.home)
    return Path(os.environ.get("IVECDB_HOME", "ivecdb_data"))


def _print_result(rel: Relation, fmt: str, provenance=None) -> None:
    if fmt == "json":
        print(json.dumps(storage.result_to_json(rel, provenance), indent=2))
    else:
        sys.stdout.write(storage.result_to_csv(rel))


def _load_federation(path: str) -> fd.Federation:
    config_path = Path(path)
    try:
        doc = json.loads(config_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise StorageError(f"no federation config {path}") from None
    except json.JSONDecodeError as exc:
        raise StorageError(f"malformed federation config {path}: {exc}") from None
    members = []
    for m in doc.get("members", []):
        catalog = config_path.parent / m["catalog"]
        store_path = config_path.parent / m["store"]
        schemas, overrides = storage.load_catalog(catalog)
        matching = [s for s in schemas if s.name == m["name"]]
        if not matching:
            raise StorageError(f"{catalog} does not declare database {m['name']!r}")
        schema = matching[0]
        store = storage.load_vector(store_path, m["name"], schema, overrides)
        members.append(fd.Member(schema, store))
    return fd.Federation(members)


def _parse_value(text: str, force_text: bool) -> Value:
    if force_text:
        return Value.text(text)
    if len(text) >= 2 and text[0] == text[-1] == "'":
        return Value.text(text[1:-1])
    return infer_value(text)


def _pairs_relation(specs, rows) -> Relation:
    return Relation(specs, frozenset(rows))


# ---------------------------------------------------------------------------
# Query dispatch
# ---------------------------------------------------------------------------

def run_query(kind: str, query, db=None, fed: fd.Federation | None = None
              ) -> storage.ResultDocument:
    """Route one query to the algebra, metadata, or SchemaLog engine.

    kind "algebra": `query` is a term text, `db` a (schema, store) pair.
    kind "meta":    `query` is "delta" | "rho" | "alpha" | "gamma PATTERN",
                    `fed` the federation (S defaults to the full call level).
    kind "slog":    `query` is (program text, predicate), `fed` the federation.
    """
    if kind == "algebra":
        if db is None:
            raise FederationError("algebra queries need a database")
        schema, store = db
        term = parse_term(query)
        result = rewriter.answer(term, store, schema)
        provenance = rewriter.type_of(term, schema) if rewriter.is_spju(term) else None
        return storage.ResultDocument(result, provenance)
    if kind == "meta":
        if fed is None:
            raise FederationError("meta queries need a federation")
        op, _, rest = query.partition(" ")
        if op == "delta":
            return storage.ResultDocument(fd.era_delta(fed))
        if op == "rho":
            return storage.ResultDocument(fd.era_rho(fed, fed.call_level(1)))
        if op == "alpha":
            return storage.ResultDocument(fd.era_alpha(fed, fed.call_level(2)))
        if op == "gamma":
            pattern = fd.parse_pattern(rest)
            return storage.ResultDocument(fd.era_gamma(fed, pattern, fed.call_level(2)))
        raise FederationError(f"unknown meta operator {op!r}")
    if kind == "slog":
        if fed is None:
            raise FederationError("SchemaLog queries need a federation")
        program_text, predicate = query
        rules = schemalog.parse_program(program_text)
        return storage.ResultDocument(schemalog.eval_program(rules, fed, predicate))
    raise FederationError(f"unknown query kind {kind!r}")


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def cmd_ingest(args) -> int:
    data = {}
    for item in args.data:
        if "=" not in item:
            raise StorageError(f"--data takes relation=path, got {item!r}")
        rel, path = item.split("=", 1)
        data[rel] = Path(path)
    schema, store, report = storage.ingest(Path(args.catalog), args.db, data, _home(args))
    print(f"ingested {args.db}: {len(store)} quadruples "
          f"({report.duplicate_rows} duplicate row(s) collapsed)")
    print(f"wrote {report.files['catalog']}")
    print(f"wrote {report.files['store']}")
    return 0


def cmd_matter(args) -> int:
    schema, store = storage.load_database(_home(args), args.db)
    sig = schema.get(args.relation)
    _print_result(matter(sig, store), args.format)
    return 0


def cmd_view(args) -> int:
    schema, store = storage.load_database(_home(args), args.db)
    pairs = []
    for chunk in args.columns.split(","):
        chunk = chunk.strip()
        if "." not in chunk:
            raise FederationError(f"--columns takes relation.column items, got {chunk!r}")
        rel, col = chunk.rsplit(".", 1)
        pairs.append((rel, col))
    _print_result(view(tuple(pairs), store, schema), args.format, tuple(pairs))
    return 0


def cmd_query(args) -> int:
    schema, store = storage.load_database(_home(args), args.db)
    term = parse_term(args.term)
    if args.explain:
        print(ra.render_term(rewriter.rewrite(term, schema)), file=sys.stderr)
    result = rewriter.answer(term, store, schema)
    provenance = None
    if rewriter.is_spju(term):
        provenance = rewriter.type_of(term, schema)
    _print_result(result, args.format, provenance)
    return 0


def cmd_rewrite(args) -> int:
    schema, _store = storage.load_database(_home(args), args.db)
    term = parse_term(args.term)
    print(ra.render_term(rewriter.rewrite(term, schema)))
    return 0


def _meta_s(args, fed: fd.Federation, source) -> Relation:
    if getattr(args, "rels", None):
        rows = []
        for chunk in args.rels.split(","):
            if "." not in chunk:
                raise FederationError(f"--rels takes db.relation items, got {chunk!r}")
            db, rel = chunk.strip().rsplit(".", 1)
            rows.append((Value.text(db), Value.text(rel)))
        return _pairs_relation(fd.CALL4_HEADER[:2], rows)
    return fed.call_level(2, source)


def cmd_meta(args) -> int:
    fed_ = _load_federation(args.fed)
    source = "catalog" if args.from_catalog else "data"
    if args.op == "delta":
        _print_result(fd.era_delta(fed_, source), args.format)
        return 0
    if args.op == "rho":
        if args.dbs:
            rows = [(Value.text(n.strip()),) for n in args.dbs.split(",")]
            s = _pairs_relation(fd.CALL4_HEADER[:1], rows)
        else:
            s = fed_.call_level(1, source)
        _print_result(fd.era_rho(fed_, s, source), args.format)
        return 0
    if args.op == "alpha":
        s = _meta_s(args, fed_, source)
        _print_result(fd.era_alpha(fed_, s, source), args.format)
        return 0
    if args.op == "gamma":
        if args.pattern is None:
            raise FederationError("meta gamma requires --pattern")
        pattern = fd.parse_pattern(args.pattern)
        s = _meta_s(args, fed_, source)
        if args.explain:
            print(ra.render_term(fd.gamma_term(fed_, pattern, s)), file=sys.stderr)
        _print_result(fd.era_gamma(fed_, pattern, s), args.format)
        return 0
    raise FederationError(f"unknown meta operator {args.op!r}")


def cmd_find_token(args) -> int:
    fed_ = _load_federation(args.fed)
    _print_result(fd.find_token(fed_, _parse_value(args.value, args.text)), args.format)
    return 0


def cmd_njoin(args) -> int:
    fed_ = _load_federation(args.fed)
    _print_result(fd.natural_join_unknown(fed_, args.db, args.r, args.s), args.format)
    return 0


def cmd_slog_run(args) -> int:
    fed_ = _load_federation(args.fed)
    program = Path(args.program).read_text(encoding="utf-8")
    rules = schemalog.parse_program(program)
    compiled = schemalog.compile_rules(rules, fed_)
    if args.query not in compiled:
        raise FederationError(f"no rules define predicate {args.query!r}")
    if args.explain:
        print(ra.render_term(compiled[args.query]), file=sys.stderr)
    result = ra.eval_term(compiled[args.query], fed_.instance())
    _print_result(result, args.format)
    return 0


def cmd_fed_check(args) -> int:
    fed_ = _load_federation(args.fed)
    failures = 0
    for member in fed_.members:
        instance = {sig.name: matter(sig, member.store)
                    for sig in member.schema.relations}
        ok = check_canonical(member.schema, member.store, instance)
        print(f"{member.name}: {'ok' if ok else 'FAILED'}")
        if not ok:
            failures += 1
    if failures:
        raise VectorError(f"{failures} member store(s) failed the canonical-model check")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ivecdb",
        description="Vector-relational database engine with federated metadata querying.")
    parser.add_argument("--home", help="store directory (default $IVECDB_HOME or ./ivecdb_data)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("ingest", help="shred data files into a vector store")
    p.add_argument("--catalog", required=True)
    p.add_argument("--db", required=True)
    p.add_argument("--data", nargs="*", default=[], metavar="REL=CSV")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("matter", help="materialize one relation from the store")
    p.add_argument("--db", required=True)
    p.add_argument("relation")
    add_format(p)
    p.set_defaults(fn=cmd_matter)

    p = sub.add_parser("view", help="materialize a typed view from the store")
    p.add_argument("--db", required=True)
    p.add_argument("--columns", required=True, metavar="rel.col,rel.col,...")
    add_format(p)
    p.set_defaults(fn=cmd_view)

    p = sub.add_parser("query", help="answer an algebra term via rewriting")
    p.add_argument("--db", required=True)
    p.add_argument("--explain", action="store_true",
                   help="print the rewritten term on stderr")
    p.add_argument("term")
    add_format(p)
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("rewrite", help="print the vector-relation rewriting of a term")
    p.add_argument("--db", required=True)
    p.add_argument("term")
    p.set_defaults(fn=cmd_rewrite)

    p = sub.add_parser("meta", help="federation metadata operators")
    p.add_argument("op", choices=("delta", "rho", "alpha", "gamma"))
    p.add_argument("--fed", required=True)
    p.add_argument("--dbs", help="restrict rho to these database names")
    p.add_argument("--rels", help="restrict alpha/gamma to these db.relation pairs")
    p.add_argument("--pattern", help="gamma pattern, e.g. \"_->Secretary,_->_\"")
    p.add_argument("--from-catalog", action="store_true",
                   help="derive call relations from catalogs instead of data")
    p.add_argument("--explain", action="store_true")
    add_format(p)
    p.set_defaults(fn=cmd_meta)

    p = sub.add_parser("find-token", help="find relations containing a value")
    p.add_argument("--fed", required=True)
    p.add_argument("--text", action="store_true", help="treat the value as text")
    p.add_argument("value")
    add_format(p)
    p.set_defaults(fn=cmd_find_token)

    p = sub.add_parser("njoin", help="natural join of two relations of unknown schema")
    p.add_argument("--fed", required=True)
    p.add_argument("--db", required=True)
    p.add_argument("r")
    p.add_argument("s")
    add_format(p)
    p.set_defaults(fn=cmd_njoin)

    p = sub.add_parser("slog", help="SchemaLog front end")
    slog_sub = p.add_subparsers(dest="slog_command", required=True)
    q = slog_sub.add_parser("run", help="compile and run a program")
    q.add_argument("program")
    q.add_argument("--query", required=True, help="predicate to output")
    q.add_argument("--fed", required=True)
    q.add_argument("--explain", action="store_true",
                   help="print the compiled term on stderr")
    add_format(q)
    q.set_defaults(fn=cmd_slog_run)

    p = sub.add_parser("fed", help="federation maintenance")
    fed_sub = p.add_subparsers(dest="fed_command", required=True)
    c = fed_sub.add_parser("check", help="canonical-model check of every member store")
    c.add_argument("--fed", required=True)
    c.set_defaults(fn=cmd_fed_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (VectorError, HashCollisionError, StorageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except IvecdbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USER_ERROR


if __name__ == "__main__":
    sys.exit(main())
