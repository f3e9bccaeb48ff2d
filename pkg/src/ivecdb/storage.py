"""On-disk formats: catalog JSON, vector-store CSV, data ingestion, results.

The vector store is a UTF-8 CSV with header ``r-name,t-index,a-name,value``
(RFC 4180 quoting, LF line ends), rows sorted lexicographically by all
four rendered fields so stores are diffable and save/load/save is
byte-identical.  NULL never appears in a store.  In data files an empty
field is NULL.  A raw field is typed as a number exactly when it is in
canonical decimal form ("35,000" and "007" stay text); a per-column
``type`` entry in the catalog overrides the inference either way.
Empty-string text values are not representable in CSV fields and are
rejected at ingestion.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .errors import StorageError, VectorError
from .relations import ColumnSpec, Relation, RelationSignature, Schema
from .values import NULL_VALUE, Value, infer_value
from .vector import A_NAME, R_NAME, T_INDEX, VALUE, VectorRelation, VectorTuple, parse_instance

logger = logging.getLogger(__name__)

VECTOR_FIELDS = (R_NAME, T_INDEX, A_NAME, VALUE)

TypeOverrides = dict[tuple[str, str], str]  # (relation, column) -> "text" | "number"


# ---------------------------------------------------------------------------
# Catalog documents
# ---------------------------------------------------------------------------

def catalog_to_json(schemas: list[Schema], overrides: TypeOverrides | None = None) -> dict:
    overrides = overrides or {}
    databases = []
    for schema in schemas:
        relations = []
        for sig in schema.relations:
            columns = []
            for c in sig.columns:
                entry: dict = {"column_name": c.name, "attribute": c.attribute}
                kind = overrides.get((sig.name, c.name))
                if kind:
                    entry["type"] = kind
                columns.append(entry)
            relations.append({
                "name": sig.name,
                "columns": columns,
                "primary_key": [sig.columns[i].name for i in sig.primary_key],
                "not_null": sorted(sig.columns[i].name for i in sig.not_null),
            })
        databases.append({"name": schema.name, "relations": relations})
    return {"databases": databases}


def catalog_from_json(doc: dict) -> tuple[list[Schema], TypeOverrides]:
    if not isinstance(doc, dict) or "databases" not in doc:
        raise StorageError("catalog document must have a 'databases' list")
    schemas = []
    overrides: TypeOverrides = {}
    for db in doc["databases"]:
        sigs = []
        for rel in db.get("relations", []):
            cols = []
            for c in rel["columns"]:
                cols.append(ColumnSpec(c["column_name"], c.get("attribute", c["column_name"])))
                kind = c.get("type")
                if kind is not None:
                    if kind not in ("text", "number"):
                        raise StorageError(f"bad column type {kind!r} (want text or number)")
                    overrides[(rel["name"], c["column_name"])] = kind
            names = [c.name for c in cols]
            def index_of(n: str) -> int:
                if n not in names:
                    raise StorageError(f"constraint names unknown column {n!r} "
                                       f"in relation {rel['name']!r}")
                return names.index(n)
            sigs.append(RelationSignature(
                rel["name"], tuple(cols),
                frozenset(index_of(n) for n in rel.get("not_null", [])),
                tuple(index_of(n) for n in rel.get("primary_key", []))))
        schemas.append(Schema(db["name"], tuple(sigs)))
    return schemas, overrides


def save_catalog(path: Path, schemas: list[Schema],
                 overrides: TypeOverrides | None = None) -> None:
    doc = catalog_to_json(schemas, overrides)
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_catalog(path: Path) -> tuple[list[Schema], TypeOverrides]:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise StorageError(f"no catalog file {path}") from None
    except json.JSONDecodeError as exc:
        raise StorageError(f"malformed catalog {path}: {exc}") from None
    return catalog_from_json(doc)


# ---------------------------------------------------------------------------
# Vector stores
# ---------------------------------------------------------------------------

def vector_to_csv(store: VectorRelation) -> str:
    rows = sorted((t.r_name, t.t_index, t.a_name, t.value.render())
                  for t in store.tuples)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(VECTOR_FIELDS)
    writer.writerows(rows)
    return out.getvalue()


def save_vector(path: Path, store: VectorRelation) -> None:
    path.write_text(vector_to_csv(store), encoding="utf-8")


def _typed_value(raw: str, kind: str | None, where: str) -> Value:
    if raw == "":
        raise StorageError(f"{where}: empty value field (NULL never appears in a store)")
    if kind == "text":
        return Value.text(raw)
    if kind == "number":
        try:
            return Value.number(raw)
        except ValueError:
            raise StorageError(f"{where}: {raw!r} is not a number") from None
    return infer_value(raw)


def load_vector(path: Path, db_name: str, schema: Schema | None = None,
                overrides: TypeOverrides | None = None) -> VectorRelation:
    overrides = overrides or {}
    name_of: dict[tuple[str, str], str] = {}
    if schema is not None:
        for sig in schema.relations:
            for c in sig.columns:
                kind = overrides.get((sig.name, c.name))
                if kind:
                    name_of[(sig.name, c.name)] = kind
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise StorageError(f"no vector store {path}") from None
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != list(VECTOR_FIELDS):
        raise StorageError(f"{path}: bad vector store header {header!r}")
    tuples = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 4:
            raise StorageError(f"{path} line {lineno}: expected 4 fields, got {len(row)}")
        r, t, a, v = row
        if not r or not t or not a:
            raise StorageError(f"{path} line {lineno}: empty key field")
        kind = name_of.get((r, a))
        tuples.append(VectorTuple(r, t, a, _typed_value(v, kind, f"{path} line {lineno}")))
    try:
        return VectorRelation(db_name, frozenset(tuples))
    except VectorError as exc:
        raise StorageError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# Data-file ingestion
# ---------------------------------------------------------------------------

@dataclass
class IngestReport:
    duplicate_rows: int = 0
    files: dict[str, str] = field(default_factory=dict)


def read_data_csv(path: Path, sig: RelationSignature,
                  overrides: TypeOverrides | None = None) -> tuple[Relation, int]:
    """Read one relation's data file; returns the relation and the number
    of duplicate source rows collapsed by set semantics."""
    overrides = overrides or {}
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise StorageError(f"no data file {path}") from None
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != list(sig.column_names()):
        raise StorageError(
            f"{path}: header {header!r} does not match declared columns "
            f"{list(sig.column_names())} of relation {sig.name!r}")
    rows: set[tuple[Value, ...]] = set()
    duplicates = 0
    for lineno, raw in enumerate(reader, start=2):
        if not raw:
            continue
        if len(raw) != sig.arity:
            raise StorageError(f"{path} line {lineno}: expected {sig.arity} fields, "
                               f"got {len(raw)}")
        values = []
        for i, fieldtext in enumerate(raw):
            if fieldtext == "":
                values.append(NULL_VALUE)
                continue
            kind = overrides.get((sig.name, sig.columns[i].name))
            values.append(_typed_value(fieldtext, kind, f"{path} line {lineno}"))
        row = tuple(values)
        if all(v.is_null for v in row):
            raise StorageError(f"{path} line {lineno}: all-NULL tuples cannot be "
                               f"represented in the vector store")
        for i in sorted(sig.not_null):
            if row[i].is_null:
                raise StorageError(f"{path} line {lineno}: NULL violates NOT NULL "
                                   f"on column {sig.columns[i].name!r}")
        if row in rows:
            duplicates += 1
        rows.add(row)
    return Relation(sig.columns, frozenset(rows)), duplicates


def ingest(catalog_path: Path, db_name: str, data_files: dict[str, Path],
           out_dir: Path) -> tuple[Schema, VectorRelation, IngestReport]:
    """Validate and shred a database's data files, writing catalog and store."""
    schemas, overrides = load_catalog(catalog_path)
    matching = [s for s in schemas if s.name == db_name]
    if not matching:
        raise StorageError(f"catalog {catalog_path} does not declare database {db_name!r}")
    schema = matching[0]
    declared = {sig.name for sig in schema.relations}
    unknown = set(data_files) - declared
    if unknown:
        raise StorageError(f"data files for undeclared relation(s): {sorted(unknown)}")
    report = IngestReport()
    instance = {}
    for sig in schema.relations:
        path = data_files.get(sig.name)
        if path is None:
            instance[sig.name] = Relation(sig.columns, frozenset())
            continue
        rel, dups = read_data_csv(path, sig, overrides)
        if dups:
            logger.warning("%s: collapsed %d duplicate row(s) in %r", path, dups, sig.name)
        report.duplicate_rows += dups
        instance[sig.name] = rel
    store = parse_instance(schema, instance)
    db_dir = out_dir / db_name
    db_dir.mkdir(parents=True, exist_ok=True)
    db_overrides = {k: v for k, v in overrides.items() if k[0] in declared}
    save_catalog(db_dir / "catalog.json", [schema], db_overrides)
    save_vector(db_dir / "vector.csv", store)
    report.files["catalog"] = str(db_dir / "catalog.json")
    report.files["store"] = str(db_dir / "vector.csv")
    return schema, store, report


def load_database(home: Path, db_name: str) -> tuple[Schema, VectorRelation]:
    db_dir = home / db_name
    schemas, overrides = load_catalog(db_dir / "catalog.json")
    matching = [s for s in schemas if s.name == db_name]
    if not matching:
        raise StorageError(f"{db_dir / 'catalog.json'} does not declare {db_name!r}")
    schema = matching[0]
    store = load_vector(db_dir / "vector.csv", db_name, schema, overrides)
    return schema, store


# ---------------------------------------------------------------------------
# Result documents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResultDocument:
    """A query result: the relation plus per-column provenance when known."""

    relation: Relation
    provenance: tuple[tuple[str, str], ...] | None = None

    def to_csv(self) -> str:
        return result_to_csv(self.relation)

    def to_json(self) -> dict:
        return result_to_json(self.relation, self.provenance)


def _json_value(v: Value):
    if v.is_null:
        return None
    if v.kind == "number":
        return {"$num": v.render()}
    return v.payload


def result_to_json(rel: Relation, provenance: tuple[tuple[str, str], ...] | None = None) -> dict:
    columns = []
    for i, c in enumerate(rel.header):
        entry: dict = {"name": c.name, "attribute": c.attribute}
        if provenance is not None and i < len(provenance):
            entry["relation"], entry["column"] = provenance[i]
        columns.append(entry)
    rows = [[_json_value(v) for v in row] for row in rel.sorted_rows()]
    return {"columns": columns, "rows": rows}


def result_to_csv(rel: Relation) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([c.name for c in rel.header])
    for row in rel.sorted_rows():
        writer.writerow(["" if v.is_null else v.render() for v in row])
    return out.getvalue()
