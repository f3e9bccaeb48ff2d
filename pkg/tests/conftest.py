from __future__ import annotations

from dataclasses import dataclass

import pytest

from ivecdb.federation import Federation, Member
from ivecdb.relations import Relation, Schema, signature
from ivecdb.values import Value
from ivecdb.vector import VectorRelation, parse_instance

T = Value.text


def rows_of(rel):
    """Rows as plain payload tuples, sorted, for readable assertions."""
    return sorted(tuple("NULL" if v.is_null else v.render() for v in row)
                  for row in rel.rows)


@dataclass
class UniversityDb:
    schema: Schema
    instance: dict[str, Relation]
    store: VectorRelation


def _make_db(name: str, tables: list[tuple[str, list[str], list[tuple[str, ...]]]]) -> UniversityDb:
    sigs, instance = [], {}
    for rel_name, cols, rows in tables:
        sig = signature(rel_name, cols)
        sigs.append(sig)
        instance[rel_name] = Relation(sig.columns,
                                      frozenset(tuple(T(x) for x in row) for row in rows))
    schema = Schema(name, tuple(sigs))
    return UniversityDb(schema, instance, parse_instance(schema, instance))


@pytest.fixture(scope="session")
def univ_a() -> UniversityDb:
    return _make_db("univ_A", [
        ("pay-info", ["category", "dept", "avg-sal"], [
            ("Prof", "CS", "70,000"),
            ("Assoc. Prof", "CS", "60,000"),
            ("Secretary", "CS", "35,000"),
            ("Prof", "Math", "65,000"),
        ]),
    ])


@pytest.fixture(scope="session")
def univ_b() -> UniversityDb:
    return _make_db("univ_B", [
        ("pay-info", ["category", "CS", "Math"], [
            ("Prof", "80,000", "65,000"),
            ("Assoc. Prof", "65,000", "55,000"),
            ("Assist. Prof", "45,000", "42,000"),
        ]),
    ])


@pytest.fixture(scope="session")
def univ_c() -> UniversityDb:
    return _make_db("univ_C", [
        ("CS", ["category", "avg-sal"], [
            ("Prof", "65,000"),
            ("Assist. Prof", "40,000"),
        ]),
        ("ece", ["category", "avg-sal"], [
            ("Secretary", "30,000"),
            ("Prof", "70,000"),
        ]),
    ])


@pytest.fixture(scope="session")
def university_fed(univ_a, univ_b, univ_c) -> Federation:
    return Federation([Member(db.schema, db.store)
                       for db in (univ_a, univ_b, univ_c)])
