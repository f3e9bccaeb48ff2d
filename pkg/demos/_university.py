"""The three-university federation used by all demos.

univ_A keeps one pay-info relation keyed by category and department;
univ_B folds the departments into columns; univ_C has one relation per
department.  Same information, three incompatible schema designs: the
classic metadata-querying playground.
"""

from ivecdb import Member, Federation, Relation, Schema, Value, parse_instance, signature

T = Value.text


def build(name, tables):
    sigs, instance = [], {}
    for rel_name, cols, rows in tables:
        sig = signature(rel_name, cols)
        sigs.append(sig)
        instance[rel_name] = Relation(sig.columns,
                                      frozenset(tuple(T(x) for x in row) for row in rows))
    schema = Schema(name, tuple(sigs))
    return schema, instance, parse_instance(schema, instance)


def univ_a():
    return build("univ_A", [
        ("pay-info", ["category", "dept", "avg-sal"], [
            ("Prof", "CS", "70,000"),
            ("Assoc. Prof", "CS", "60,000"),
            ("Secretary", "CS", "35,000"),
            ("Prof", "Math", "65,000"),
        ]),
    ])


def univ_b():
    return build("univ_B", [
        ("pay-info", ["category", "CS", "Math"], [
            ("Prof", "80,000", "65,000"),
            ("Assoc. Prof", "65,000", "55,000"),
            ("Assist. Prof", "45,000", "42,000"),
        ]),
    ])


def univ_c():
    return build("univ_C", [
        ("CS", ["category", "avg-sal"], [("Prof", "65,000"), ("Assist. Prof", "40,000")]),
        ("ece", ["category", "avg-sal"], [("Secretary", "30,000"), ("Prof", "70,000")]),
    ])


def federation():
    members = []
    for make in (univ_a, univ_b, univ_c):
        schema, _instance, store = make()
        members.append(Member(schema, store))
    return Federation(members)
