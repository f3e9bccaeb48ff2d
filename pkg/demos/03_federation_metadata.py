"""Querying data and metadata of a federation with one algebra.

Three universities store the same payroll facts under incompatible
schemas: values in one become attribute names or relation names in the
others.  Stacking their vector stores into call_4 makes all of it plain
data, so "where does Secretary appear" or "which attributes does univ_C
have" are ordinary selections and projections.
"""

from _university import federation

from ivecdb import (Value, era_alpha, era_delta, era_gamma, era_rho, find_token,
                    gamma_oracle, natural_join_unknown, parse_pattern)

fed = federation()

print("== call_2: every relation of every member ==")
print(fed.call_level(2).pretty())

print("\n== delta(): the databases ==")
print(era_delta(fed).pretty())

print("\n== rho({univ_C}): its relations ==")
from ivecdb import Relation
from ivecdb.federation import CALL4_HEADER
s1 = Relation(CALL4_HEADER[:1], frozenset({(Value.text("univ_C"),)}))
print(era_rho(fed, s1).pretty())

print("\n== alpha: attributes of univ_B's pay-info (departments live here!) ==")
s2 = Relation(CALL4_HEADER[:2], frozenset({(Value.text("univ_B"), Value.text("pay-info"))}))
print(era_alpha(fed, s2).pretty())

print("\n== gamma (_->Secretary, _->_): every cell of every tuple containing Secretary ==")
pattern = parse_pattern("_->Secretary,_->_")
result = era_gamma(fed, pattern, fed.call_level(2))
print(result.pretty())
print("agrees with the brute-force oracle:",
      result == gamma_oracle(fed, pattern, fed.call_level(2)))

print("\n== find the token '65,000' across all schemas ==")
print(find_token(fed, Value.text("65,000")).pretty())

print("\n== natural join of two relations whose schemas we never wrote down ==")
print(natural_join_unknown(fed, "univ_C", "CS", "ece").pretty())
print("(empty: no CS category/salary pair recurs in ece)")
