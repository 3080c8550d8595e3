import random

import pytest
from hypothesis import given, strategies as st

from cpl.ast import (
    Chain,
    ConceptId,
    Rule,
    derive_result,
    is_reverse_pair,
    normalize_relation,
    RelationKind,
)

from genhelpers import make_chain, make_entities

P, K, D = ConceptId("Pot", "P"), ConceptId("Kitchen", "K"), ConceptId("Cupboard", "D")
H, C, B, G = (ConceptId("Heat", "H"), ConceptId("Cooker", "C"),
              ConceptId("Hob", "B"), ConceptId("Gas", "G"))


def names(term):
    return tuple(c.name for c in term)


def test_derive_single_chain():
    terms = derive_result([P], [Chain((K, D))])
    assert [names(t) for t in terms] == [("Pot", "Cupboard", "Kitchen")]


def test_derive_gas_chain():
    terms = derive_result([H], [Chain((C, B, G))])
    assert [names(t) for t in terms] == [("Heat", "Gas", "Hob", "Cooker")]


def test_derive_multi_output_cross_product():
    e1, e2, e3, e4 = (ConceptId("E1"), ConceptId("E2"),
                      ConceptId("E3"), ConceptId("E4"))
    terms = derive_result([e1, e4], [Chain((e2, e3))])
    assert [names(t) for t in terms] == [
        ("E1", "E3", "E2"), ("E4", "E3", "E2")]


@given(st.integers(0, 10_000))
def test_derive_count_and_involution(seed):
    rng = random.Random(seed)
    entities = make_entities(rng, rng.randint(3, 6))
    outputs = rng.sample(entities, rng.randint(1, 3))
    chains = [make_chain(rng, entities) for _ in range(rng.randint(1, 3))]
    terms = derive_result(outputs, chains)
    assert len(terms) == len(outputs) * len(chains)
    for index, term in enumerate(terms):
        chain = chains[index % len(chains)]
        # reversing the tail reconstructs the chain the term came from
        assert tuple(reversed(term[1:])) == chain.elements


def test_normalize_directions():
    rel = normalize_relation(D, "<", K)
    assert rel.kind is RelationKind.SUB_CONCEPT
    assert (rel.left.name, rel.right.name) == ("Cupboard", "Kitchen")
    flipped = normalize_relation(P, ">", D)
    assert flipped.kind is RelationKind.SUB_CONCEPT
    assert (flipped.left.name, flipped.right.name) == ("Cupboard", "Pot")
    assoc = normalize_relation(D, "-", P)
    assert assoc.kind is RelationKind.ASSOCIATION
    contained = normalize_relation(P, "in", D)
    assert contained.kind is RelationKind.CONTAINED_IN


def test_normalize_rejects_self_relation():
    with pytest.raises(ValueError):
        normalize_relation(P, "<", ConceptId("Pot", "P"))


def test_normalize_idempotent():
    rel = normalize_relation(P, ">", D)
    again = normalize_relation(rel.left, "<", rel.right)
    assert again == rel
    assoc = normalize_relation(D, "-", P)
    assert normalize_relation(assoc.left, "-", assoc.right) == assoc


def _rule(label, output, chain_elements, ordinal=1):
    chain = Chain(tuple(chain_elements))
    terms = tuple()
    return Rule(label, (output,), (chain,), terms, (), ordinal=ordinal)


def test_reverse_pair_detected():
    r5 = _rule("r5", P, (B, H))
    r7 = _rule("r7", B, (P, H), ordinal=2)
    assert is_reverse_pair(r5, r7)
    assert is_reverse_pair(r7, r5)


def test_reverse_pair_disjoint_sources():
    W, T = ConceptId("Water", "W"), ConceptId("Tap", "T")
    r1 = _rule("r1", P, (K, D))
    r2 = _rule("r2", P, (T, W), ordinal=2)
    assert not is_reverse_pair(r1, r2)


def test_rule_is_not_its_own_reverse():
    r5 = _rule("r5", P, (B, H))
    assert not is_reverse_pair(r5, r5)


def test_reverse_pair_needs_matching_tail():
    W = ConceptId("Water", "W")
    a = _rule("a", P, (B, H))
    b = _rule("b", B, (P, W), ordinal=2)
    assert not is_reverse_pair(a, b)


def test_reverse_pair_rejects_multi_shapes():
    a = Rule("a", (P, H), (Chain((B, H)),), (), ())
    b = _rule("b", B, (P, H), ordinal=2)
    assert not is_reverse_pair(a, b)


def test_lhs_concepts_order_and_dedup():
    rule = Rule("r", (P,), (Chain((K, D)), Chain((K, H))), (), ())
    assert [c.name for c in rule.lhs_concepts()] == [
        "Pot", "Kitchen", "Cupboard", "Heat"]
