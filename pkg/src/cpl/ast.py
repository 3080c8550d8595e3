"""Core value types for CPL scenes and the pure rule algebra.

A scene is a named set of declared concepts plus an ordered list of rules.
Each non-self-loop rule says: one or more output concepts receive the value
change of an effector, delivered through an input chain that starts at a
source concept and ends at the effector.  The derivation algebra below turns
the left-hand side of such a rule into its expected result terms.

Everything here is immutable after construction; source spans are carried
for diagnostics but excluded from equality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum


@dataclass(frozen=True)
class Span:
    """1-based source position; length counts characters."""

    line: int = 0
    column: int = 0
    length: int = 0


_NO_SPAN = Span()


@dataclass(frozen=True)
class ConceptId:
    """A declared concept: full name plus an optional short alias."""

    name: str
    abbrev: str | None = None
    span: Span = field(default=_NO_SPAN, compare=False, repr=False)

    def short(self) -> str:
        return self.abbrev or self.name


class RelationKind(Enum):
    SUB_CONCEPT = "sub_concept"
    ASSOCIATION = "association"
    CONTAINED_IN = "contained_in"


_SURFACE = {
    RelationKind.SUB_CONCEPT: "<",
    RelationKind.ASSOCIATION: "-",
    RelationKind.CONTAINED_IN: "in",
}


@dataclass(frozen=True)
class Relation:
    """A normalized binary relation between two distinct concepts.

    SUB_CONCEPT(x, y) nests x inside y.  ASSOCIATION(x, y) relates the two
    while keeping them separate; it is symmetric, the written orientation is
    preserved for formatting only.  CONTAINED_IN(x, y) records an initial
    placement of x inside y.
    """

    kind: RelationKind
    left: ConceptId
    right: ConceptId
    span: Span = field(default=_NO_SPAN, compare=False, repr=False)

    def pair(self) -> frozenset[str]:
        return frozenset((self.left.name, self.right.name))

    def surface(self) -> str:
        return f"{self.left.short()} {_SURFACE[self.kind]} {self.right.short()}"


@dataclass(frozen=True)
class Amount:
    """A dimensionless amount: a symbol, a number, or a difference a - b."""

    first: int | str
    second: int | str | None = None

    def value(self) -> int | None:
        """Numeric value, or None when any part is symbolic."""
        if isinstance(self.first, str):
            return None
        if self.second is None:
            return self.first
        if isinstance(self.second, str):
            return None
        return self.first - self.second

    def render(self) -> str:
        if self.second is None:
            return str(self.first)
        return f"{self.first}-{self.second}"


@dataclass(frozen=True)
class Quantity:
    """Amount bookkeeping on a chain effector.

    ``total`` is the annotated amount available at the source, ``taken`` the
    amount moved to the output, ``remainder`` what stays behind.  ``taken``
    and ``remainder`` are filled in when the rule is written in the split
    result form; conservation of the numeric values is checked by
    ``cpl.check.validate_rule``.
    """

    total: Amount | None = None
    taken: Amount | None = None
    remainder: Amount | None = None
    span: Span = field(default=_NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Chain:
    """An input chain: source first, measured effector last, length >= 2."""

    elements: tuple[ConceptId, ...]
    quantity: Quantity | None = None

    @property
    def source(self) -> ConceptId:
        return self.elements[0]

    @property
    def effector(self) -> ConceptId:
        return self.elements[-1]


@dataclass(frozen=True)
class ResultTerm:
    """A declared result term; ``qtys`` aligns an optional amount with each
    element (the leading element never carries one)."""

    concepts: tuple[ConceptId, ...]
    qtys: tuple[Amount | None, ...] = ()

    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.concepts)

    def render(self) -> str:
        qtys = self.qtys or (None,) * len(self.concepts)
        parts = []
        for concept, qty in zip(self.concepts, qtys):
            text = concept.short()
            if qty is not None:
                text += f"({qty.render()})"
            parts.append(text)
        return ".".join(parts)


@dataclass(frozen=True)
class Rule:
    """One scene statement.

    Self-loop rules (``P -> P``) have a single output and nothing else.
    All other rules carry at least one output, one input chain and the
    declared result terms, plus any nesting/association relations.
    """

    label: str | None
    outputs: tuple[ConceptId, ...]
    inputs: tuple[Chain, ...]
    declared_results: tuple[ResultTerm, ...]
    relations: tuple[Relation, ...]
    self_loop: bool = False
    ordinal: int = field(default=0, compare=False)
    span: Span = field(default=_NO_SPAN, compare=False, repr=False)

    @property
    def cite(self) -> str:
        """Stable human-readable reference for diagnostics."""
        return self.label if self.label else f"rule {self.ordinal}"

    def lhs_concepts(self) -> tuple[ConceptId, ...]:
        """Distinct left-hand-side concepts, first-appearance order."""
        seen: dict[str, ConceptId] = {}
        for concept in itertools.chain(self.outputs, *(ch.elements for ch in self.inputs)):
            seen.setdefault(concept.name, concept)
        return tuple(seen.values())

    def mentioned_concepts(self) -> tuple[ConceptId, ...]:
        """Every concept the rule touches anywhere, first-appearance order."""
        seen: dict[str, ConceptId] = {}
        for concept in self.lhs_concepts():
            seen.setdefault(concept.name, concept)
        for term in self.declared_results:
            for concept in term.concepts:
                seen.setdefault(concept.name, concept)
        for rel in self.relations:
            seen.setdefault(rel.left.name, rel.left)
            seen.setdefault(rel.right.name, rel.right)
        return tuple(seen.values())


@dataclass(frozen=True)
class Scene:
    """A named rule set over declared concepts, optionally rooted in an
    outermost container concept."""

    name: str
    entities: tuple[ConceptId, ...]
    root: ConceptId | None
    rules: tuple[Rule, ...]
    span: Span = field(default=_NO_SPAN, compare=False, repr=False)

    def by_name(self) -> dict[str, ConceptId]:
        return {c.name: c for c in self.entities}

    def used_concepts(self) -> tuple[ConceptId, ...]:
        """Concepts mentioned by at least one rule, first-appearance order."""
        seen: dict[str, ConceptId] = {}
        for rule in self.rules:
            for concept in rule.mentioned_concepts():
                seen.setdefault(concept.name, concept)
        return tuple(seen.values())


def normalize_relation(left: ConceptId, op: str, right: ConceptId,
                       span: Span = _NO_SPAN) -> Relation:
    """Map a written relation to its normalized form.

    ``x > y`` is the written reverse of ``y < x`` and is flipped here;
    ``<``, ``-`` and ``in`` map directly.  Relating a concept to itself is
    invalid.
    """
    if left.name == right.name:
        raise ValueError(f"concept {left.name!r} cannot relate to itself")
    if op == "<":
        return Relation(RelationKind.SUB_CONCEPT, left, right, span)
    if op == ">":
        return Relation(RelationKind.SUB_CONCEPT, right, left, span)
    if op == "-":
        return Relation(RelationKind.ASSOCIATION, left, right, span)
    if op == "in":
        return Relation(RelationKind.CONTAINED_IN, left, right, span)
    raise ValueError(f"unknown relation operator {op!r}")


def derive_result(outputs: tuple[ConceptId, ...] | list[ConceptId],
                  inputs: tuple[Chain, ...] | list[Chain]) -> list[tuple[ConceptId, ...]]:
    """Derive the expected result terms of a rule left-hand side.

    Each output is linked with each inverted input chain: for output O and
    chain S.M1...F the term is O.F...M1.S.  Outputs form the outer loop,
    chains the inner one, so the count is len(outputs) * len(inputs).
    """
    return [
        (output, *reversed(chain.elements))
        for output in outputs
        for chain in inputs
    ]


def split_result(outputs: tuple[ConceptId, ...] | list[ConceptId],
                 chain: Chain) -> list[tuple[ConceptId, ...]]:
    """Result terms in the split amount form for a single chain.

    When the chain carries a quantity, a rule may declare the moved part as
    O.F and the remainder as the untouched chain S...F instead of the fully
    inverted term.
    """
    terms: list[tuple[ConceptId, ...]] = [
        (output, chain.effector) for output in outputs
    ]
    terms.append(tuple(chain.elements))
    return terms


def is_reverse_pair(a: Rule, b: Rule) -> bool:
    """True when ``b`` re-states ``a`` with output and source swapped.

    Only defined for distinct single-output, single-chain rules sharing the
    same intermediate and effector elements.  Such a pair marks a repeatable
    process rather than new structure.
    """
    if a is b or a.self_loop or b.self_loop:
        return False
    if len(a.outputs) != 1 or len(b.outputs) != 1:
        return False
    if len(a.inputs) != 1 or len(b.inputs) != 1:
        return False
    chain_a, chain_b = a.inputs[0], b.inputs[0]
    if len(chain_a.elements) != len(chain_b.elements):
        return False
    tail_a = tuple(c.name for c in chain_a.elements[1:])
    tail_b = tuple(c.name for c in chain_b.elements[1:])
    return (
        a.outputs[0].name == chain_b.source.name
        and b.outputs[0].name == chain_a.source.name
        and tail_a == tail_b
    )
