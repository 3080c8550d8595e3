"""Rule validation against the derivation algebra and whole-scene consistency.

A rule is valid when its declared results match the derived ones and any
numeric amounts are conserved.  A scene is consistent when no rule breaks a
relation declared by another rule: no reversed sub-concept pairs, no pair
that is both nested and associated, and no cycles in the transitive
sub-concept or containment relations.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import product

from .ast import (
    Quantity,
    Relation,
    RelationKind,
    Rule,
    Scene,
    derive_result,
    split_result,
)
from .parser import Diagnostic, error


@dataclass
class RelationStore:
    """All relations of a scene merged, with the rules that declared them.

    Duplicate declarations across rules are legal and merged silently.
    """

    sub_edges: dict[tuple[str, str], list[Rule]] = field(default_factory=dict)
    assoc_edges: dict[frozenset[str], list[Rule]] = field(default_factory=dict)
    contained_edges: dict[tuple[str, str], list[Rule]] = field(default_factory=dict)

    @classmethod
    def from_scene(cls, scene: Scene) -> "RelationStore":
        store = cls()
        for rule in scene.rules:
            for rel in rule.relations:
                store.add(rel, rule)
        return store

    def add(self, rel: Relation, rule: Rule) -> None:
        if rel.kind is RelationKind.ASSOCIATION:
            self.assoc_edges.setdefault(rel.pair(), []).append(rule)
            return
        edge = (rel.left.name, rel.right.name)
        target = (self.sub_edges if rel.kind is RelationKind.SUB_CONCEPT
                  else self.contained_edges)
        target.setdefault(edge, []).append(rule)

    def has_sub(self, child: str, parent: str) -> bool:
        return (child, parent) in self.sub_edges

    def has_assoc(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self.assoc_edges


@dataclass(frozen=True)
class Contradiction:
    """A structured consistency violation; rendered into a Diagnostic."""

    kind: str  # "reversed-sub", "sub-vs-assoc", "sub-cycle", "containment-cycle"
    concepts: tuple[str, ...]
    rules: tuple[str, ...]
    message: str


def _names(term: tuple) -> tuple[str, ...]:
    return tuple(c.name for c in term)


def _acceptable_results(rule: Rule) -> list[Counter]:
    """Acceptable result multisets: per chain either the inverted term or,
    when the chain carries an amount, the split form."""
    per_chain: list[list[list[tuple[str, ...]]]] = []
    for chain in rule.inputs:
        inverted = [_names(t) for t in derive_result(rule.outputs, [chain])]
        choice = [inverted]
        if chain.quantity is not None:
            choice.append([_names(t) for t in split_result(rule.outputs, chain)])
        per_chain.append(choice)
    variants = []
    for combo in product(*per_chain):
        counter: Counter = Counter()
        for terms in combo:
            counter.update(terms)
        variants.append(counter)
    return variants


def _check_quantity(qty: Quantity, cite: str) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    total = qty.total.value() if qty.total else None
    taken = qty.taken.value() if qty.taken else None
    remainder = qty.remainder.value() if qty.remainder else None
    if taken is not None and taken < 0:
        diags.append(error(
            f"quantity taken {qty.taken.render()} is negative ({cite})",
            qty.span))
        return diags
    if total is not None and taken is not None:
        if taken > total:
            diags.append(error(
                f"quantity taken {qty.taken.render()} exceeds total "
                f"{qty.total.render()} ({cite})", qty.span))
        elif remainder is not None and taken + remainder != total:
            diags.append(error(
                f"quantity does not balance: taken {qty.taken.render()} plus "
                f"remainder {qty.remainder.render()} is not total "
                f"{qty.total.render()} ({cite})", qty.span))
    return diags


def validate_rule(rule: Rule) -> list[Diagnostic]:
    """Check one rule: declared results must equal the derivation (as
    multisets of terms) and numeric amounts must be conserved."""
    if rule.self_loop:
        return []
    diagnostics: list[Diagnostic] = []
    declared = Counter(term.names() for term in rule.declared_results)
    if declared not in _acceptable_results(rule):
        expected = " ^ ".join(
            ".".join(_names(t)) for t in derive_result(rule.outputs, rule.inputs))
        diagnostics.append(error(
            f"results of {rule.cite} do not match the derivation; "
            f"expected {expected}", rule.span))
    for chain in rule.inputs:
        if chain.quantity is not None:
            diagnostics.extend(_check_quantity(chain.quantity, rule.cite))
    return diagnostics


def validate_rules(scene: Scene) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    for rule in scene.rules:
        diags.extend(validate_rule(rule))
    return diags


def _cites(rules: list[Rule]) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for rule in rules:
        seen.setdefault(rule.cite)
    return tuple(seen)


def _strongly_connected(edges: dict[tuple[str, str], list[Rule]]) -> list[list[str]]:
    """Tarjan over the edge set; deterministic via sorted adjacency."""
    adjacency: dict[str, list[str]] = {}
    for child, parent in edges:
        adjacency.setdefault(child, []).append(parent)
        adjacency.setdefault(parent, [])
    for node in adjacency:
        adjacency[node].sort()
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = [0]
    components: list[list[str]] = []

    def visit(node: str) -> None:
        index[node] = low[node] = counter[0]
        counter[0] += 1
        stack.append(node)
        on_stack.add(node)
        for nxt in adjacency[node]:
            if nxt not in index:
                visit(nxt)
                low[node] = min(low[node], low[nxt])
            elif nxt in on_stack:
                low[node] = min(low[node], index[nxt])
        if low[node] == index[node]:
            component = []
            while True:
                member = stack.pop()
                on_stack.discard(member)
                component.append(member)
                if member == node:
                    break
            components.append(component)

    for node in sorted(adjacency):
        if node not in index:
            visit(node)
    return [sorted(c) for c in components if len(c) > 1]


def scene_contradictions(scene: Scene) -> list[Contradiction]:
    """Cross-rule violations as structured records, deterministically ordered."""
    store = RelationStore.from_scene(scene)
    found: list[Contradiction] = []

    for (child, parent), rules in sorted(store.sub_edges.items()):
        reverse = store.sub_edges.get((parent, child))
        if reverse and child < parent:
            cites = _cites(rules + reverse)
            found.append(Contradiction(
                "reversed-sub", (child, parent), cites,
                f"'{child} < {parent}' ({_cites(rules)[0]}) contradicts "
                f"'{parent} < {child}' ({_cites(reverse)[0]})"))

    for pair, assoc_rules in sorted(store.assoc_edges.items(),
                                    key=lambda item: sorted(item[0])):
        a, b = sorted(pair)
        for child, parent in ((a, b), (b, a)):
            sub_rules = store.sub_edges.get((child, parent))
            if sub_rules:
                cites = _cites(sub_rules + assoc_rules)
                found.append(Contradiction(
                    "sub-vs-assoc", (child, parent), cites,
                    f"'{child} < {parent}' ({_cites(sub_rules)[0]}) contradicts "
                    f"the association '{a} - {b}' ({_cites(assoc_rules)[0]})"))

    for component in _strongly_connected(store.sub_edges):
        if len(component) < 3:
            continue  # two-cycles already reported as reversed-sub
        rules: list[Rule] = []
        for edge, edge_rules in sorted(store.sub_edges.items()):
            if edge[0] in component and edge[1] in component:
                rules.extend(edge_rules)
        found.append(Contradiction(
            "sub-cycle", tuple(component), _cites(rules),
            "sub-concept relations form a cycle through "
            f"{', '.join(component)} ({', '.join(_cites(rules))})"))

    for component in _strongly_connected(store.contained_edges):
        rules = []
        for edge, edge_rules in sorted(store.contained_edges.items()):
            if edge[0] in component and edge[1] in component:
                rules.extend(edge_rules)
        found.append(Contradiction(
            "containment-cycle", tuple(component), _cites(rules),
            "containment forms a cycle through "
            f"{', '.join(component)} ({', '.join(_cites(rules))})"))

    found.sort(key=lambda c: (c.kind, c.concepts))
    return found


def check_scene(scene: Scene) -> list[Diagnostic]:
    """Report every cross-rule contradiction; empty means consistent.

    Expects individually valid rules (see validate_rule).  The result is
    insensitive to rule order up to the rule labels cited.
    """
    diagnostics = []
    for contradiction in scene_contradictions(scene):
        span = _contradiction_span(scene, contradiction)
        diagnostics.append(error(contradiction.message, span))
    return diagnostics


def _contradiction_span(scene: Scene, contradiction: Contradiction):
    cited = set(contradiction.rules)
    span = scene.span
    for rule in scene.rules:
        if rule.cite in cited:
            span = rule.span  # last offending rule positions the message
    return span


def check_all(scene: Scene) -> list[Diagnostic]:
    """Rule-level validation followed by scene consistency."""
    return validate_rules(scene) + check_scene(scene)
