"""Argument graphs over influence graphs, plus dialectical strengths.

Arguments are created top-down from the output argument: a node at
stratum i-1 yields a child argument under a represented parent at
stratum i iff exactly one relation test accepts the influence edge.
Keying arguments by (node, parent argument) makes the result a tree with
the output argument at the root, and nodes that never pass a test for
any represented parent simply contribute no argument.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import ExtractionError
from .influence import InfluenceGraph, Node

RELATION_KINDS = ("attack", "support", "critical-support")

ROOT_ID = "output"


@dataclass(frozen=True)
class Characterization:
    """A relation test over influence edges.

    ``test(src, dst)`` decides membership of the edge in the relation of
    this kind. ``overrides`` lists kinds this one beats when several
    tests accept the same edge (critical support refines plain support);
    any other overlap is an extraction error.
    """

    kind: str
    test: Callable[[Node, Node], bool]
    overrides: frozenset = frozenset()

    def __post_init__(self):
        if self.kind not in RELATION_KINDS:
            raise ValueError(f"unknown relation kind {self.kind!r}")


@dataclass(frozen=True)
class Argument:
    id: str
    node: str
    label: str
    stratum: int
    parent: str | None = None
    relation: str | None = None


@dataclass(frozen=True)
class ArgumentGraph:
    """A tree of arguments with typed relations pointing to the root."""

    arguments: tuple
    strata_sizes: tuple

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {a.id: a for a in self.arguments})
        children: dict = {a.id: [] for a in self.arguments}
        for a in self.arguments:
            if a.parent is not None:
                children[a.parent].append(a.id)
        object.__setattr__(self, "_children", {k: tuple(v) for k, v in children.items()})

    def __len__(self) -> int:
        return len(self.arguments)

    def __contains__(self, arg_id: str) -> bool:
        return arg_id in self._by_id

    def argument(self, arg_id: str) -> Argument:
        return self._by_id[arg_id]

    @property
    def root(self) -> Argument:
        return self._by_id[ROOT_ID]

    def children(self, arg_id: str) -> tuple:
        return self._children[arg_id]

    def incoming(self, arg_id: str, kind: str) -> tuple:
        return tuple(c for c in self._children[arg_id] if self._by_id[c].relation == kind)

    def attackers(self, arg_id: str) -> tuple:
        return self.incoming(arg_id, "attack")

    def supporters(self, arg_id: str, *, include_critical: bool = False) -> tuple:
        plain = self.incoming(arg_id, "support")
        if include_critical:
            return plain + self.incoming(arg_id, "critical-support")
        return plain

    def critical_supporters(self, arg_id: str) -> tuple:
        return self.incoming(arg_id, "critical-support")

    def relations(self, kind: str) -> tuple:
        return tuple((a.id, a.parent) for a in self.arguments if a.relation == kind)

    @property
    def relation_count(self) -> int:
        return sum(1 for a in self.arguments if a.parent is not None)

    def at_stratum(self, stratum: int) -> tuple:
        return tuple(a for a in self.arguments if a.stratum == stratum)

    def to_json(self, strengths=None) -> dict:
        nodes = [
            {
                "id": a.id,
                "stratum": a.stratum,
                "node": a.node,
                "strength": (None if strengths is None else float(strengths[a.id])),
            }
            for a in self.arguments
        ]
        edges = [
            {"source": a.id, "target": a.parent, "relation": a.relation}
            for a in self.arguments
            if a.parent is not None
        ]
        return {"nodes": nodes, "edges": edges}


def _pick_relation(chars, src: Node, dst: Node) -> str | None:
    hits = [c for c in chars if c.test(src, dst)]
    if not hits:
        return None
    if len(hits) == 1:
        return hits[0].kind
    for candidate in hits:
        others = {c.kind for c in hits if c is not candidate}
        if others <= set(candidate.overrides):
            return candidate.kind
    raise ExtractionError(
        f"edge ({src.name}, {dst.name}) accepted by several relation tests: "
        f"{sorted(c.kind for c in hits)}"
    )


def extract_gaf(influences: InfluenceGraph, chars) -> ArgumentGraph:
    """Build the unique argument tree for the given relation tests."""
    strata = influences.strata
    nodes_by_name = {node.name: node for level in strata.levels for node in level}
    out = strata.output_node
    root = Argument(id=ROOT_ID, node=out.name, label=out.label, stratum=strata.k)
    args = [root]
    frontier = [root]
    for stratum in range(strata.k, 1, -1):
        next_frontier = []
        for parent in frontier:
            dst_node = nodes_by_name[parent.node]
            for src_name in influences.parent_names(stratum, parent.node):
                src_node = nodes_by_name[src_name]
                kind = _pick_relation(chars, src_node, dst_node)
                if kind is None:
                    continue
                child = Argument(
                    id=f"{src_name}@{parent.id}",
                    node=src_name,
                    label=src_node.label,
                    stratum=stratum - 1,
                    parent=parent.id,
                    relation=kind,
                )
                args.append(child)
                next_frontier.append(child)
        frontier = next_frontier
    return ArgumentGraph(arguments=tuple(args), strata_sizes=strata.sizes)


# -- strengths ---------------------------------------------------------------


@dataclass(frozen=True)
class StrengthSpec:
    """Strength rules for a 3-strata argument graph.

    ``root()`` gives the raw output quantity; the other two give the
    modulus-valued strengths per node name (and influencing node name
    for the input stratum).
    """

    root: Callable[[], float]
    intermediate: Callable[[str], float]
    input: Callable[[str, str], float]


def assign_strengths(gaf: ArgumentGraph, spec) -> dict:
    """Map every argument to its dialectical strength.

    ``spec`` is a :class:`StrengthSpec` for the 3-strata graphs produced
    by the built-in pipelines, or a callable ``(argument, parent_node
    name) -> float`` for custom depths.
    """
    strengths = {}
    if callable(spec):
        for a in gaf.arguments:
            parent_node = None if a.parent is None else gaf.argument(a.parent).node
            strengths[a.id] = float(spec(a, parent_node))
        return strengths
    k = len(gaf.strata_sizes)
    for a in gaf.arguments:
        if a.parent is None:
            strengths[a.id] = float(spec.root())
        elif a.stratum == k - 1:
            strengths[a.id] = float(spec.intermediate(a.node))
        elif a.stratum == k - 2:
            strengths[a.id] = float(spec.input(a.node, gaf.argument(a.parent).node))
        else:
            raise ValueError("StrengthSpec covers 3-strata graphs; pass a callable instead")
    return strengths
