"""Predicate dependency graph and loop classification.

The dependency graph has one node per predicate and an arc (p, q)
whenever some clause with head predicate p calls q in its body.  Loops
are the strongly connected components that contain a cycle and are
reachable from the query's predicate.  Each loop is classified:

* numerical: some clause of the loop computes `is/2` over a head
  argument, so the recursion steps through numbers;
* integer-based: the mode analysis found no way for a float or an
  unchecked non-integer value to enter the arithmetic of the loop or of
  the predicates it depends on.

Only integer-based loops are amenable to the exact integer reasoning
done downstream, so the classification carries the diagnostics that
explain a negative verdict.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .modes import ModeAssignment, infer_argument_modes
from .syntax import (
    Clause,
    Is,
    PredKey,
    Program,
    QueryPattern,
    UserAtom,
    Var,
    survey_arith,
)


@dataclass(frozen=True)
class PredGraph:
    nodes: frozenset[PredKey]
    arcs: frozenset[tuple[PredKey, PredKey]]

    def successors(self, key: PredKey) -> tuple[PredKey, ...]:
        return tuple(sorted(q for p, q in self.arcs if p == key))

    def has_self_loop(self, key: PredKey) -> bool:
        return (key, key) in self.arcs


def build_dependency_graph(program: Program) -> PredGraph:
    nodes: set[PredKey] = set()
    arcs: set[tuple[PredKey, PredKey]] = set()
    for clause in program.clauses:
        nodes.add(clause.key)
        for lit in clause.body:
            if isinstance(lit, UserAtom):
                nodes.add(lit.key)
                arcs.add((clause.key, lit.key))
    return PredGraph(frozenset(nodes), frozenset(arcs))


def reachable_from(graph: PredGraph, start: PredKey) -> frozenset[PredKey]:
    if start not in graph.nodes:
        return frozenset()
    seen = {start}
    todo = [start]
    while todo:
        key = todo.pop()
        for nxt in graph.successors(key):
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return frozenset(seen)


def strongly_connected_components(graph: PredGraph) -> tuple[frozenset[PredKey], ...]:
    """Tarjan's algorithm, iterative.  Components come out callee-first:
    every arc leaving a component points into an earlier one."""
    index: dict[PredKey, int] = {}
    lowlink: dict[PredKey, int] = {}
    on_stack: set[PredKey] = set()
    stack: list[PredKey] = []
    components: list[frozenset[PredKey]] = []
    counter = 0

    for root in sorted(graph.nodes):
        if root in index:
            continue
        work: list[tuple[PredKey, Iterable[PredKey]]] = [(root, iter(graph.successors(root)))]
        index[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, successors = work[-1]
            advanced = False
            for nxt in successors:
                if nxt not in index:
                    index[nxt] = lowlink[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(graph.successors(nxt))))
                    advanced = True
                    break
                if nxt in on_stack:
                    lowlink[node] = min(lowlink[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index[node]:
                component = set()
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.add(member)
                    if member == node:
                        break
                components.append(frozenset(component))
    return tuple(components)


@dataclass(frozen=True)
class LoopInfo:
    predicates: frozenset[PredKey]
    clauses: tuple[Clause, ...]
    support: tuple[Clause, ...]
    is_numerical: bool
    is_integer_based: bool
    diagnostics: tuple[str, ...]

    def is_recursive_clause(self, clause: Clause) -> bool:
        return any(
            isinstance(lit, UserAtom) and lit.key in self.predicates
            for lit in clause.body
        )

    def describe(self) -> str:
        return ", ".join(f"{name}/{arity}" for name, arity in sorted(self.predicates))


def _clause_is_numerical(clause: Clause) -> bool:
    head_vars = {a.name for a in clause.head.args if isinstance(a, Var)}
    for lit in clause.body:
        if not isinstance(lit, Is):
            continue
        if isinstance(lit.lhs, Var) and lit.lhs.name in head_vars:
            return True
        if survey_arith(lit.rhs).variables & head_vars:
            return True
    return False


def find_integer_loops(
    program: Program,
    pattern: QueryPattern,
    modes: Optional[ModeAssignment] = None,
) -> list[LoopInfo]:
    """One LoopInfo per cyclic component reachable from the query's
    predicate, in callee-first order."""
    if modes is None:
        modes = infer_argument_modes(program, pattern)
    graph = build_dependency_graph(program)
    reachable = reachable_from(graph, pattern.key)
    if not reachable:
        return []
    edges = {key: graph.successors(key) for key in graph.nodes}

    loops: list[LoopInfo] = []
    for component in strongly_connected_components(graph):
        if not component & reachable:
            continue
        member = next(iter(component))
        cyclic = len(component) > 1 or graph.has_self_loop(member)
        if not cyclic:
            continue
        clauses = tuple(c for c in program.clauses if c.key in component)
        support_preds = set(component)
        todo = sorted(component)
        while todo:
            key = todo.pop()
            for nxt in edges.get(key, ()):
                if nxt not in support_preds:
                    support_preds.add(nxt)
                    todo.append(nxt)
        support = tuple(c for c in program.clauses if c.key in support_preds)
        numerical = any(_clause_is_numerical(c) for c in clauses)
        violations = modes.violations_for(support_preds)
        diagnostics: list[str] = []
        if not numerical:
            names = ", ".join(f"{n}/{a}" for n, a in sorted(component))
            diagnostics.append(
                f"loop over {names} performs no arithmetic on its head arguments"
            )
        diagnostics.extend(str(v) for v in violations)
        loops.append(
            LoopInfo(
                predicates=component,
                clauses=clauses,
                support=support,
                is_numerical=numerical,
                is_integer_based=not violations,
                diagnostics=tuple(diagnostics),
            )
        )
    return loops
