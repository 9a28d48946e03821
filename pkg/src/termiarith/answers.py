"""Abstract answer tables for numerical loops.

A loop's answers are summarized by elements of a finite partition of its
integer argument space.  The table is the least set of elements closed
under the loop's clauses: each clause body is read as a linear
constraint, recursive calls are replaced by already-derived table
entries, and every satisfiable combination is widened back into the
partition.  Loops are solved callee-first, so a published table stands
in for the calls an outer loop makes into an inner one.

When a loop's comparisons say nothing about some integer position
(typically an output computed by arithmetic), the partition used for
widening is the propagated one from `extend_domain`, further refined by
the constraints of the non-recursive clauses; without the refinement the
first widening step would forget how outputs relate to inputs.  The
published table still reports plain propagated elements, the refinement
stays internal to the fixpoint."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cache
from itertools import product
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .constraints import (
    FALSE,
    Conjunction,
    LinAtom,
    LinExpr,
    atom_is_false,
    atom_is_true,
    conjunction,
    is_satisfiable,
    make_atom,
    negate_atom,
    project_or_none,
    sorted_atoms,
)
from .domain import (
    Domain,
    answer_positions,
    applicable_clauses,
    build_domain,
    collect_answer_comparisons,
    extend_domain,
    head_binding_atoms,
    body_constraint_atoms,
    infer_comparisons,
    linear_term,
    position_var,
    unconstrained_positions,
)
from .constraints import EQ, LE
from .graph import LoopInfo
from .modes import ModeAssignment
from .syntax import PredKey, Term, UserAtom

#: Refinement atoms per predicate; past this the fixpoint widens into
#: the unrefined partition.
REFINE_CAP = 6

#: Bound on elements times sign assignments during refinement.
PIECE_CAP = 4096

AnswerTable = dict[PredKey, tuple["AbstractAtom", ...]]


@dataclass(frozen=True)
class AbstractAtom:
    """One published answer: calls to `key` can succeed with argument
    values inside `element` (over arg1, arg2, ...)."""

    key: PredKey
    element: Conjunction


@dataclass(frozen=True)
class AnswerDomain:
    """Widening targets for a loop's fixpoint.

    `pieces` are the disjoint conjunctions the fixpoint widens into;
    `exposed` maps each piece to the partition element it reports as."""

    pieces: dict[PredKey, tuple[Conjunction, ...]]
    exposed: dict[PredKey, dict[Conjunction, Conjunction]]
    notes: tuple[str, ...] = ()


@cache
def _sat(conj: Conjunction) -> bool:
    return is_satisfiable(conj)


def _refinement_atoms(
    loop: LoopInfo,
    modes: ModeAssignment,
    positions: Mapping[PredKey, tuple[int, ...]],
    notes: list[str],
) -> dict[PredKey, list[LinAtom]]:
    """Inequalities the non-recursive clauses impose on the answer
    positions, equalities split into their two halves."""
    out: dict[PredKey, list[LinAtom]] = {key: [] for key in positions}
    for clause in applicable_clauses(loop, modes):
        if loop.is_recursive_clause(clause):
            continue
        pos = positions[clause.key]
        constraint = head_binding_atoms(clause, pos) + body_constraint_atoms(clause)
        projected = project_or_none(constraint, [position_var(j) for j in pos])
        if projected is None:
            name, arity = clause.key
            notes.append(
                f"projection cap hit on a non-recursive clause of"
                f" {name}/{arity}; widening stays unrefined there"
            )
            continue
        if FALSE in projected:
            continue
        found = out[clause.key]
        for atom in sorted_atoms(projected):
            halves = (
                [make_atom(atom.expr, LE), make_atom(-atom.expr, LE)]
                if atom.rel == EQ
                else [atom]
            )
            for half in halves:
                if atom_is_true(half) or atom_is_false(half):
                    continue
                if half not in found:
                    found.append(half)
    return out


def build_answer_domain(
    loop: LoopInfo,
    modes: ModeAssignment,
    query_domain: Domain,
    used_inference: bool = False,
) -> AnswerDomain:
    """The widening targets for the loop.

    When every integer position is mentioned by some collectable
    comparison, the targets are the partition generated by the answer
    comparisons (inferred ones included when the query domain needed
    inference).  Otherwise the query partition is propagated across
    positions and refined by the non-recursive clauses.  May raise
    `DomainTooLarge` like `build_domain`."""
    positions = answer_positions(loop, modes)
    notes: list[str] = []
    pieces: dict[PredKey, tuple[Conjunction, ...]] = {}
    exposed: dict[PredKey, dict[Conjunction, Conjunction]] = {}
    query_domain = {
        key: elements
        for key, elements in query_domain.items()
        if key in loop.predicates
    }
    if any(unconstrained_positions(loop, modes).values()):
        extended = extend_domain(query_domain, loop)
        notes.extend(extended.notes)
        refinement = _refinement_atoms(loop, modes, positions, notes)
        for key, elements in extended.elements.items():
            name, arity = key
            atoms = refinement[key]
            if len(atoms) > REFINE_CAP:
                notes.append(
                    f"{name}/{arity}: {len(atoms)} refinement atoms is past"
                    f" the cap of {REFINE_CAP}; widening stays unrefined"
                )
                atoms = []
            if len(elements) * (2 ** len(atoms)) > PIECE_CAP:
                notes.append(
                    f"{name}/{arity}: refinement would pass {PIECE_CAP}"
                    " candidate pieces; widening stays unrefined"
                )
                atoms = []
            kept: list[Conjunction] = []
            origin: dict[Conjunction, Conjunction] = {}
            for element in elements:
                for signs in product((True, False), repeat=len(atoms)):
                    piece = conjunction(
                        list(element) + [a if s else negate_atom(a) for a, s in zip(atoms, signs)]
                    )
                    if FALSE in piece or piece in origin or not _sat(piece):
                        continue
                    kept.append(piece)
                    origin[piece] = element
            pieces[key] = tuple(kept)
            exposed[key] = origin
    else:
        comparisons = {k: set(v) for k, v in collect_answer_comparisons(loop, modes).items()}
        if used_inference:
            for key, atoms in infer_comparisons(loop, modes, positions=positions).items():
                comparisons[key] |= atoms
        domain = build_domain({k: frozenset(v) for k, v in comparisons.items()})
        for key, elements in domain.items():
            pieces[key] = elements
            exposed[key] = {element: element for element in elements}
    return AnswerDomain(pieces=pieces, exposed=exposed, notes=tuple(notes))


def widen(conj: Iterable[LinAtom], pieces: Iterable[Conjunction]) -> tuple[Conjunction, ...]:
    """The pieces a constraint can land in: those whose intersection
    with it is satisfiable."""
    conj = conjunction(conj)
    if FALSE in conj:
        return ()
    return tuple(p for p in pieces if _sat(conjunction(conj | p)))


def instantiate_element(element: Conjunction, args: Sequence[Term]) -> list[LinAtom]:
    """Element constraints rewritten from position variables onto the
    call's argument terms.  Constraints that touch an argument with no
    linear reading are dropped, which only loses precision."""
    replacements: dict[str, Optional[LinExpr]] = {
        position_var(j): linear_term(arg) for j, arg in enumerate(args)
    }
    out: list[LinAtom] = []
    for atom in element:
        expr = LinExpr.of(atom.expr.const)
        usable = True
        for name in sorted(atom.expr.variables()):
            replacement = replacements.get(name)
            if replacement is None:
                usable = False
                break
            expr = expr + replacement.scale(atom.expr.coeff(name))
        if usable:
            out.append(make_atom(expr, atom.rel))
    return out


def _candidates(
    base: Conjunction,
    slots: Sequence[tuple[UserAtom, Optional[tuple[Conjunction, ...]]]],
    live: Mapping[PredKey, list[Conjunction]],
) -> Iterator[Conjunction]:
    """Clause-body constraints under every consistent choice of table
    entries for the body calls, pruned as soon as a prefix goes
    unsatisfiable."""

    def extend(index: int, conj: Conjunction) -> Iterator[Conjunction]:
        if index == len(slots):
            yield conj
            return
        atom, published = slots[index]
        options = list(live[atom.key]) if published is None else published
        for element in options:
            grown = conjunction(conj | frozenset(instantiate_element(element, atom.args)))
            if FALSE in grown or not _sat(grown):
                continue
            yield from extend(index + 1, grown)

    start = conjunction(base)
    if FALSE in start or not _sat(start):
        return
    yield from extend(0, start)


def compute_abstract_answers(
    loops: Sequence[LoopInfo],
    modes: ModeAssignment,
    domains: Sequence[AnswerDomain],
) -> AnswerTable:
    """Answer tables for the given loops, which must come callee-first
    (as `find_integer_loops` returns them) and carry one AnswerDomain
    per loop predicate between them."""
    pieces: dict[PredKey, tuple[Conjunction, ...]] = {}
    exposed: dict[PredKey, dict[Conjunction, Conjunction]] = {}
    for answer_domain in domains:
        pieces.update(answer_domain.pieces)
        exposed.update(answer_domain.exposed)
    published: AnswerTable = {}
    for loop in loops:
        positions = answer_positions(loop, modes)
        table: dict[PredKey, list[Conjunction]] = {key: [] for key in loop.predicates}
        seen: dict[PredKey, set[Conjunction]] = {key: set() for key in loop.predicates}
        clauses = applicable_clauses(loop, modes)
        changed = True
        while changed:
            changed = False
            for clause in clauses:
                key = clause.key
                base = head_binding_atoms(clause, positions[key]) + body_constraint_atoms(clause)
                slots: list[tuple[UserAtom, Optional[tuple[Conjunction, ...]]]] = []
                for lit in clause.body:
                    if not isinstance(lit, UserAtom):
                        continue
                    if lit.key in table:
                        slots.append((lit, None))
                    elif lit.key in published:
                        slots.append(
                            (lit, tuple(entry.element for entry in published[lit.key]))
                        )
                for candidate in _candidates(conjunction(base), slots, table):
                    for piece in pieces[key]:
                        if piece in seen[key]:
                            continue
                        if _sat(conjunction(candidate | piece)):
                            table[key].append(piece)
                            seen[key].add(piece)
                            changed = True
        for key in sorted(loop.predicates):
            entries: list[AbstractAtom] = []
            reported: set[Conjunction] = set()
            for piece in table[key]:
                element = exposed[key][piece]
                if element not in reported:
                    reported.add(element)
                    entries.append(AbstractAtom(key=key, element=element))
            published[key] = tuple(entries)
    return published
