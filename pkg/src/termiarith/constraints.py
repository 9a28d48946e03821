"""Exact linear constraint solving over the rationals.

This module is the arithmetic engine of the analyzer.  Everything it
handles is a conjunction of linear atoms ``expr rel 0`` with ``rel`` one
of ``<``, ``=<``, ``=``.  Satisfiability and projection are decided by
Gaussian elimination of equalities followed by Fourier-Motzkin
elimination of inequalities; implication is decided by refuting the
negated claim.  All coefficients are `fractions.Fraction` values, so
there is no floating point anywhere.

Rational reasoning is what the callers in this package need: they rely
only on the direction "unsatisfiable over the rationals implies
unsatisfiable over the integers".  When an elimination blows past the
atom cap the solver reports "unknown" internally, and each public entry
point maps that to its safe answer (satisfiable for `is_satisfiable`,
not-implied for `implies`, a weaker conjunction for `project`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import floor, gcd, lcm
from typing import FrozenSet, Iterable, Mapping, Optional, Union

LT = "<"
LE = "=<"
EQ = "="

Rational = Union[int, Fraction]
ExprLike = Union["LinExpr", str, int, Fraction]

#: Cap on the working set of one elimination; past this the result is
#: "unknown" and public entry points degrade to their sound answer.
ATOM_LIMIT = 10_000


@dataclass(frozen=True, order=True)
class LinExpr:
    """A linear expression: a sum of ``coeff*var`` terms plus a constant.

    Terms are kept sorted by variable name with no zero coefficients, so
    structural equality coincides with mathematical equality.
    """

    terms: tuple[tuple[str, Fraction], ...] = ()
    const: Fraction = Fraction(0)

    @staticmethod
    def build(coeffs: Mapping[str, Rational], const: Rational = 0) -> "LinExpr":
        terms = tuple((v, Fraction(c)) for v, c in sorted(coeffs.items()) if c != 0)
        return LinExpr(terms, Fraction(const))

    @staticmethod
    def var(name: str) -> "LinExpr":
        return LinExpr(((name, Fraction(1)),), Fraction(0))

    @staticmethod
    def of(value: Rational) -> "LinExpr":
        return LinExpr((), Fraction(value))

    def coeff(self, var: str) -> Fraction:
        for v, c in self.terms:
            if v == var:
                return c
        return Fraction(0)

    def variables(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.terms)

    def scale(self, k: Rational) -> "LinExpr":
        k = Fraction(k)
        if k == 0:
            return LinExpr()
        return LinExpr(tuple((v, c * k) for v, c in self.terms), self.const * k)

    def substitute(self, var: str, replacement: "LinExpr") -> "LinExpr":
        c = self.coeff(var)
        if c == 0:
            return self
        rest = LinExpr(tuple(t for t in self.terms if t[0] != var), self.const)
        return rest + replacement.scale(c)

    def __add__(self, other: ExprLike) -> "LinExpr":
        other = to_expr(other)
        coeffs = dict(self.terms)
        for v, c in other.terms:
            coeffs[v] = coeffs.get(v, Fraction(0)) + c
        return LinExpr.build(coeffs, self.const + other.const)

    def __sub__(self, other: ExprLike) -> "LinExpr":
        return self + to_expr(other).scale(-1)

    def __neg__(self) -> "LinExpr":
        return self.scale(-1)

    def __str__(self) -> str:
        return render_expr(self)


def to_expr(x: ExprLike) -> LinExpr:
    if isinstance(x, LinExpr):
        return x
    if isinstance(x, str):
        return LinExpr.var(x)
    return LinExpr.of(x)


@dataclass(frozen=True, order=True)
class LinAtom:
    """A canonical atom ``expr rel 0``.

    Built through `make_atom`, which scales coefficients to coprime
    integers (positively, preserving inequality direction) and fixes the
    sign of equalities, so equal constraints are equal values.
    """

    expr: LinExpr
    rel: str

    def __str__(self) -> str:
        return render_atom(self)


def make_atom(expr: ExprLike, rel: str) -> LinAtom:
    if rel not in (LT, LE, EQ):
        raise ValueError(f"unknown relation {rel!r}")
    expr = to_expr(expr)
    numbers = [c for _, c in expr.terms] + [expr.const]
    mult = lcm(*(n.denominator for n in numbers))
    if mult != 1:
        expr = expr.scale(mult)
    ints = [c.numerator for _, c in expr.terms] + [expr.const.numerator]
    g = gcd(*(abs(i) for i in ints))
    if g > 1:
        expr = expr.scale(Fraction(1, g))
    if rel == EQ:
        lead = expr.terms[0][1] if expr.terms else expr.const
        if lead < 0:
            expr = expr.scale(-1)
    return LinAtom(expr, rel)


def atom_lt(lhs: ExprLike, rhs: ExprLike) -> LinAtom:
    return make_atom(to_expr(lhs) - rhs, LT)


def atom_le(lhs: ExprLike, rhs: ExprLike) -> LinAtom:
    return make_atom(to_expr(lhs) - rhs, LE)


def atom_gt(lhs: ExprLike, rhs: ExprLike) -> LinAtom:
    return atom_lt(rhs, lhs)


def atom_ge(lhs: ExprLike, rhs: ExprLike) -> LinAtom:
    return atom_le(rhs, lhs)


def atom_eq(lhs: ExprLike, rhs: ExprLike) -> LinAtom:
    return make_atom(to_expr(lhs) - rhs, EQ)


def negate_atom(atom: LinAtom) -> LinAtom:
    """Negation of a strict or weak inequality (equalities have no
    single-atom negation; `implies` splits them instead)."""
    if atom.rel == LT:
        return make_atom(-atom.expr, LE)
    if atom.rel == LE:
        return make_atom(-atom.expr, LT)
    raise ValueError("cannot negate an equality into a single atom")


def atom_is_true(atom: LinAtom) -> bool:
    if atom.expr.terms:
        return False
    c = atom.expr.const
    if atom.rel == LT:
        return c < 0
    if atom.rel == LE:
        return c <= 0
    return c == 0


def atom_is_false(atom: LinAtom) -> bool:
    return not atom.expr.terms and not atom_is_true(atom)


#: The canonical contradiction, ``1 =< 0``.
FALSE = make_atom(1, LE)

Conjunction = FrozenSet[LinAtom]

#: The empty conjunction is true.
TRUE: Conjunction = frozenset()


def conjunction(atoms: Iterable[LinAtom]) -> Conjunction:
    """Normalize an atom collection: drop trivially true atoms and
    collapse anything containing a trivially false one to {FALSE}."""
    out = set()
    for a in atoms:
        if atom_is_false(a):
            return frozenset((FALSE,))
        if not atom_is_true(a):
            out.add(a)
    return frozenset(out)


def sorted_atoms(conj: Iterable[LinAtom]) -> list[LinAtom]:
    return sorted(conj)


def conjunction_variables(conj: Iterable[LinAtom]) -> frozenset[str]:
    out: set[str] = set()
    for a in conj:
        out |= a.expr.variables()
    return frozenset(out)


def rename_expr(expr: LinExpr, mapping: Mapping[str, str]) -> LinExpr:
    coeffs: dict[str, Fraction] = {}
    for v, c in expr.terms:
        w = mapping.get(v, v)
        coeffs[w] = coeffs.get(w, Fraction(0)) + c
    return LinExpr.build(coeffs, expr.const)


def rename(conj: Iterable[LinAtom], mapping: Mapping[str, str]) -> Conjunction:
    return conjunction(make_atom(rename_expr(a.expr, mapping), a.rel) for a in conj)


class _CapExceeded(Exception):
    pass


def _eliminate(
    atoms: Iterable[LinAtom], keep: frozenset[str], limit: int
) -> Optional[list[LinAtom]]:
    """Eliminate every variable outside `keep`.

    Returns the residual atoms (all over `keep` variables) or None when a
    contradiction is derived.  Raises `_CapExceeded` when the working set
    grows past `limit`.
    """
    work: set[LinAtom] = set()
    for a in atoms:
        if atom_is_false(a):
            return None
        if not atom_is_true(a):
            work.add(a)

    # Gaussian phase: substitute out each equality that mentions a
    # variable scheduled for elimination.
    while True:
        pivot = None
        for a in sorted(work):
            if a.rel == EQ:
                gone = sorted(a.expr.variables() - keep)
                if gone:
                    pivot = (a, gone[0])
                    break
        if pivot is None:
            break
        a, v = pivot
        work.discard(a)
        c = a.expr.coeff(v)
        rest = LinExpr(tuple(t for t in a.expr.terms if t[0] != v), a.expr.const)
        replacement = rest.scale(Fraction(-1) / c)
        nxt: set[LinAtom] = set()
        for b in work:
            nb = make_atom(b.expr.substitute(v, replacement), b.rel)
            if atom_is_false(nb):
                return None
            if not atom_is_true(nb):
                nxt.add(nb)
        work = nxt

    # Fourier-Motzkin phase, cheapest variable first.
    while True:
        remaining = sorted({v for a in work for v in a.expr.variables()} - keep)
        if not remaining:
            break

        def cost(v: str) -> tuple[int, str]:
            ups = sum(1 for a in work if a.expr.coeff(v) > 0)
            downs = sum(1 for a in work if a.expr.coeff(v) < 0)
            return (ups * downs, v)

        v = min(remaining, key=cost)
        upper = sorted(a for a in work if a.expr.coeff(v) > 0)
        lower = sorted(a for a in work if a.expr.coeff(v) < 0)
        work = {a for a in work if a.expr.coeff(v) == 0}
        for up in upper:
            for lo in lower:
                alpha = up.expr.coeff(v)
                beta = -lo.expr.coeff(v)
                combined = up.expr.scale(beta) + lo.expr.scale(alpha)
                rel = LT if LT in (up.rel, lo.rel) else LE
                nb = make_atom(combined, rel)
                if atom_is_false(nb):
                    return None
                if not atom_is_true(nb):
                    work.add(nb)
                if len(work) > limit:
                    raise _CapExceeded()
    return sorted(work)


def _tighten(atom: LinAtom) -> LinAtom:
    """Integer sharpening of a strict atom.  Every variable this solver
    sees ranges over the integers (argument values, term sizes and their
    renamed copies), so when the coefficients are integral, a.x + c < 0
    can be replaced by the stronger a.x <= -c - 1 without losing any
    integer point."""
    if atom.rel != LT or not atom.expr.terms:
        return atom
    if any(c.denominator != 1 for _, c in atom.expr.terms):
        return atom
    bound = -atom.expr.const
    limit = bound - 1 if bound.denominator == 1 else Fraction(floor(bound))
    return make_atom(LinExpr(atom.expr.terms, -limit), LE)


@lru_cache(maxsize=None)
def _solve_sat(conj: Conjunction) -> Optional[bool]:
    """True = satisfiable, False = unsatisfiable, None = cap exceeded."""
    try:
        tightened = [_tighten(a) for a in conj]
        return _eliminate(tightened, frozenset(), ATOM_LIMIT) is not None
    except _CapExceeded:
        return None


def is_satisfiable(conj: Iterable[LinAtom]) -> bool:
    """Satisfiability over the integers, decided by strict-atom
    sharpening followed by exact rational elimination; "unknown" maps to
    True (the sound side)."""
    verdict = _solve_sat(frozenset(conj))
    return True if verdict is None else verdict


def implies(conj: Iterable[LinAtom], atom: LinAtom) -> bool:
    """True iff conj entails atom over the integers, decided by checking
    that conj plus the negated atom is unsatisfiable; "unknown" maps to
    False (the sound side for a decrease proof).

    An equality is entailed iff both of its weak halves are.
    """
    if atom_is_true(atom):
        return True
    if atom.rel == EQ:
        return implies(conj, make_atom(atom.expr, LE)) and implies(
            conj, make_atom(-atom.expr, LE)
        )
    refuter = negate_atom(atom)
    verdict = _solve_sat(conjunction([*conj, refuter]))
    if verdict is None:
        return False
    return not verdict


def implies_all(conj: Iterable[LinAtom], atoms: Iterable[LinAtom]) -> bool:
    conj = frozenset(conj)
    return all(implies(conj, a) for a in sorted_atoms(atoms))


def equivalent(a: Iterable[LinAtom], b: Iterable[LinAtom]) -> bool:
    return implies_all(a, b) and implies_all(b, a)


def project_or_none(conj: Iterable[LinAtom], keep: Iterable[str]) -> Optional[Conjunction]:
    """Exact projection onto `keep`, or None when the cap was hit."""
    keep = frozenset(keep)
    try:
        res = _eliminate(conj, keep, ATOM_LIMIT)
    except _CapExceeded:
        return None
    if res is None:
        return frozenset((FALSE,))
    return simplify(res)


def project(conj: Iterable[LinAtom], keep: Iterable[str]) -> Conjunction:
    """Strongest rational consequence of conj on the `keep` variables.

    On cap exhaustion falls back to dropping every atom that mentions an
    eliminated variable, which is weaker but still sound.
    """
    exact = project_or_none(conj, keep)
    if exact is not None:
        return exact
    keep = frozenset(keep)
    return conjunction(a for a in conj if a.expr.variables() <= keep)


def simplify(conj: Iterable[LinAtom]) -> Conjunction:
    """Drop atoms implied by the rest of the conjunction (greedy, in
    canonical order, so the result is deterministic)."""
    kept = sorted_atoms(conjunction(conj))
    for a in list(kept):
        if a not in kept:
            continue
        rest = [b for b in kept if b != a]
        if implies(frozenset(rest), a):
            kept = rest
    return frozenset(kept)


def _format_term(var: str, coeff: Fraction) -> str:
    if coeff == 1:
        return var
    return f"{coeff}*{var}"


def render_expr(expr: LinExpr) -> str:
    """Readable form with subtraction, e.g. ``100 - arg1``."""
    pieces: list[tuple[str, str]] = []
    for v, c in expr.terms:
        if c > 0:
            pieces.append(("+", _format_term(v, c)))
    if expr.const > 0:
        pieces.append(("+", str(expr.const)))
    for v, c in expr.terms:
        if c < 0:
            pieces.append(("-", _format_term(v, -c)))
    if expr.const < 0:
        pieces.append(("-", str(-expr.const)))
    if not pieces:
        return "0"
    sign, text = pieces[0]
    head = text if sign == "+" else "-" + text
    return head + "".join(f" {s} {t}" for s, t in pieces[1:])


def render_atom(atom: LinAtom) -> str:
    """Source comparison syntax, e.g. ``arg1 > 89`` or ``arg2 =< arg1``."""
    expr = atom.expr
    lhs_terms = [(v, c) for v, c in expr.terms if c > 0]
    rhs_terms = [(v, -c) for v, c in expr.terms if c < 0]
    lhs = _render_sum(lhs_terms, expr.const if expr.const > 0 else None)
    rhs = _render_sum(rhs_terms, -expr.const if expr.const < 0 else None)
    op = {LT: "<", LE: "=<", EQ: "="}[atom.rel]
    if not lhs_terms and rhs_terms:
        lhs, rhs = rhs, lhs
        op = {LT: ">", LE: ">=", EQ: "="}[atom.rel]
    return f"{lhs} {op} {rhs}"


def _render_sum(terms: list[tuple[str, Fraction]], const: Optional[Fraction]) -> str:
    parts = [_format_term(v, c) for v, c in terms]
    if const:
        parts.append(str(const))
    return " + ".join(parts) if parts else "0"


def render_conjunction(conj: Iterable[LinAtom]) -> str:
    atoms = sorted_atoms(conj)
    if not atoms:
        return "true"
    return ", ".join(render_atom(a) for a in atoms)
