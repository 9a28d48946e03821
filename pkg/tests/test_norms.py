"""Term-size norm and size-relation tests."""

from conftest import corpus_program

from termiarith.constraints import (
    FALSE,
    LinExpr,
    atom_eq,
    atom_ge,
    atom_gt,
    conjunction,
    implies,
    is_satisfiable,
)
from termiarith.norms import (
    head_call_sizes,
    infer_size_relations,
    size_var,
    term_size,
    var_size,
)
from termiarith.syntax import (
    AtomConst,
    Compound,
    FloatConst,
    IntConst,
    Var,
    normalize_program,
    parse_program,
)

APPEND = """
app([], L, L).
app([H|T], L, [H|R]) :- app(T, L, R).
"""


def relations(source_or_name, inline=False):
    if inline:
        program = normalize_program(parse_program(source_or_name))
    else:
        program = corpus_program(source_or_name)
    return infer_size_relations(program)


def sz(name: str) -> LinExpr:
    return LinExpr.var(var_size(name))


def pos(index: int) -> LinExpr:
    return LinExpr.var(size_var(index))


class TestTermSize:
    def test_variable(self):
        assert term_size(Var("X")) == sz("X")

    def test_constants_weigh_nothing(self):
        assert term_size(IntConst(5)) == LinExpr.of(0)
        assert term_size(AtomConst("a")) == LinExpr.of(0)
        assert term_size(FloatConst("0.1")) == LinExpr.of(0)

    def test_compound(self):
        s_x = Compound("s", (Var("X"),))
        assert term_size(s_x) == sz("X") + 1
        assert term_size(Compound("s", (s_x,))) == sz("X") + 2
        triple = Compound("f", (Var("X"), Var("Y"), Var("X")))
        assert term_size(triple) == sz("X") + sz("X") + sz("Y") + 1

    def test_list_counts_cells(self):
        program = parse_program("p([a, b]).")
        arg = program.clauses[0].head.args[0]
        assert term_size(arg) == LinExpr.of(2)


class TestRelations:
    def test_first_argument_larger_in_q(self):
        rel = relations("q_mixed")[("q", 3)]
        assert is_satisfiable(rel)
        assert implies(rel, atom_gt(pos(0), pos(1)))
        assert implies(rel, atom_ge(pos(0), 1))
        assert not implies(rel, atom_eq(pos(0), pos(1) + 1))

    def test_append_length_sum(self):
        rel = relations(APPEND, inline=True)[("app", 3)]
        assert is_satisfiable(rel)
        assert implies(rel, atom_eq(pos(0) + pos(1), pos(2)))

    def test_facts_pin_sizes(self):
        rel = relations("facts")[("f", 1)]
        assert implies(rel, atom_eq(pos(0), 0))

    def test_never_succeeding_predicate(self):
        rel = relations("s")[("s", 1)]
        assert rel == conjunction([FALSE])
        table = relations("p(X) :- u(X).", inline=True)
        assert not is_satisfiable(table[("u", 1)])
        assert not is_satisfiable(table[("p", 1)])

    def test_numeric_programs_stay_trivial(self):
        rel = relations("mc91")[("mc_carthy_91", 2)]
        assert is_satisfiable(rel)
        assert implies(rel, atom_ge(pos(0), 0))
        assert not implies(rel, atom_gt(pos(0), 0))

    def test_deterministic(self):
        for name in ["q_mixed", "gcd", "facts", "mc91"]:
            assert relations(name) == relations(name)


class TestHeadCallSizes:
    def setup_method(self):
        self.program = corpus_program("q_mixed")
        self.table = infer_size_relations(self.program)

    def test_direct_recursion_keeps_sizes(self):
        clause = self.program.clauses[1]
        conj = head_call_sizes(clause, 2, self.table)
        assert implies(conj, atom_eq(LinExpr.var("szh1"), LinExpr.var("szc1")))
        assert implies(conj, atom_eq(LinExpr.var("szh2"), LinExpr.var("szc2")))
        assert not implies(conj, atom_eq(LinExpr.var("szh3"), LinExpr.var("szc3")))

    def test_first_call_strips_one_symbol(self):
        clause = self.program.clauses[2]
        conj = head_call_sizes(clause, 2, self.table)
        assert implies(conj, atom_gt(LinExpr.var("szh1"), LinExpr.var("szc1")))
        assert implies(conj, atom_eq(LinExpr.var("szh1"), LinExpr.var("szc1") + 1))

    def test_second_call_needs_inferred_relation(self):
        clause = self.program.clauses[2]
        conj = head_call_sizes(clause, 3, self.table)
        assert implies(conj, atom_gt(LinExpr.var("szh1"), LinExpr.var("szc1")))
        empty_table = {key: frozenset() for key in self.table}
        weak = head_call_sizes(clause, 3, empty_table)
        assert not implies(weak, atom_gt(LinExpr.var("szh1"), LinExpr.var("szc1")))
