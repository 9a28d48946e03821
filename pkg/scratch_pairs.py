"""Scratch: exercise the pair pipeline on the corpus, mimicking the
planned driver ladder rungs by hand."""

import sys

sys.path.insert(0, "/root/pkg/src")
sys.path.insert(0, "/root/pkg/tests")

from conftest import corpus_program
from termiarith.answers import build_answer_domain, compute_abstract_answers
from termiarith.domain import (
    build_domain,
    collect_comparisons,
    infer_comparisons,
    unfold_once,
)
from termiarith.graph import find_integer_loops
from termiarith.modes import infer_argument_modes
from termiarith.pairs import (
    compose_until_fixpoint,
    generate_pairs,
    is_circular,
    prove_pair,
    render_pair,
)
from termiarith.syntax import normalize_program, parse_query_pattern


def setup(name, query, *, infer=False, unfold=()):
    program = corpus_program(name)
    for ci, ai in unfold:
        program = normalize_program(unfold_once(program, ci, ai))
    pattern = parse_query_pattern(query)
    modes = infer_argument_modes(program, pattern)
    loops = find_integer_loops(program, pattern, modes)
    domains = {}
    used = []
    for loop in loops:
        comps = None if infer else collect_comparisons(loop, modes)
        used_inference = comps is None
        if comps is None:
            comps = infer_comparisons(loop, modes)
        domains.update(build_domain(comps))
        used.append(used_inference)
    return program, pattern, modes, loops, domains, used


def run(name, query, *, infer=False, unfold=(), with_answers=False, numeric=True):
    program, pattern, modes, loops, domains, used = setup(
        name, query, infer=infer, unfold=unfold
    )
    answers = None
    if with_answers:
        ads = [
            build_answer_domain(loop, modes, domains, used_inference=u)
            for loop, u in zip(loops, used)
        ]
        answers = compute_abstract_answers(loops, modes, ads)
    base = generate_pairs(
        program,
        pattern,
        modes,
        answers,
        domains=domains if numeric else None,
        numeric=numeric,
    )
    closure = compose_until_fixpoint(base)
    print(
        f"=== {name} {query} infer={infer} unfold={list(unfold)}"
        f" answers={with_answers} numeric={numeric}"
    )
    print(f"  base {len(base)} closure {len(closure)}")
    ok = True
    shown = 0
    for pair in sorted((p for p in closure if is_circular(p)), key=render_pair):
        proof = prove_pair(pair)
        if proof is None:
            ok = False
        shown += 1
        if shown <= 12:
            print(render_pair(pair, proof))
        elif proof is None:
            print("UNPROVED:")
            print(render_pair(pair))
    print(f"  circular {shown}, verdict {'YES' if ok else 'NO'}")
    return ok


print("-- structural-only rung --")
run("s", "s(b)", numeric=False)
run("facts", "f(i)", numeric=False)
run("q_mixed", "q(b,b,i)", numeric=False)
run("loop", "loop(i)", numeric=False)

print("-- numeric rungs --")
run("t", "t(i)")
run("r", "r(i)")
run("p_int", "p(i)")
run("mod", "mod(i,i,f)")
run("p_difficult", "p(i,i)")
run("q_mixed", "q(b,b,i)")
run("loop", "loop(i)")
run("gcd", "gcd(i,i,f)")
run("gcd", "gcd(i,i,f)", with_answers=True)
run("mc91", "mc_carthy_91(i,f)", with_answers=True)
run(
    "mc91",
    "mc_carthy_91(i,f)",
    unfold=[(1, 2)],
    infer=True,
    with_answers=True,
)
