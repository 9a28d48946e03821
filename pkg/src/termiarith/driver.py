"""Analysis driver.

Runs the whole pipeline for one (program, query pattern) task: a first
attempt with structural norms only, the integer-basedness gates, then
an escalation ladder over comparison sources (collected, inferred,
inferred after unfolding), optionally re-run with answer abstraction.
The verdict carries per-loop, per-pair evidence and feeds the text and
JSON report emitters."""

import json
from dataclasses import dataclass
from typing import Optional

from .answers import build_answer_domain, compute_abstract_answers
from .constraints import render_conjunction
from .domain import (
    COMPARISON_CAP,
    DomainTooLarge,
    build_domain,
    collect_comparisons,
    infer_comparisons,
    unfold_once,
)
from .graph import LoopInfo, find_integer_loops
from .modes import infer_argument_modes
from .pairs import (
    CANDIDATE_CAP,
    PAIR_CAP,
    PairCapExceeded,
    PairProof,
    check_forward_positive_cycle,
    compose_until_fixpoint,
    generate_pairs,
    is_circular,
    pair_sort_key,
    prove_pair,
    render_pair,
)
from .syntax import Program, QueryPattern, UserAtom

YES = "YES"
NO = "NO"

NO_HEADLINE = "no termination proof found"


@dataclass(frozen=True)
class AnalysisOptions:
    """Knobs for one analysis run.  Caps must stay positive; they turn
    blow-ups into NO verdicts with diagnostics instead of long runs."""

    max_unfold: int = 1
    answer_abstraction: str = "auto"
    use_inference: bool = True
    candidate_cap: int = CANDIDATE_CAP
    pair_cap: int = PAIR_CAP
    comparison_cap: int = COMPARISON_CAP
    trace: bool = False
    format: str = "text"

    def __post_init__(self):
        if self.answer_abstraction not in ("on", "off", "auto"):
            raise ValueError("answer_abstraction must be on, off or auto")
        if self.format not in ("text", "json"):
            raise ValueError("format must be text or json")
        if min(self.candidate_cap, self.pair_cap, self.comparison_cap) <= 0:
            raise ValueError("caps must be positive")
        if self.max_unfold < 0:
            raise ValueError("max_unfold must be non-negative")


@dataclass(frozen=True)
class PairEvidence:
    """One circular pair of the final run: its query in report form and
    either the discharging proof or None."""

    query: str
    constraint: str
    proof: Optional[str]
    trace: str


@dataclass(frozen=True)
class LoopReport:
    predicates: tuple[str, ...]
    integer_based: bool
    domain: dict[str, tuple[str, ...]]
    pairs: tuple[PairEvidence, ...]


@dataclass(frozen=True)
class Verdict:
    """YES only when every circular pair of the reported run carries a
    proof; diagnostics explain NO verdicts and record the rung log."""

    answer: str
    query: str
    loops: tuple[LoopReport, ...]
    diagnostics: tuple[str, ...]
    method: Optional[str] = None


def _render_query(pattern: QueryPattern) -> str:
    return f"{pattern.pred}({','.join(pattern.modes)})"


def _pred_name(key) -> str:
    name, arity = key
    return f"{name}/{arity}"


def _proof_summaries(circular, candidate_cap, structural_only):
    """(pair, proof text or None) for every circular pair, sorted."""
    out = []
    for pair in sorted(circular, key=pair_sort_key):
        if structural_only:
            passed = check_forward_positive_cycle(pair)
            found = PairProof(method="structural") if passed else None
        else:
            found = prove_pair(pair, candidate_cap=candidate_cap)
        proof = found.describe() if found is not None else None
        out.append((pair, proof, found))
    return out


def _loop_reports(
    loops: list[LoopInfo],
    domains: dict,
    summaries,
) -> tuple[LoopReport, ...]:
    reports = []
    for loop in loops:
        names = tuple(_pred_name(k) for k in sorted(loop.predicates))
        rendered_domain = {
            _pred_name(key): tuple(
                sorted(render_conjunction(piece) for piece in domains[key])
            )
            for key in sorted(loop.predicates)
            if key in domains
        }
        pairs = []
        for pair, proof, found in summaries:
            if pair.query.key not in loop.predicates:
                continue
            name, _ = pair.query.key
            query = f"{name}({','.join(pair.query.modes)})"
            pairs.append(
                PairEvidence(
                    query=query,
                    constraint=render_conjunction(pair.query.constraint),
                    proof=proof,
                    trace=render_pair(pair, found),
                )
            )
        reports.append(
            LoopReport(
                predicates=names,
                integer_based=loop.is_integer_based,
                domain=rendered_domain,
                pairs=tuple(pairs),
            )
        )
    return tuple(reports)


def _structural_stage(program, pattern, modes, loops, options, log):
    """The first attempt: pairs over structural norms only.  Returns the
    loop reports and whether every circular pair passed."""
    try:
        base = generate_pairs(program, pattern, modes, None, numeric=False)
        closure = compose_until_fixpoint(base, cap=options.pair_cap)
    except PairCapExceeded as exc:
        log(f"resource cap: {exc}")
        log("structural attempt (simplified norm analysis): aborted by resource cap")
        return (), False
    circular = [p for p in closure if is_circular(p)]
    summaries = _proof_summaries(circular, options.candidate_cap, structural_only=True)
    proved = sum(1 for _, proof, _ in summaries if proof is not None)
    log(
        "structural attempt (simplified norm analysis):"
        f" {proved} of {len(summaries)} circular pairs proved"
    )
    reports = _loop_reports(loops, {}, summaries)
    return reports, proved == len(summaries)


def _first_recursive_targets(program: Program, loops: list[LoopInfo]):
    """(clause index, body index) of the first in-loop body atom of each
    recursive clause, in descending clause order so unfolding one target
    does not shift the next."""
    component = {}
    for loop in loops:
        for key in loop.predicates:
            component[key] = loop.predicates
    targets = []
    for i, clause in enumerate(program.clauses):
        preds = component.get(clause.key)
        if preds is None:
            continue
        for j, lit in enumerate(clause.body):
            if isinstance(lit, UserAtom) and lit.key in preds:
                targets.append((i, j))
                break
    return sorted(targets, reverse=True)


def _unfold_recursive_clauses(program: Program, pattern: QueryPattern) -> Program:
    modes = infer_argument_modes(program, pattern)
    loops = find_integer_loops(program, pattern, modes)
    for i, j in _first_recursive_targets(program, loops):
        program = unfold_once(program, i, j)
    return program


def _check_comparison_cap(comparisons, cap: int):
    for key, atoms in comparisons.items():
        if len(atoms) > cap:
            raise DomainTooLarge(
                f"comparison set of {_pred_name(key)} has {len(atoms)} atoms,"
                f" past the configured cap of {cap}"
            )


def _numeric_stage(program, pattern, options, prefer_inference, with_answers):
    """One rung of the ladder.  Raises DomainTooLarge or PairCapExceeded
    when a resource cap is hit."""
    modes = infer_argument_modes(program, pattern)
    loops = find_integer_loops(program, pattern, modes)
    domains: dict = {}
    answer_domains = []
    notes: list[str] = []
    for loop in loops:
        comparisons = None
        used_inference = False
        if not prefer_inference:
            comparisons = collect_comparisons(loop, modes)
        if comparisons is None:
            if not options.use_inference:
                notes.append(
                    f"comparisons of loop {loop.describe()} cannot be read off"
                    " directly and inference is disabled"
                )
                return False, (), notes
            comparisons = infer_comparisons(loop, modes)
            used_inference = True
        _check_comparison_cap(comparisons, options.comparison_cap)
        query_domain = build_domain(comparisons)
        domains.update(query_domain)
        if with_answers:
            answer_domains.append(
                build_answer_domain(
                    loop, modes, query_domain, used_inference=used_inference
                )
            )
    table = (
        compute_abstract_answers(loops, modes, answer_domains)
        if with_answers
        else None
    )
    base = generate_pairs(program, pattern, modes, table, domains=domains)
    closure = compose_until_fixpoint(base, cap=options.pair_cap)
    circular = [p for p in closure if is_circular(p)]
    summaries = _proof_summaries(
        circular, options.candidate_cap, structural_only=False
    )
    reports = _loop_reports(loops, domains, summaries)
    proved = sum(1 for _, proof, _ in summaries if proof is not None)
    notes.append(f"{proved} of {len(summaries)} circular pairs proved")
    return proved == len(summaries), reports, notes


def analyse_termination(
    program: Program,
    pattern: QueryPattern,
    options: AnalysisOptions = AnalysisOptions(),
) -> Verdict:
    """Decide YES (universal termination proved for the query pattern)
    or NO (no proof found).  Never raises on resource caps."""
    query = _render_query(pattern)
    diagnostics: list[str] = []
    log = diagnostics.append

    modes = infer_argument_modes(program, pattern)
    diagnostics.extend(modes.conflicts)
    loops = find_integer_loops(program, pattern, modes)

    if not loops:
        if pattern.key not in program.index:
            log(f"{_pred_name(pattern.key)} has no clauses; every query fails finitely")
        else:
            log(
                "no recursive loop is reachable from the query;"
                " every derivation is finitely deep"
            )
        return Verdict(YES, query, (), tuple(diagnostics), method="acyclic program")

    reports, all_proved = _structural_stage(
        program, pattern, modes, loops, options, log
    )
    if all_proved:
        if any(report.pairs for report in reports):
            method = "structural norm decrease (simplified analysis)"
        else:
            method = "no circular pairs reachable under the query modes"
        return Verdict(YES, query, reports, tuple(diagnostics), method=method)
    fallback_reports = reports or _loop_reports(loops, {}, [])

    if not any(loop.is_numerical for loop in loops):
        for loop in loops:
            diagnostics.extend(loop.diagnostics)
        log("no numerical loop: integer reasoning cannot go beyond the norm analysis")
        return Verdict(NO, query, fallback_reports, tuple(diagnostics))

    gate = [l for l in loops if l.is_numerical and not l.is_integer_based]
    if gate:
        for loop in gate:
            diagnostics.extend(loop.diagnostics)
        log("a numerical loop is not integer based; the analysis does not apply")
        return Verdict(NO, query, fallback_reports, tuple(diagnostics))

    rungs: list[tuple[str, Program, bool]] = [
        ("collected comparisons", program, False)
    ]
    if options.use_inference:
        rungs.append(("inferred comparisons", program, True))
        unfolded = program
        for round_number in range(1, options.max_unfold + 1):
            unfolded = _unfold_recursive_clauses(unfolded, pattern)
            rungs.append(
                (
                    f"unfold x{round_number} + inferred comparisons",
                    unfolded,
                    True,
                )
            )

    if options.answer_abstraction == "on":
        answer_passes = (True,)
    elif options.answer_abstraction == "off":
        answer_passes = (False,)
    else:
        answer_passes = (False, True)

    for with_answers in answer_passes:
        for label, rung_program, prefer_inference in rungs:
            name = label + (" + answer abstraction" if with_answers else "")
            try:
                ok, rung_reports, notes = _numeric_stage(
                    rung_program, pattern, options, prefer_inference, with_answers
                )
            except (DomainTooLarge, PairCapExceeded) as exc:
                log(f"resource cap: {exc}")
                log(f"rung {name}: aborted by resource cap")
                continue
            for note in notes:
                log(f"rung {name}: {note}")
            if ok:
                return Verdict(YES, query, rung_reports, tuple(diagnostics), method=name)
            if rung_reports:
                fallback_reports = rung_reports

    return Verdict(NO, query, fallback_reports, tuple(diagnostics))


# ---------------------------------------------------------------------------
# Reports.


def verdict_payload(verdict: Verdict) -> dict:
    """The stable JSON shape of a verdict."""
    return {
        "answer": verdict.answer,
        "loops": [
            {
                "predicates": list(report.predicates),
                "integer_based": report.integer_based,
                "domain": {k: list(v) for k, v in report.domain.items()},
                "pairs": [
                    {
                        "query": pair.query,
                        "constraint": pair.constraint,
                        "proof": pair.proof,
                    }
                    for pair in report.pairs
                ],
            }
            for report in verdict.loops
        ],
        "diagnostics": list(verdict.diagnostics),
    }


def render_report(verdict: Verdict, format: str = "text", trace: bool = False) -> str:
    """Human-readable text or the stable JSON document.  Diagnostics are
    part of the JSON payload only; text callers emit them separately."""
    if format == "json":
        return json.dumps(verdict_payload(verdict), indent=2)

    lines: list[str] = []
    if verdict.answer == YES:
        lines.append(f"YES: termination proved for query {verdict.query}")
        if verdict.method is not None:
            lines.append(f"method: {verdict.method}")
    else:
        lines.append(f"NO: {NO_HEADLINE} for query {verdict.query}")
    for report in verdict.loops:
        basis = "integer based" if report.integer_based else "not integer based"
        lines.append(f"loop {', '.join(report.predicates)} ({basis})")
        for pred, pieces in sorted(report.domain.items()):
            lines.append(f"  domain of {pred}:")
            for piece in pieces:
                lines.append(f"    {piece}")
        for pair in report.pairs:
            if pair.proof is None:
                lines.append(f"  unproved: {pair.query} where {pair.constraint}")
            else:
                lines.append(
                    f"  proved: {pair.query} where {pair.constraint}"
                    f" by {pair.proof}"
                )
    if verdict.answer == NO:
        unproven = [
            pair
            for report in verdict.loops
            for pair in report.pairs
            if pair.proof is None
        ]
        if unproven:
            lines.append("first unproven pair:")
            lines.append(unproven[0].trace)
    if trace:
        for report in verdict.loops:
            for pair in report.pairs:
                lines.append(pair.trace)
    return "\n".join(lines)
