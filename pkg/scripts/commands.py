#!/usr/bin/env python3
"""
Command runners for the DualAut CLI.

Each runner takes a validated CommandSpec and returns the exit code together
with the text written to stdout. Status messages go through the logger so
stdout carries only the result.
"""

from typing import Callable, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from app.core.config import settings
from app.core.exceptions import DualAutError, InconclusiveOracle, ResourceBudgetExceeded, UsageError
from app.models.automorphism import Automorphism, render_moves, stretch_S
from app.models.words import Basis, ReducedWord
from app.schemas.results import (
    CollectionResult,
    DecomposeResult,
    DualResult,
    GrowthReport,
    ImageResult,
    OracleCheckResult,
)
from app.services.cylinders import PrefixSet, cylinder_image, reduce_prefix_set, extension_depth
from app.services.dual import SuffixTable, dual_apply_fast, suffix_table_for
from app.services.growth import build_transition_matrix, empirical_growth, witness_lines
from app.services.oracle import OracleConfig, image_difference
from app.services.verification import CHECKS, GENERAL_PATH_BUDGET, run_verification
from scripts.spec_parser import parse_automorphism_spec, parse_word
from scripts.utils import dump_json, print_error, print_status, print_success, print_warning, read_text_file

COMMANDS = ("image", "dual", "collection", "growth", "verify", "decompose", "oracle-check")

CommandName = Literal["image", "dual", "collection", "growth", "verify", "decompose", "oracle-check"]


class CommandSpec(BaseModel):
    """One CLI invocation after argument parsing."""

    command: CommandName
    rank: Optional[int] = Field(None, ge=2, le=26, description="Rank N of the free group")
    moves: Optional[str] = Field(None, description="Inline move word, e.g. 'N(a,b); N(b,a)'")
    auto_file: Optional[str] = Field(None, description="Automorphism file, '-' for stdin")
    words: List[str] = Field(default_factory=list, description="Positional word arguments")
    json_output: bool = False
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED)
    depth: Optional[int] = Field(None, ge=1, description="Oracle out_depth m")
    budget: Optional[int] = Field(None, ge=1, description="Enumeration budget")
    kmax: int = Field(default_factory=lambda: settings.GROWTH_KMAX, ge=1)
    tol: float = Field(default_factory=lambda: settings.GROWTH_TOLERANCE, gt=0)
    strategy: Literal["auto", "formula", "adaptive"] = "auto"
    instances: int = Field(20, ge=1, description="Instances per verify check")
    checks: List[str] = Field(default_factory=lambda: list(CHECKS))

    @model_validator(mode="after")
    def check_sources(self) -> "CommandSpec":
        if self.command != "verify":
            if (self.moves is None) == (self.auto_file is None):
                raise ValueError("give exactly one of --moves or --auto")
        elif self.rank is None:
            self.rank = 2
        unknown = [c for c in self.checks if c not in CHECKS]
        if unknown:
            raise ValueError(f"unknown checks {unknown}, expected some of {list(CHECKS)}")
        return self


def load_automorphism(spec: CommandSpec) -> Automorphism:
    if spec.auto_file is not None:
        text = read_text_file(spec.auto_file)
    else:
        text = f"moves: {spec.moves}"
    return parse_automorphism_spec(text, spec.rank)


def _one_word(spec: CommandSpec, basis: Basis) -> ReducedWord:
    if len(spec.words) != 1:
        raise UsageError(f"{spec.command} takes exactly one word, got {len(spec.words)}")
    return parse_word(spec.words[0], basis)


def _render(model: BaseModel, spec: CommandSpec, text_lines: List[str]) -> str:
    if spec.json_output:
        return dump_json(model.model_dump(mode="json", by_alias=True))
    return "\n".join(text_lines)


def run_image(spec: CommandSpec) -> Tuple[int, str]:
    phi = load_automorphism(spec)
    u = _one_word(spec, phi.basis)
    raw, route = cylinder_image(phi, u, spec.strategy, spec.budget)
    reduced = reduce_prefix_set(raw)
    print_status(f"Image of C¹_{u} computed by the {route} route")
    result = ImageResult(
        word=str(u),
        route=route,
        stretch=stretch_S(phi),
        depth=extension_depth(phi),
        raw=raw.strings(),
        reduced=reduced.strings(),
    )
    lines = [f"raw ({route}): {raw.render()}", f"reduced: {reduced.render()}"]
    return 0, _render(result, spec, lines)


def _general_or_none(phi: Automorphism, w: ReducedWord, spec: CommandSpec) -> Tuple[Optional[PrefixSet], Optional[str]]:
    try:
        raw, route = cylinder_image(phi, w, spec.strategy, spec.budget)
    except ResourceBudgetExceeded as e:
        print_warning(f"General path skipped: {e}")
        return None, None
    return reduce_prefix_set(raw), route


def run_dual(spec: CommandSpec) -> Tuple[int, str]:
    phi = load_automorphism(spec)
    w = _one_word(spec, phi.basis)
    T = suffix_table_for(phi)
    fast = dual_apply_fast(T, w)
    general, route = _general_or_none(phi, w, spec)
    agree = None if general is None else general.words == fast.words
    result = DualResult(
        word=str(w),
        fast=fast.strings(),
        general=None if general is None else general.strings(),
        route=route,
        agree=agree,
    )
    lines = [fast.render()]
    if general is not None and not agree:
        lines.append(f"general ({route}): {general.render()}")
    code = 0
    if agree is False:
        print_error(f"Fast path {fast.render()} and general path {general.render()} disagree on {w}")
        code = 2
    return code, _render(result, spec, lines)


def _collection(spec: CommandSpec) -> Tuple[Automorphism, SuffixTable]:
    phi = load_automorphism(spec).with_factorization()
    return phi, suffix_table_for(phi)


def run_collection(spec: CommandSpec) -> Tuple[int, str]:
    phi, T = _collection(spec)
    result = CollectionResult(
        t=T.nielsen_count,
        bound=T.bound,
        max_cardinality=T.max_cardinality,
        reduction_fired=T.reduction_fired,
        moves=render_moves(phi.factorization or (), phi.basis),
        table=T.to_json(),
    )
    lines = [f"U({phi.basis.render_letter(x)}) = {T.table[x].render()}" for x in phi.basis.letters()]
    lines.append(f"t = {T.nielsen_count}, max card {T.max_cardinality} <= {T.bound}")
    return 0, _render(result, spec, lines)


def run_growth(spec: CommandSpec) -> Tuple[int, str]:
    _phi, T = _collection(spec)
    estimate = empirical_growth(T, spec.kmax, spec.tol, spec.budget)
    matrix = build_transition_matrix(T)
    consistent = estimate.consistent()
    problem = estimate.discrepancy()
    # a truncated sequence cannot establish a gap
    contradicted = problem is not None and not estimate.partial
    if estimate.partial:
        print_warning(f"Empirical sequence was cut short by the iteration budget at k={len(estimate.empirical)}")
    if contradicted:
        print_error(f"Growth rate contradicted by the empirical sequence: {problem}")
    result = GrowthReport(
        lambda_=estimate.lambda_matrix,
        matrix=matrix.to_json(),
        letter_order=matrix.letter_names(),
        empirical=estimate.empirical,
        t=T.nielsen_count,
        tail_rate=estimate.tail_rate,
        limsup_estimate=estimate.limsup_estimate,
        partial=estimate.partial,
        consistent=consistent,
        discrepancy=problem,
        witness=T.to_json() if contradicted else None,
    )
    lines = [f"lambda = {estimate.lambda_matrix:.12f}"]
    lines.extend(f"k={p.k} card={p.card} ratio={p.ratio:.6f}" for p in estimate.empirical)
    if not contradicted:
        return 0, _render(result, spec, lines)
    lines.append(f"INCONSISTENT: {problem}")
    lines.extend(witness_lines(T, estimate))
    return 2, _render(result, spec, lines)


def run_verify(spec: CommandSpec) -> Tuple[int, str]:
    basis = Basis.standard(spec.rank or 2)
    print_status(f"Running verification suite with seed {spec.seed}")
    report = run_verification(basis, spec.seed, spec.instances, spec.checks, spec.budget or GENERAL_PATH_BUDGET)
    lines = [f"seed {report.seed}, rank {report.rank}"]
    lines.extend(f"{name}: {count}" for name, count in sorted(report.checks.items()))
    lines.append(f"inconclusive: {report.inconclusive}")
    lines.extend(f"VIOLATION {v.check}: {v.detail}" for v in report.violations)
    if report.ok:
        print_success(f"All checks passed (seed {spec.seed})")
        return 0, _render(report, spec, lines)
    print_error(f"{len(report.violations)} violations (seed {spec.seed})")
    return 2, _render(report, spec, lines)


def run_decompose(spec: CommandSpec) -> Tuple[int, str]:
    phi = load_automorphism(spec).with_factorization()
    moves = phi.factorization or ()
    result = DecomposeResult(
        moves=render_moves(moves, phi.basis),
        t=phi.nielsen_count or 0,
        images=phi.forward.render(),
    )
    return 0, _render(result, spec, [result.moves or "P()"])


def run_oracle_check(spec: CommandSpec) -> Tuple[int, str]:
    phi = load_automorphism(spec)
    if not 1 <= len(spec.words) <= 2:
        raise UsageError("oracle-check takes a word and an optional prefix set")
    u = parse_word(spec.words[0], phi.basis)
    if len(spec.words) == 2:
        claimed = PrefixSet.parse(spec.words[1], phi.basis)
    else:
        claimed = dual_apply_fast(suffix_table_for(phi), u)
    out_depth = max(spec.depth or settings.ORACLE_OUT_DEPTH, claimed.max_length)
    cfg = OracleConfig(out_depth=out_depth, budget=spec.budget or settings.ENUMERATION_BUDGET)
    missing, extra = image_difference(phi, u, claimed, cfg)
    agree = not missing and not extra
    result = OracleCheckResult(
        word=str(u),
        out_depth=out_depth,
        claimed=claimed.strings(),
        agree=agree,
        oracle_only=sorted((str(w) for w in missing)),
        claimed_only=sorted((str(w) for w in extra)),
    )
    lines = [f"{'agree' if agree else 'DISAGREE'}: φ(C¹_{u}) vs {claimed.render()} at depth {out_depth}"]
    if not agree:
        lines.append(f"oracle only: {result.oracle_only}")
        lines.append(f"claimed only: {result.claimed_only}")
        return 2, _render(result, spec, lines)
    return 0, _render(result, spec, lines)


RUNNERS: Dict[str, Callable[[CommandSpec], Tuple[int, str]]] = {
    "image": run_image,
    "dual": run_dual,
    "collection": run_collection,
    "growth": run_growth,
    "verify": run_verify,
    "decompose": run_decompose,
    "oracle-check": run_oracle_check,
}


def run(spec: CommandSpec) -> Tuple[int, str]:
    """Execute a command; library errors become their exit codes."""
    try:
        return RUNNERS[spec.command](spec)
    except InconclusiveOracle as e:
        print_error(f"Oracle inconclusive: {e}")
        return e.exit_code, ""
    except DualAutError as e:
        print_error(f"{type(e).__name__}: {e}")
        return e.exit_code, ""
    except OSError as e:
        print_error(f"Cannot read input: {e}")
        return 1, ""
