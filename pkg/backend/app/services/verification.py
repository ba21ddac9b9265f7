"""Seeded randomized invariant suite behind the ``verify`` command.

Each check draws its own instances from one ``random.Random`` so a seed
reproduces the whole run. Failures are collected as violations rather than
raised, so one report covers every check.
"""

import logging
import random
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from app.core.exceptions import InconclusiveOracle, NotAnAutomorphism, ResourceBudgetExceeded, UsageError
from app.models.automorphism import (
    Automorphism,
    ElementaryMove,
    GeneratorMap,
    Inversion,
    NielsenRight,
    Permutation,
    apply,
    compose_moves,
    nielsen_count,
    nielsen_decompose,
    render_moves,
    stretch_S,
)
from app.models.words import Basis, Letters, ReducedWord, concat_letters, next_letters
from app.schemas.results import VerificationReport, Violation
from app.services.cylinders import PrefixSet, covers_at_depth, dual_apply_general, reduce_prefix_set
from app.services.dual import build_collection, dual_apply_fast
from app.services.growth import empirical_growth
from app.services.oracle import OracleConfig, assert_image_equal

logger = logging.getLogger(__name__)

CHECKS = ("reduction", "decomposition", "structure", "agreement", "growth")

# Automorphisms with S(φ) above this are skipped by checks that enumerate extensions.
GENERAL_PATH_STRETCH_LIMIT = 3
GENERAL_PATH_BUDGET = 500_000
# reduce_prefix_set must preserve the cylinders at this depth and agree across this many random orders.
REDUCTION_CHECK_DEPTH = 8
REDUCTION_ORDERS = 5
# Image prefixes compared against the oracle are cut to at most this length.
ORACLE_COMPARE_DEPTH = 4


def random_word(rng: random.Random, basis: Basis, max_length: int, min_length: int = 0) -> ReducedWord:
    length = rng.randint(min_length, max_length)
    letters: List[int] = []
    for _ in range(length):
        letters.append(rng.choice(next_letters(basis.rank, letters[-1] if letters else None)))
    return ReducedWord.trusted(tuple(letters), basis)


def random_move(rng: random.Random, rank: int, nielsen_only: bool = False) -> ElementaryMove:
    kind = "N" if nielsen_only else rng.choice("NNNIP")
    if kind == "N":
        i, j = rng.sample(range(1, rank + 1), 2)
        return NielsenRight(i, j, rng.choice((1, -1)))
    if kind == "I":
        return Inversion(rng.randint(1, rank))
    images = list(range(1, rank + 1))
    rng.shuffle(images)
    return Permutation(tuple(images))


def random_moves(
    rng: random.Random, rank: int, length: int, max_nielsen: Optional[int] = None
) -> List[ElementaryMove]:
    moves: List[ElementaryMove] = []
    while len(moves) < length:
        move = random_move(rng, rank)
        if max_nielsen is not None and isinstance(move, NielsenRight) and nielsen_count(moves) >= max_nielsen:
            continue
        moves.append(move)
    return moves


def random_prefix_set(rng: random.Random, basis: Basis, max_words: int, max_length: int) -> PrefixSet:
    count = rng.randint(1, max_words)
    words = {random_word(rng, basis, max_length, min_length=1).letters for _ in range(count)}
    return PrefixSet(basis, frozenset(words))


def non_automorphism_images(basis: Basis) -> List[GeneratorMap]:
    """Generator maps whose abelianization is not unimodular."""
    a, b = 1, 2
    rest = tuple((k,) for k in range(3, basis.rank + 1))
    candidates: List[Tuple[Letters, Letters]] = [
        ((a, b), (a, b)),
        ((a, a), (b,)),
        ((a, b), (b, a)),
        ((a, a, b), (b,)),
        ((b,), (b,)),
        ((a, b, a), (b,)),
    ]
    return [GeneratorMap(basis, pair + rest) for pair in candidates]


class _Suite:
    def __init__(self, basis: Basis, seed: int, instances: int, budget: int):
        self.basis = basis
        self.rng = random.Random(seed)
        self.instances = instances
        self.budget = budget
        self.report = VerificationReport(seed=seed, rank=basis.rank)

    def fail(self, check: str, detail: str) -> None:
        logger.error(f"❌ {check}: {detail}")
        self.report.violations.append(Violation(check=check, detail=detail))

    def count(self, check: str, n: int = 1) -> None:
        self.report.checks[check] = self.report.checks.get(check, 0) + n

    def reduction(self) -> None:
        for _ in range(self.instances):
            U = random_prefix_set(self.rng, self.basis, 12, 6)
            reduced = reduce_prefix_set(U)
            self.count("reduction")
            if reduce_prefix_set(reduced).words != reduced.words:
                self.fail("reduction", f"not idempotent on {U.render()}")
            depth = max(REDUCTION_CHECK_DEPTH, U.max_length)
            if covers_at_depth(U, depth) != covers_at_depth(reduced, depth):
                self.fail("reduction", f"{U.render()} and {reduced.render()} differ at depth {depth}")
            for _ in range(REDUCTION_ORDERS):
                shuffled = reduce_prefix_set(U, random.Random(self.rng.random()))
                if shuffled.words != reduced.words:
                    self.fail("reduction", f"order dependent on {U.render()}")
                    break

    def decomposition(self) -> None:
        for _ in range(self.instances):
            moves = random_moves(self.rng, self.basis.rank, self.rng.randint(1, 8))
            forward = compose_moves(moves, self.basis)
            self.count("decomposition")
            try:
                recomposed = compose_moves(nielsen_decompose(forward), self.basis)
            except NotAnAutomorphism as e:
                self.fail("decomposition", f"{render_moves(moves, self.basis)} rejected: {e}")
                continue
            if recomposed.images != forward.images:
                self.fail("decomposition", f"{render_moves(moves, self.basis)} does not recompose")
        for fake in non_automorphism_images(self.basis):
            self.count("decomposition")
            try:
                nielsen_decompose(fake)
            except NotAnAutomorphism:
                continue
            self.fail("decomposition", f"accepted non-automorphism {fake.render()}")

    def _small_automorphism(self, max_moves: int) -> Optional[Automorphism]:
        for _ in range(50):
            moves = random_moves(self.rng, self.basis.rank, self.rng.randint(1, max_moves), max_nielsen=4)
            phi = Automorphism.from_moves(moves, self.basis)
            if stretch_S(phi) <= GENERAL_PATH_STRETCH_LIMIT:
                return phi
        return None

    def structure(self) -> None:
        for _ in range(max(1, self.instances // 5)):
            moves = random_moves(self.rng, self.basis.rank, self.rng.randint(1, 6), max_nielsen=6)
            T = build_collection(moves, self.basis)
            phi = T.automorphism
            label = render_moves(moves, self.basis)
            for _ in range(20):
                w = random_word(self.rng, self.basis, 6, min_length=1)
                self.count("structure")
                fast = dual_apply_fast(T, w)
                if len(fast) > T.bound:
                    self.fail("structure", f"card φ*({w}) = {len(fast)} > 2^t for {label}")
                head = apply(phi, ReducedWord.trusted(w.letters[:-1], self.basis))
                expected = {concat_letters(head.letters, s) for s in T.table[w.last].words}
                if reduce_prefix_set(PrefixSet(self.basis, frozenset(expected))).words != fast.words:
                    self.fail("structure", f"φ*({w}) is not φ(w|_1)·U(last) for {label}")
            if stretch_S(phi) > GENERAL_PATH_STRETCH_LIMIT:
                continue
            for x in self.basis.letters():
                self.count("structure")
                x_word = ReducedWord.trusted((x,), self.basis)
                try:
                    general = dual_apply_general(phi, x_word, budget=self.budget)
                except ResourceBudgetExceeded:
                    self.report.inconclusive += 1
                    continue
                if general.words != T.table[x].words:
                    self.fail(
                        "structure",
                        f"U({x_word}) = {T.table[x].render()} but general path gives {general.render()} for {label}",
                    )

    def agreement(self) -> None:
        for _ in range(self.instances):
            phi = self._small_automorphism(4)
            if phi is None:
                continue
            T = build_collection(phi.factorization or (), self.basis)
            u = random_word(self.rng, self.basis, 6, min_length=1)
            label = render_moves(phi.factorization or (), self.basis)
            self.count("agreement")
            try:
                general = dual_apply_general(phi, u, budget=self.budget)
            except ResourceBudgetExceeded:
                self.report.inconclusive += 1
                continue
            fast = dual_apply_fast(T, u)
            if general.words != fast.words:
                self.fail("agreement", f"φ*({u}): fast {fast.render()} vs general {general.render()} for {label}")
                continue
            m = min(max(fast.max_length, 1), ORACLE_COMPARE_DEPTH)
            cfg = OracleConfig(out_depth=m, budget=self.budget)
            try:
                if not assert_image_equal(phi, u, fast, cfg, truncate=m < fast.max_length):
                    self.fail("agreement", f"oracle rejects φ*({u}) = {fast.render()} at depth {m} for {label}")
            except InconclusiveOracle:
                self.report.inconclusive += 1

    def growth(self) -> None:
        for _ in range(max(1, self.instances // 10)):
            moves = random_moves(self.rng, self.basis.rank, self.rng.randint(1, 5), max_nielsen=5)
            T = build_collection(moves, self.basis)
            self.count("growth")
            estimate = empirical_growth(T, kmax=10)
            if estimate.partial:
                self.report.inconclusive += 1
                continue
            problem = estimate.discrepancy()
            if problem is not None:
                self.fail("growth", f"{problem} for {render_moves(moves, self.basis)}")


def run_verification(
    basis: Basis,
    seed: int,
    instances: int = 20,
    checks: Sequence[str] = CHECKS,
    budget: int = GENERAL_PATH_BUDGET,
) -> VerificationReport:
    """Run the named checks; ``budget`` caps each general-path image and oracle run."""
    suite = _Suite(basis, seed, instances, budget)
    runners: Dict[str, Callable[[], None]] = {
        "reduction": suite.reduction,
        "decomposition": suite.decomposition,
        "structure": suite.structure,
        "agreement": suite.agreement,
        "growth": suite.growth,
    }
    for name in checks:
        if name not in runners:
            raise UsageError(f"unknown check {name!r}, expected one of {CHECKS}")
        logger.info(f"🔍 Running {name} checks (seed {seed})")
        runners[name]()
    return suite.report
