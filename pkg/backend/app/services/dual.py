"""Suffix tables: the 2N sets U(x) with φ*(w) = φ(w|_1)·U(last letter of w).

Elementary moves get their tables from the fundamental formulas; tables of
products are assembled by composing with one elementary table at a time.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from itertools import islice
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Set

from app.core.config import settings
from app.core.exceptions import PropertyViolation, ResourceBudgetExceeded, UsageError
from app.models.automorphism import (
    Automorphism,
    ElementaryMove,
    NielsenRight,
    compose,
    elementary_to_automorphism,
)
from app.models.words import Basis, Letter, Letters, ReducedWord, concat_letters
from app.services.cylinders import PrefixSet, reduce_prefix_set

logger = logging.getLogger(__name__)

# How often reduction changed a freshly assembled set, by call site.
REDUCTION_COUNTERS: Counter = Counter()


def reset_reduction_counters() -> None:
    REDUCTION_COUNTERS.clear()


@dataclass(frozen=True)
class SuffixTable:
    """The collection {U(x) : x ∈ A ∪ A⁻¹} attached to an automorphism."""

    automorphism: Automorphism
    table: Mapping[Letter, PrefixSet]
    nielsen_count: int
    reduction_fired: int = 0

    def __post_init__(self) -> None:
        basis = self.automorphism.basis
        if set(self.table) != set(basis.letters()):
            raise UsageError(f"a suffix table needs exactly {2 * basis.rank} entries")
        bound = self.bound
        for x, entry in self.table.items():
            if not entry.words or () in entry.words:
                raise UsageError(f"U({basis.render_letter(x)}) must be a nonempty set of nonempty words")
            if len(entry) > bound:
                raise PropertyViolation(
                    f"U({basis.render_letter(x)}) has {len(entry)} words, above the 2^t bound {bound}"
                )

    @property
    def basis(self) -> Basis:
        return self.automorphism.basis

    @property
    def bound(self) -> int:
        return 2**self.nielsen_count

    @property
    def max_cardinality(self) -> int:
        return max(len(entry) for entry in self.table.values())

    def entry(self, x: Letter) -> PrefixSet:
        return self.table[x]

    def last_letter_profile(self, x: Letter) -> Dict[Letter, int]:
        """How many words of U(x) end in each letter."""
        profile: Dict[Letter, int] = {}
        for w in self.table[x].words:
            profile[w[-1]] = profile.get(w[-1], 0) + 1
        return profile

    def to_json(self) -> Dict[str, List[str]]:
        return {self.basis.render_letter(x): self.table[x].to_json() for x in self.basis.letters()}


def _singleton_table(phi: Automorphism) -> Dict[Letter, PrefixSet]:
    basis = phi.basis
    return {
        x: PrefixSet(basis, frozenset({phi.forward.letter_image(x)}), True) for x in basis.letters()
    }


def identity_suffix_table(basis: Basis) -> SuffixTable:
    phi = Automorphism.identity(basis)
    return SuffixTable(phi, _singleton_table(phi), 0)


def elementary_suffix_table(move: ElementaryMove, basis: Basis) -> SuffixTable:
    """Fundamental formulas: a ↦ ab, and letter permutations/inversions."""
    phi = elementary_to_automorphism(move, basis)
    if not isinstance(move, NielsenRight):
        return SuffixTable(phi, _singleton_table(phi), 0)

    a = move.i
    b = move.eps * move.j
    entries: Dict[Letter, Set[Letters]] = {x: {(x,)} for x in basis.letters()}
    entries[a] = {(a,)}
    entries[-a] = {(-b, -a)}
    entries[b] = {(b,), (-a,)}
    entries[-b] = {(-b, -b), (-b, a)}
    table = {x: PrefixSet(basis, frozenset(words), True) for x, words in entries.items()}
    return SuffixTable(phi, table, 1)


def _fast_raw(T: SuffixTable, w: Letters) -> Set[Letters]:
    if not w:
        return {()}
    head = T.automorphism.forward.apply_letters(w[:-1])
    return {concat_letters(head, tail) for tail in T.table[w[-1]].words}


def compose_suffix_tables(outer: SuffixTable, inner: SuffixTable) -> SuffixTable:
    """Table of outer∘inner: U(x) = ⋃_{s ∈ U_inner(x)} outer*(s)."""
    if outer.basis != inner.basis:
        raise UsageError("cannot compose suffix tables over different bases")
    basis = outer.basis
    table: Dict[Letter, PrefixSet] = {}
    fired = 0
    for x in basis.letters():
        raw: Set[Letters] = set()
        for s in inner.table[x].words:
            raw |= _fast_raw(outer, s)
        reduced = reduce_prefix_set(PrefixSet(basis, frozenset(raw)))
        if reduced.words != raw:
            fired += 1
            REDUCTION_COUNTERS["composition"] += 1
        table[x] = reduced
    return SuffixTable(
        compose(outer.automorphism, inner.automorphism),
        table,
        outer.nielsen_count + inner.nielsen_count,
        outer.reduction_fired + inner.reduction_fired + fired,
    )


def build_collection(moves: Sequence[ElementaryMove], basis: Basis) -> SuffixTable:
    """Suffix table of m1∘m2∘...∘mk, built from mk outward."""
    table = identity_suffix_table(basis)
    for move in reversed(tuple(moves)):
        table = compose_suffix_tables(elementary_suffix_table(move, basis), table)
    logger.debug(
        f"Built suffix table for {len(moves)} moves: t={table.nielsen_count}, "
        f"max card {table.max_cardinality}, reductions {table.reduction_fired}"
    )
    return table


def suffix_table_for(phi: Automorphism) -> SuffixTable:
    """Suffix table of any automorphism, decomposing it first if needed."""
    factored = phi.with_factorization()
    table = build_collection(factored.factorization or (), phi.basis)
    return SuffixTable(factored, table.table, table.nielsen_count, table.reduction_fired)


def dual_apply_fast(T: SuffixTable, w: ReducedWord) -> PrefixSet:
    """φ*(w) = reduce(φ(w|_1)·U(last(w)))."""
    if w.basis != T.basis:
        raise UsageError("word and suffix table are over different bases")
    raw = _fast_raw(T, w.letters)
    reduced = reduce_prefix_set(PrefixSet(w.basis, frozenset(raw)))
    if reduced.words != raw:
        REDUCTION_COUNTERS["fast_path"] += 1
        logger.debug(f"Reduction fired on the fast path for {w}")
    return reduced


def iterate_dual_sets(
    T: SuffixTable, x: Letter, budget: Optional[int] = None
) -> Iterator[PrefixSet]:
    """Yield (φ^k)*(x) for k = 1, 2, ..."""
    budget = settings.ITERATION_BUDGET if budget is None else budget
    basis = T.basis
    current = T.table[x]
    k = 1
    while True:
        yield current
        raw: Set[Letters] = set()
        for w in current.words:
            raw |= _fast_raw(T, w)
            if len(raw) > budget:
                raise ResourceBudgetExceeded(
                    f"(φ^{k + 1})*({basis.render_letter(x)}) exceeds {budget} words",
                    required=len(raw),
                    budget=budget,
                )
        current = reduce_prefix_set(PrefixSet(basis, frozenset(raw)))
        k += 1


def dual_iterate(T: SuffixTable, x: Letter, k: int, budget: Optional[int] = None) -> PrefixSet:
    """The reduced set (φ^k)*(x)."""
    if k < 1:
        raise UsageError(f"iteration count must be positive, got {k}")
    if x not in T.table:
        raise UsageError(f"letter {x} is not in the basis")
    return next(islice(iterate_dual_sets(T, x, budget), k - 1, None))
