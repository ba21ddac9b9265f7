"""Multi-cylinders as finite prefix sets, their reduction, and the general image of a cylinder.

A finite set U of reduced words stands for the multi-cylinder C¹_U, the set of
infinite reduced words that begin with some element of U. ``reduce_prefix_set``
brings U to its unique minimal form; ``cylinder_image_general`` evaluates the
finite formula for φ(C¹_u) and ``cylinder_image_adaptive`` computes the same
multi-cylinder by refining the extension depth branch by branch.
"""

import logging
import random
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import DefaultDict, FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple

from app.core.config import settings
from app.core.exceptions import ResourceBudgetExceeded, UsageError
from app.models.automorphism import Automorphism, bounded_cancellation_bound, stretch_S
from app.models.words import (
    Basis,
    Letters,
    ReducedWord,
    concat_letters,
    extension_count,
    iter_extensions,
    next_letters,
    word_key,
)

logger = logging.getLogger(__name__)

STRATEGIES = ("auto", "formula", "adaptive")


@dataclass(frozen=True)
class PrefixSet:
    """A finite set of reduced words representing the multi-cylinder C¹_U."""

    basis: Basis
    words: FrozenSet[Letters]
    reduced_flag: bool = field(default=False, compare=False)

    @classmethod
    def from_words(cls, words: Iterable[ReducedWord], basis: Basis) -> "PrefixSet":
        letters = set()
        for w in words:
            if w.basis != basis:
                raise UsageError("prefix set words must share one basis")
            letters.add(w.letters)
        return cls(basis, frozenset(letters))

    @classmethod
    def parse(cls, text: str, basis: Basis) -> "PrefixSet":
        """Accept ``{ab, BA, b}``, ``ab,BA,b`` or whitespace-separated words."""
        body = text.strip()
        if body.startswith("{") and body.endswith("}"):
            body = body[1:-1]
        tokens = [t for t in re.split(r"[,\s]+", body) if t]
        return cls.from_words((ReducedWord.parse(t, basis) for t in tokens), basis)

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self) -> Iterator[ReducedWord]:
        return iter(self.sorted_words())

    def __contains__(self, item: object) -> bool:
        if isinstance(item, ReducedWord):
            return item.letters in self.words
        return item in self.words

    def sorted_words(self) -> List[ReducedWord]:
        return [ReducedWord.trusted(w, self.basis) for w in sorted(self.words, key=word_key)]

    def strings(self) -> List[str]:
        return [str(w) for w in self.sorted_words()]

    def render(self) -> str:
        return "{" + ", ".join(self.strings()) + "}"

    def to_json(self) -> List[str]:
        return self.strings()

    @property
    def max_length(self) -> int:
        return max((len(w) for w in self.words), default=0)


def _star_size(basis: Basis, parent: Letters) -> int:
    return 2 * basis.rank if not parent else 2 * basis.rank - 1


def reduce_prefix_set(U: PrefixSet, rng: Optional[random.Random] = None) -> PrefixSet:
    """Return the unique reduced set U_min with the same multi-cylinder.

    Iterates to a fixpoint: drop words having a proper prefix in the set,
    collapse complete stars (longest parents first), collapse to {1} when the
    empty word appears. ``rng`` shuffles the processing order; the result
    does not depend on it.
    """
    basis = U.basis
    words: Set[Letters] = set(U.words)
    if () in words:
        return PrefixSet(basis, frozenset({()}), True)

    changed = True
    while changed:
        changed = False

        candidates = list(words)
        if rng is not None:
            rng.shuffle(candidates)
        for w in candidates:
            if any(w[:k] in words for k in range(len(w))):
                words.discard(w)
                changed = True

        children: DefaultDict[Letters, Set[Letters]] = defaultdict(set)
        for w in words:
            children[w[:-1]].add(w)
        parents = list(children)
        if rng is not None:
            rng.shuffle(parents)
        else:
            parents.sort(key=lambda v: (-len(v), word_key(v)))
        for v in parents:
            present = children[v] & words
            if len(present) == _star_size(basis, v):
                words -= present
                words.add(v)
                changed = True

        if () in words:
            return PrefixSet(basis, frozenset({()}), True)

    return PrefixSet(basis, frozenset(words), True)


def covers_at_depth(U: PrefixSet, d: int) -> FrozenSet[ReducedWord]:
    """All reduced words of length d having some element of U as prefix."""
    if d < U.max_length:
        raise UsageError(f"depth {d} is below the longest word length {U.max_length}")
    out: Set[Letters] = set()
    for u in U.words:
        out.update(iter_extensions(U.basis.rank, u, d - len(u)))
    return frozenset(ReducedWord.trusted(w, U.basis) for w in out)


def prefixes_at_depth(U: PrefixSet, d: int) -> FrozenSet[ReducedWord]:
    """Length-d prefixes of the infinite words in C¹_U; words longer than d are truncated."""
    out: Set[Letters] = set()
    for u in U.words:
        if len(u) >= d:
            out.add(u[:d])
        else:
            out.update(iter_extensions(U.basis.rank, u, d - len(u)))
    return frozenset(ReducedWord.trusted(w, U.basis) for w in out)


def sets_equivalent(U: PrefixSet, V: PrefixSet) -> bool:
    """True iff C¹_U = C¹_V."""
    if U.basis != V.basis:
        raise UsageError("prefix sets over different bases")
    return reduce_prefix_set(U).words == reduce_prefix_set(V).words


def extension_depth(phi: Automorphism) -> int:
    """k = S⁴ + S³ + S² for the finite image formula."""
    s = stretch_S(phi)
    return s**4 + s**3 + s**2


def cylinder_image_general(
    phi: Automorphism, u: ReducedWord, budget: Optional[int] = None
) -> PrefixSet:
    """The raw set {φ(u')|_{S²} : u' ∈ u|^k}, not reduced."""
    if u.basis != phi.basis:
        raise UsageError("word and automorphism are over different bases")
    budget = settings.ENUMERATION_BUDGET if budget is None else budget
    s = stretch_S(phi)
    k = extension_depth(phi)
    required = extension_count(u.basis.rank, len(u), k)
    if required > budget:
        raise ResourceBudgetExceeded(
            f"the image formula needs {required} extensions at depth k={k} (S={s}), "
            f"budget is {budget}; use the adaptive image or the fast dual path",
            required=required,
            budget=budget,
        )
    truncation = s * s
    raw: Set[Letters] = set()
    for ext in iter_extensions(u.basis.rank, u.letters, k):
        image = phi.forward.apply_letters(ext)
        raw.add(image[: max(0, len(image) - truncation)])
    logger.debug(f"Image formula for {u}: k={k}, {required} extensions, {len(raw)} prefixes")
    return PrefixSet(u.basis, frozenset(raw))


def cylinder_image_adaptive(
    phi: Automorphism, u: ReducedWord, budget: Optional[int] = None
) -> PrefixSet:
    """Raw prefixes p with C¹_p ⊂ φ(C¹_u) whose union is exactly φ(C¹_u).

    Each branch u' of the extension tree of u is refined one letter at a time
    until p = φ(u') minus C letters certifies itself: φ⁻¹(p) minus C letters
    has u as prefix, so φ⁻¹(C¹_p) ⊂ C¹_u. C is the bounded cancellation bound,
    which makes φ(C¹_{u'}) ⊂ C¹_p for every branch as well.
    """
    if u.basis != phi.basis:
        raise UsageError("word and automorphism are over different bases")
    budget = settings.ENUMERATION_BUDGET if budget is None else budget
    rank = u.basis.rank
    margin = bounded_cancellation_bound(phi)
    target = u.letters
    forward = phi.forward
    backward = phi.inverse

    raw: Set[Letters] = set()
    frontier: List[Tuple[Letters, Letters]] = [(target, forward.apply_letters(target))]
    evaluations = 0
    depth = 0
    while frontier:
        refined: List[Tuple[Letters, Letters]] = []
        for word, image in frontier:
            evaluations += 1
            if evaluations > budget:
                raise ResourceBudgetExceeded(
                    f"adaptive image of {u} exceeded {budget} evaluations at depth {depth}",
                    required=evaluations,
                    budget=budget,
                )
            p = image[: max(0, len(image) - margin)]
            back = backward.apply_letters(p)
            q = back[: max(0, len(back) - margin)]
            if len(q) >= len(target) and q[: len(target)] == target:
                raw.add(p)
                continue
            last = word[-1] if word else None
            for y in next_letters(rank, last):
                refined.append((word + (y,), concat_letters(image, forward.letter_image(y))))
        frontier = refined
        depth += 1
    logger.debug(
        f"Adaptive image of {u}: margin {margin}, depth {depth}, "
        f"{evaluations} evaluations, {len(raw)} prefixes"
    )
    return PrefixSet(u.basis, frozenset(raw))


def cylinder_image(
    phi: Automorphism,
    u: ReducedWord,
    strategy: str = "auto",
    budget: Optional[int] = None,
) -> Tuple[PrefixSet, str]:
    """Raw image set together with the route that produced it."""
    if strategy not in STRATEGIES:
        raise UsageError(f"unknown strategy {strategy!r}, expected one of {STRATEGIES}")
    budget = settings.ENUMERATION_BUDGET if budget is None else budget
    if strategy == "formula":
        return cylinder_image_general(phi, u, budget), "formula"
    if strategy == "auto":
        required = extension_count(u.basis.rank, len(u), extension_depth(phi))
        if required <= budget:
            return cylinder_image_general(phi, u, budget), "formula"
        logger.debug(f"Image formula needs {required} extensions; using adaptive refinement")
    return cylinder_image_adaptive(phi, u, budget), "adaptive"


def dual_apply_general(
    phi: Automorphism,
    u: ReducedWord,
    strategy: str = "auto",
    budget: Optional[int] = None,
) -> PrefixSet:
    """φ*_A(u): the reduced set U with C¹_U = φ(C¹_u)."""
    raw, _route = cylinder_image(phi, u, strategy, budget)
    return reduce_prefix_set(raw)
