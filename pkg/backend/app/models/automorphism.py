"""Automorphisms of F_N: generator maps, elementary moves, composition and Nielsen decomposition.

Move words are products read left to right: ``(m1, m2, ..., mk)`` denotes
``m1 ∘ m2 ∘ ... ∘ mk``, so ``mk`` acts first on a word.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import ClassVar, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from app.core.exceptions import NotAnAutomorphism, UsageError
from app.models.words import (
    Basis,
    Letter,
    Letters,
    ReducedWord,
    cancellation_length,
    concat_letters,
    invert_letters,
)

logger = logging.getLogger(__name__)

# States visited while looking for a length-decreasing move across a plateau.
PLATEAU_STATE_LIMIT = 5000


class MoveKind(str, Enum):
    PERMUTATION = "P"
    INVERSION = "I"
    NIELSEN = "N"


@dataclass(frozen=True)
class Permutation:
    """a_i ↦ a_{images[i-1]}."""

    images: Tuple[int, ...]
    kind: ClassVar[MoveKind] = MoveKind.PERMUTATION

    def __post_init__(self) -> None:
        if sorted(self.images) != list(range(1, len(self.images) + 1)):
            raise UsageError(f"not a permutation of 1..{len(self.images)}: {self.images}")

    @classmethod
    def from_cycle(cls, cycle: Sequence[int], rank: int) -> "Permutation":
        if len(set(cycle)) != len(cycle) or any(not 1 <= i <= rank for i in cycle):
            raise UsageError(f"invalid cycle {tuple(cycle)} for rank {rank}")
        images = list(range(1, rank + 1))
        for pos, i in enumerate(cycle):
            images[i - 1] = cycle[(pos + 1) % len(cycle)]
        return cls(tuple(images))

    def inverse(self) -> "Permutation":
        images = [0] * len(self.images)
        for i, target in enumerate(self.images, start=1):
            images[target - 1] = i
        return Permutation(tuple(images))

    def cycles(self) -> List[Tuple[int, ...]]:
        seen = set()
        out = []
        for start in range(1, len(self.images) + 1):
            if start in seen or self.images[start - 1] == start:
                continue
            cycle = [start]
            seen.add(start)
            nxt = self.images[start - 1]
            while nxt != start:
                cycle.append(nxt)
                seen.add(nxt)
                nxt = self.images[nxt - 1]
            out.append(tuple(cycle))
        return out

    def generator_images(self, rank: int) -> Tuple[Letters, ...]:
        if len(self.images) != rank:
            raise UsageError(f"permutation of {len(self.images)} points used at rank {rank}")
        return tuple((target,) for target in self.images)


@dataclass(frozen=True)
class Inversion:
    """a_i ↦ a_i^-1."""

    i: int
    kind: ClassVar[MoveKind] = MoveKind.INVERSION

    def inverse(self) -> "Inversion":
        return self

    def generator_images(self, rank: int) -> Tuple[Letters, ...]:
        _check_index(self.i, rank)
        return tuple(((-k,) if k == self.i else (k,)) for k in range(1, rank + 1))


@dataclass(frozen=True)
class NielsenRight:
    """a_i ↦ a_i a_j^eps, all other generators fixed."""

    i: int
    j: int
    eps: int = 1
    kind: ClassVar[MoveKind] = MoveKind.NIELSEN

    def __post_init__(self) -> None:
        if self.i == self.j:
            raise UsageError(f"Nielsen move needs distinct generators, got i = j = {self.i}")
        if self.eps not in (1, -1):
            raise UsageError(f"Nielsen exponent must be +1 or -1, got {self.eps}")

    def inverse(self) -> "NielsenRight":
        return NielsenRight(self.i, self.j, -self.eps)

    def generator_images(self, rank: int) -> Tuple[Letters, ...]:
        _check_index(self.i, rank)
        _check_index(self.j, rank)
        return tuple(
            ((k, self.eps * self.j) if k == self.i else (k,)) for k in range(1, rank + 1)
        )


ElementaryMove = Union[Permutation, Inversion, NielsenRight]


def _check_index(i: int, rank: int) -> None:
    if not 1 <= i <= rank:
        raise UsageError(f"generator index {i} out of range for rank {rank}")


def render_move(move: ElementaryMove, basis: Basis) -> str:
    if isinstance(move, NielsenRight):
        return f"N({basis.render_letter(move.i)},{basis.render_letter(move.eps * move.j)})"
    if isinstance(move, Inversion):
        return f"I({basis.render_letter(move.i)})"
    cycles = move.cycles()
    if not cycles:
        return "P()"
    return "; ".join("P(" + "".join(basis.render_letter(i) for i in c) + ")" for c in cycles)


def render_moves(moves: Sequence[ElementaryMove], basis: Basis) -> str:
    return "; ".join(render_move(m, basis) for m in moves)


def invert_moves(moves: Sequence[ElementaryMove]) -> Tuple[ElementaryMove, ...]:
    return tuple(m.inverse() for m in reversed(moves))


def conjugate_moves(
    phi_moves: Sequence[ElementaryMove], psi_moves: Sequence[ElementaryMove]
) -> Tuple[ElementaryMove, ...]:
    """Move word for ψ⁻¹∘φ∘ψ, the expression of φ in the basis ψ(A)."""
    return invert_moves(psi_moves) + tuple(phi_moves) + tuple(psi_moves)


def nielsen_count(moves: Iterable[ElementaryMove]) -> int:
    return sum(1 for m in moves if isinstance(m, NielsenRight))


@dataclass(frozen=True)
class GeneratorMap:
    """Images of a_1..a_N as reduced letter tuples."""

    basis: Basis
    images: Tuple[Letters, ...]
    _inverse_images: Tuple[Letters, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.images) != self.basis.rank:
            raise UsageError(
                f"expected {self.basis.rank} generator images, got {len(self.images)}"
            )
        for i, img in enumerate(self.images, start=1):
            # validates range and reducedness
            ReducedWord(tuple(img), self.basis)
            if not img:
                raise NotAnAutomorphism(
                    f"generator {self.basis.render_letter(i)} is sent to the empty word"
                )
        object.__setattr__(self, "images", tuple(tuple(img) for img in self.images))
        object.__setattr__(
            self, "_inverse_images", tuple(invert_letters(img) for img in self.images)
        )

    @classmethod
    def from_words(cls, words: Sequence[ReducedWord]) -> "GeneratorMap":
        if not words:
            raise UsageError("a generator map needs at least one image")
        return cls(words[0].basis, tuple(w.letters for w in words))

    @classmethod
    def identity(cls, basis: Basis) -> "GeneratorMap":
        return cls(basis, tuple((i,) for i in range(1, basis.rank + 1)))

    def letter_image(self, x: Letter) -> Letters:
        return self.images[x - 1] if x > 0 else self._inverse_images[-x - 1]

    def apply_letters(self, letters: Iterable[Letter]) -> Letters:
        out: List[Letter] = []
        images = self.images
        inverse_images = self._inverse_images
        for x in letters:
            for y in images[x - 1] if x > 0 else inverse_images[-x - 1]:
                if out and out[-1] == -y:
                    out.pop()
                else:
                    out.append(y)
        return tuple(out)

    def image(self, i: int) -> ReducedWord:
        return ReducedWord.trusted(self.images[i - 1], self.basis)

    def is_identity(self) -> bool:
        return all(img == (i,) for i, img in enumerate(self.images, start=1))

    def lipschitz(self) -> int:
        return max(len(img) for img in self.images)

    def render(self) -> List[str]:
        return [
            f"{name} -> {self.basis.render(img)}"
            for name, img in zip(self.basis.names, self.images)
        ]


def compose_maps(outer: GeneratorMap, inner: GeneratorMap) -> GeneratorMap:
    """(outer∘inner)(a_i) = outer(inner(a_i))."""
    if outer.basis != inner.basis:
        raise UsageError("cannot compose maps over different bases")
    images = tuple(outer.apply_letters(img) for img in inner.images)
    if any(not img for img in images):
        raise NotAnAutomorphism("composition sends a generator to the empty word")
    return GeneratorMap(outer.basis, images)


def verify_automorphism(fwd: GeneratorMap, inv: GeneratorMap) -> bool:
    """True iff inv∘fwd and fwd∘inv both fix every generator."""
    if fwd.basis != inv.basis:
        return False
    for i in range(1, fwd.basis.rank + 1):
        if inv.apply_letters(fwd.images[i - 1]) != (i,):
            return False
        if fwd.apply_letters(inv.images[i - 1]) != (i,):
            return False
    return True


def _move_map(move: ElementaryMove, basis: Basis) -> GeneratorMap:
    return GeneratorMap(basis, move.generator_images(basis.rank))


def compose_moves(moves: Sequence[ElementaryMove], basis: Basis) -> GeneratorMap:
    """The generator map of m1∘m2∘...∘mk."""
    current = GeneratorMap.identity(basis)
    for move in moves:
        current = compose_maps(current, _move_map(move, basis))
    return current


@dataclass(frozen=True, eq=False)
class Automorphism:
    """An automorphism with both generator maps, optionally with an elementary factorization."""

    forward: GeneratorMap
    inverse: GeneratorMap
    factorization: Optional[Tuple[ElementaryMove, ...]] = None

    def __post_init__(self) -> None:
        if not verify_automorphism(self.forward, self.inverse):
            raise NotAnAutomorphism("forward and inverse maps are not mutually inverse")
        if self.factorization is not None:
            if compose_moves(self.factorization, self.forward.basis).images != self.forward.images:
                raise UsageError("factorization does not compose to the forward map")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Automorphism):
            return NotImplemented
        return self.forward == other.forward

    def __hash__(self) -> int:
        return hash(self.forward)

    @property
    def basis(self) -> Basis:
        return self.forward.basis

    @classmethod
    def identity(cls, basis: Basis) -> "Automorphism":
        ident = GeneratorMap.identity(basis)
        return cls(ident, ident, ())

    @classmethod
    def from_images(cls, forward: GeneratorMap) -> "Automorphism":
        """Certify ``forward`` by Nielsen decomposition and derive its inverse."""
        moves = nielsen_decompose(forward)
        inverse = compose_moves(invert_moves(moves), forward.basis)
        return cls(forward, inverse, moves)

    @classmethod
    def from_maps(cls, forward: GeneratorMap, inverse: GeneratorMap) -> "Automorphism":
        return cls(forward, inverse, None)

    @classmethod
    def from_moves(cls, moves: Sequence[ElementaryMove], basis: Basis) -> "Automorphism":
        moves = tuple(moves)
        return cls(compose_moves(moves, basis), compose_moves(invert_moves(moves), basis), moves)

    @property
    def nielsen_count(self) -> Optional[int]:
        if self.factorization is None:
            return None
        return nielsen_count(self.factorization)

    def with_factorization(self) -> "Automorphism":
        """Return self, decomposing first if no factorization is attached."""
        if self.factorization is not None:
            return self
        return Automorphism(self.forward, self.inverse, nielsen_decompose(self.forward))

    def is_identity(self) -> bool:
        return self.forward.is_identity()


def apply(phi: Automorphism, w: ReducedWord) -> ReducedWord:
    """The reduced word representing φ(w)."""
    if w.basis != phi.basis:
        raise UsageError("word and automorphism are over different bases")
    return ReducedWord.trusted(phi.forward.apply_letters(w.letters), w.basis)


def compose(outer: Automorphism, inner: Automorphism) -> Automorphism:
    if outer.basis != inner.basis:
        raise UsageError("cannot compose automorphisms over different bases")
    factorization = None
    if outer.factorization is not None and inner.factorization is not None:
        factorization = outer.factorization + inner.factorization
    return Automorphism(
        compose_maps(outer.forward, inner.forward),
        compose_maps(inner.inverse, outer.inverse),
        factorization,
    )


def inverse(phi: Automorphism) -> Automorphism:
    factorization = None if phi.factorization is None else invert_moves(phi.factorization)
    return Automorphism(phi.inverse, phi.forward, factorization)


def power(phi: Automorphism, k: int) -> Automorphism:
    if k < 0:
        return power(inverse(phi), -k)
    result = Automorphism.identity(phi.basis)
    for _ in range(k):
        result = compose(result, phi)
    return result


def stretch_S(phi: Automorphism) -> int:
    """Maximal length of any φ(a_i) or φ⁻¹(a_i)."""
    return max(phi.forward.lipschitz(), phi.inverse.lipschitz())


def elementary_to_automorphism(move: ElementaryMove, basis: Basis) -> Automorphism:
    return Automorphism(_move_map(move, basis), _move_map(move.inverse(), basis), (move,))


def cancellation_bound(phi: Automorphism) -> int:
    """Largest cancellation in φ(x)·φ(y) over reduced two-letter words xy."""
    letters = phi.basis.letters()
    best = 0
    for x in letters:
        fx = phi.forward.letter_image(x)
        for y in letters:
            if y == -x:
                continue
            best = max(best, cancellation_length(fx, phi.forward.letter_image(y)))
    return best


def bounded_cancellation_bound(phi: Automorphism) -> int:
    """An upper bound on the cancellation in φ(u)·φ(v) for any reduced word uv.

    The vertex u lies within Lip(φ⁻¹)/2 of the path traced by φ⁻¹ along the
    geodesic to φ(uv); pushing forward by φ gives ⌊Lip(φ)·Lip(φ⁻¹)/2⌋. The
    bound is symmetric, so it serves φ⁻¹ as well.
    """
    return (phi.forward.lipschitz() * phi.inverse.lipschitz()) // 2


# Nielsen reduction. A tuple move (i, j, eps, side) replaces t_i by
# t_i·t_j^eps (side 0) or t_j^eps·t_i (side 1); on automorphisms it is
# precomposition with the corresponding elementary map.
_TupleMove = Tuple[int, int, int, int]


def _moved_entry(tup: Sequence[Letters], move: _TupleMove) -> Letters:
    i, j, eps, side = move
    tj = tup[j - 1] if eps == 1 else invert_letters(tup[j - 1])
    if side == 0:
        return concat_letters(tup[i - 1], tj)
    return concat_letters(tj, tup[i - 1])


def _tuple_moves(rank: int) -> List[_TupleMove]:
    # Lexicographic descriptor order: i, j, side (right first), eps (+ first).
    return [
        (i, j, eps, side)
        for i in range(1, rank + 1)
        for j in range(1, rank + 1)
        if i != j
        for side in (0, 1)
        for eps in (1, -1)
    ]


def _best_decrease(tup: Sequence[Letters], moves: Sequence[_TupleMove]) -> Optional[_TupleMove]:
    best: Optional[_TupleMove] = None
    best_gain = 0
    for move in moves:
        gain = len(tup[move[0] - 1]) - len(_moved_entry(tup, move))
        if gain > best_gain:
            best, best_gain = move, gain
    return best


def _apply_tuple_move(tup: Tuple[Letters, ...], move: _TupleMove) -> Tuple[Letters, ...]:
    entry = _moved_entry(tup, move)
    if not entry:
        raise NotAnAutomorphism("Nielsen reduction produced the empty word")
    out = list(tup)
    out[move[0] - 1] = entry
    return tuple(out)


def _cross_plateau(
    tup: Tuple[Letters, ...], moves: Sequence[_TupleMove]
) -> Optional[List[_TupleMove]]:
    """Breadth-first search through length-preserving moves for a state that can shrink."""
    start = tup
    parents: Dict[Tuple[Letters, ...], Tuple[Optional[Tuple[Letters, ...]], Optional[_TupleMove]]] = {
        start: (None, None)
    }
    queue = deque([start])
    while queue and len(parents) < PLATEAU_STATE_LIMIT:
        state = queue.popleft()
        if state is not start and _best_decrease(state, moves) is not None:
            path: List[_TupleMove] = []
            cursor: Optional[Tuple[Letters, ...]] = state
            while cursor is not None and parents[cursor][1] is not None:
                prev, move = parents[cursor]
                path.append(move)  # type: ignore[arg-type]
                cursor = prev
            return list(reversed(path))
        for move in moves:
            entry = _moved_entry(state, move)
            if len(entry) != len(state[move[0] - 1]):
                continue
            out = list(state)
            out[move[0] - 1] = entry
            nxt = tuple(out)
            if nxt not in parents:
                parents[nxt] = (state, move)
                queue.append(nxt)
    return None


def _inverse_tuple_move(move: _TupleMove) -> List[ElementaryMove]:
    """Elementary factorization of the inverse of a tuple move's automorphism."""
    i, j, eps, side = move
    if side == 0:
        return [NielsenRight(i, j, -eps)]
    # a_i ↦ a_j^eps·a_i inverts to a_i ↦ a_j^-eps·a_i = I(i)∘N(i,j,eps)∘I(i)
    return [Inversion(i), NielsenRight(i, j, eps), Inversion(i)]


def nielsen_decompose(fwd: GeneratorMap) -> Tuple[ElementaryMove, ...]:
    """Factor ``fwd`` into elementary moves by greedy Nielsen length reduction.

    Raises NotAnAutomorphism when the reduction cannot reach a signed
    permutation of the basis.
    """
    rank = fwd.basis.rank
    moves = _tuple_moves(rank)
    tup: Tuple[Letters, ...] = fwd.images
    applied: List[_TupleMove] = []
    while True:
        move = _best_decrease(tup, moves)
        if move is not None:
            tup = _apply_tuple_move(tup, move)
            applied.append(move)
            continue
        if sum(len(t) for t in tup) == rank:
            break
        path = _cross_plateau(tup, moves)
        if path is None:
            raise NotAnAutomorphism(
                f"Nielsen reduction stalls at total length {sum(len(t) for t in tup)}: "
                + ", ".join(fwd.basis.render(t) for t in tup)
            )
        logger.debug(f"Crossed a Nielsen plateau with {len(path)} length-preserving moves")
        for step in path:
            tup = _apply_tuple_move(tup, step)
            applied.append(step)

    targets = [abs(t[0]) for t in tup]
    if sorted(targets) != list(range(1, rank + 1)):
        raise NotAnAutomorphism(
            "Nielsen reduction ends on a non-basis tuple: "
            + ", ".join(fwd.basis.render(t) for t in tup)
        )

    factorization: List[ElementaryMove] = []
    permutation = Permutation(tuple(targets))
    factorization.extend(Permutation.from_cycle(c, rank) for c in permutation.cycles())
    factorization.extend(Inversion(k) for k, t in enumerate(tup, start=1) if t[0] < 0)
    for move in reversed(applied):
        factorization.extend(_inverse_tuple_move(move))
    return tuple(factorization)
