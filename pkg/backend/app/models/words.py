"""Letters, reduced words and the prefix/extension combinatorics of F(A).

A letter is a signed generator index: ``+i`` stands for ``a_i`` and ``-i`` for
its inverse. Word text uses one character per letter, lowercase for a
generator and uppercase for its inverse, so ``"aB"`` is ``a b^-1``. The empty
word renders as ``"1"``.

The tuple-level helpers (``concat_letters``, ``invert_letters``,
``iter_extensions``) are what the enumeration-heavy services run on; the
``ReducedWord`` wrapper is the public value type.
"""

import string
from dataclasses import dataclass
from typing import FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from app.core.exceptions import ResourceBudgetExceeded, UsageError

Letter = int
Letters = Tuple[int, ...]

MIN_RANK = 2
MAX_RANK = 26


def letter_inverse(x: Letter) -> Letter:
    return -x


def generator_of(x: Letter) -> int:
    return abs(x)


def sign_of(x: Letter) -> int:
    return 1 if x > 0 else -1


def letter_key(x: Letter) -> int:
    """Sort key realizing a < A < b < B < ..."""
    return 2 * (abs(x) - 1) + (0 if x > 0 else 1)


def word_key(letters: Sequence[Letter]) -> Tuple[int, ...]:
    return tuple(letter_key(x) for x in letters)


@dataclass(frozen=True)
class Basis:
    """A fixed free basis {a_1, ..., a_N}, named by single lowercase characters."""

    names: Tuple[str, ...]

    def __post_init__(self) -> None:
        if not MIN_RANK <= len(self.names) <= MAX_RANK:
            raise UsageError(f"rank must be between {MIN_RANK} and {MAX_RANK}, got {len(self.names)}")
        for name in self.names:
            if len(name) != 1 or name not in string.ascii_lowercase:
                raise UsageError(f"generator names must be single lowercase letters, got {name!r}")
        if len(set(self.names)) != len(self.names):
            raise UsageError(f"generator names must be distinct: {''.join(self.names)}")

    @classmethod
    def standard(cls, rank: int) -> "Basis":
        if not MIN_RANK <= rank <= MAX_RANK:
            raise UsageError(f"rank must be between {MIN_RANK} and {MAX_RANK}, got {rank}")
        return cls(tuple(string.ascii_lowercase[:rank]))

    @property
    def rank(self) -> int:
        return len(self.names)

    def letters(self) -> Tuple[Letter, ...]:
        """All 2N letters in the order a, A, b, B, ..."""
        out: List[Letter] = []
        for i in range(1, self.rank + 1):
            out.extend((i, -i))
        return tuple(out)

    def parse_letter(self, char: str) -> Letter:
        lower = char.lower()
        if lower not in self.names:
            raise UsageError(f"letter {char!r} is not in the basis {''.join(self.names)}")
        index = self.names.index(lower) + 1
        return index if char.islower() else -index

    def render_letter(self, x: Letter) -> str:
        if x == 0 or abs(x) > self.rank:
            raise UsageError(f"letter index {x} out of range for rank {self.rank}")
        name = self.names[abs(x) - 1]
        return name if x > 0 else name.upper()

    def render(self, letters: Sequence[Letter]) -> str:
        if not letters:
            return "1"
        return "".join(self.render_letter(x) for x in letters)


def is_reduced_letters(letters: Sequence[Letter]) -> bool:
    return all(letters[i + 1] != -letters[i] for i in range(len(letters) - 1))


def free_reduce(letters: Iterable[Letter]) -> Letters:
    stack: List[Letter] = []
    for x in letters:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


def cancellation_length(u: Letters, v: Letters) -> int:
    """Number of letters of u cancelled when reducing u·v (both reduced)."""
    k = 0
    limit = min(len(u), len(v))
    while k < limit and u[-1 - k] == -v[k]:
        k += 1
    return k


def concat_letters(u: Letters, v: Letters) -> Letters:
    k = cancellation_length(u, v)
    if k == 0:
        return u + v
    return u[: len(u) - k] + v[k:]


def invert_letters(u: Letters) -> Letters:
    return tuple(-x for x in reversed(u))


def next_letters(rank: int, last: Optional[Letter]) -> Tuple[Letter, ...]:
    """Letters that may follow ``last`` in a reduced word, in letter order."""
    out: List[Letter] = []
    for i in range(1, rank + 1):
        for x in (i, -i):
            if last is None or x != -last:
                out.append(x)
    return tuple(out)


def extension_count(rank: int, prefix_length: int, depth: int) -> int:
    if depth == 0:
        return 1
    if prefix_length == 0:
        return 2 * rank * (2 * rank - 1) ** (depth - 1)
    return (2 * rank - 1) ** depth


def iter_extensions(rank: int, prefix: Letters, depth: int) -> Iterator[Letters]:
    """Reduced words ``prefix + tail`` with ``len(tail) == depth``, lexicographically."""
    if depth == 0:
        yield prefix
        return
    follow = [next_letters(rank, None)] + [next_letters(rank, x) for x in range(-rank, rank + 1)]

    def successors(last: Optional[Letter]) -> Tuple[Letter, ...]:
        return follow[0] if last is None else follow[last + rank + 1]

    start_last = prefix[-1] if prefix else None
    stack = [iter(successors(start_last))]
    tail: List[Letter] = []
    while stack:
        x = next(stack[-1], None)
        if x is None:
            stack.pop()
            if tail:
                tail.pop()
            continue
        if len(tail) + 1 == depth:
            yield prefix + tuple(tail) + (x,)
            continue
        tail.append(x)
        stack.append(iter(successors(x)))


@dataclass(frozen=True)
class ReducedWord:
    """A freely reduced word over a basis."""

    letters: Letters
    basis: Basis

    def __post_init__(self) -> None:
        rank = self.basis.rank
        for x in self.letters:
            if x == 0 or abs(x) > rank:
                raise UsageError(f"letter index {x} out of range for rank {rank}")
        if not is_reduced_letters(self.letters):
            raise UsageError(f"word {self.basis.render(self.letters)} is not freely reduced")

    @classmethod
    def trusted(cls, letters: Letters, basis: Basis) -> "ReducedWord":
        """Wrap letters already known to be reduced and in range."""
        word = object.__new__(cls)
        object.__setattr__(word, "letters", letters)
        object.__setattr__(word, "basis", basis)
        return word

    @classmethod
    def parse(cls, text: str, basis: Basis) -> "ReducedWord":
        text = text.strip()
        if text in ("", "1"):
            return cls.trusted((), basis)
        return cls(tuple(basis.parse_letter(c) for c in text), basis)

    @classmethod
    def empty(cls, basis: Basis) -> "ReducedWord":
        return cls.trusted((), basis)

    @classmethod
    def from_letters(cls, letters: Iterable[Letter], basis: Basis) -> "ReducedWord":
        """Freely reduce an arbitrary letter sequence."""
        return cls(free_reduce(letters), basis)

    def __str__(self) -> str:
        return self.basis.render(self.letters)

    def __repr__(self) -> str:
        return f"ReducedWord({str(self)!r})"

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __lt__(self, other: "ReducedWord") -> bool:
        return self.key < other.key

    @property
    def key(self) -> Tuple[int, ...]:
        return word_key(self.letters)

    @property
    def is_empty(self) -> bool:
        return not self.letters

    @property
    def first(self) -> Letter:
        if not self.letters:
            raise UsageError("the empty word has no first letter")
        return self.letters[0]

    @property
    def last(self) -> Letter:
        if not self.letters:
            raise UsageError("the empty word has no last letter")
        return self.letters[-1]


def _check_same_basis(u: ReducedWord, v: ReducedWord) -> None:
    if u.basis != v.basis:
        raise UsageError(
            f"words over different bases: {''.join(u.basis.names)} vs {''.join(v.basis.names)}"
        )


def reduce_concat(u: ReducedWord, v: ReducedWord) -> ReducedWord:
    """The reduced word equal to u·v."""
    _check_same_basis(u, v)
    return ReducedWord.trusted(concat_letters(u.letters, v.letters), u.basis)


def invert(w: ReducedWord) -> ReducedWord:
    return ReducedWord.trusted(invert_letters(w.letters), w.basis)


def truncate_right(w: ReducedWord, l: int) -> ReducedWord:
    """w|_l: erase the last l letters, clamping to the empty word."""
    if l < 0:
        raise UsageError(f"truncation length must be non-negative, got {l}")
    keep = max(0, len(w.letters) - l)
    return ReducedWord.trusted(w.letters[:keep], w.basis)


def extend_right(w: ReducedWord, l: int) -> FrozenSet[ReducedWord]:
    """w|^l: all reduced words of length |w|+l with prefix w."""
    if l < 0:
        raise UsageError(f"extension length must be non-negative, got {l}")
    return frozenset(
        ReducedWord.trusted(letters, w.basis)
        for letters in iter_extensions(w.basis.rank, w.letters, l)
    )


def is_prefix(u: ReducedWord, w: ReducedWord) -> bool:
    return len(u.letters) <= len(w.letters) and w.letters[: len(u.letters)] == u.letters


def enumerate_sphere(
    basis: Basis, prefix: ReducedWord, depth: int, budget: Optional[int] = None
) -> Iterator[ReducedWord]:
    """Stream extend_right(prefix, depth) in lexicographic order.

    The size check happens before the first word is produced.
    """
    if prefix.basis != basis:
        raise UsageError("prefix is not a word over the given basis")
    if depth < 0:
        raise UsageError(f"depth must be non-negative, got {depth}")
    if budget is not None:
        required = extension_count(basis.rank, len(prefix), depth)
        if required > budget:
            raise ResourceBudgetExceeded(
                f"sphere of depth {depth} has {required} words, budget is {budget}",
                required=required,
                budget=budget,
            )
    for letters in iter_extensions(basis.rank, prefix.letters, depth):
        yield ReducedWord.trusted(letters, basis)
