"""Pytest configuration and fixtures for DualAut tests."""

import random
from typing import Callable, List

import pytest

from app.models.automorphism import Automorphism, ElementaryMove, NielsenRight
from app.models.words import Basis, ReducedWord
from app.services.cylinders import PrefixSet
from app.services.dual import SuffixTable, build_collection, reset_reduction_counters


@pytest.fixture
def basis2() -> Basis:
    """The basis {a, b}."""
    return Basis.standard(2)


@pytest.fixture
def basis3() -> Basis:
    """The basis {a, b, c}."""
    return Basis.standard(3)


@pytest.fixture
def word(basis2) -> Callable[[str], ReducedWord]:
    """Parse a word over {a, b}."""
    return lambda text: ReducedWord.parse(text, basis2)


@pytest.fixture
def prefix_set(basis2) -> Callable[[str], PrefixSet]:
    """Parse a prefix set over {a, b}."""
    return lambda text: PrefixSet.parse(text, basis2)


@pytest.fixture
def nielsen_moves() -> List[ElementaryMove]:
    """a -> ab, b -> b."""
    return [NielsenRight(1, 2)]


@pytest.fixture
def fibonacci_moves() -> List[ElementaryMove]:
    """N(a,b); N(b,a): a -> ab, b -> bab."""
    return [NielsenRight(1, 2), NielsenRight(2, 1)]


@pytest.fixture
def nielsen(basis2, nielsen_moves) -> Automorphism:
    return Automorphism.from_moves(nielsen_moves, basis2)


@pytest.fixture
def fibonacci(basis2, fibonacci_moves) -> Automorphism:
    return Automorphism.from_moves(fibonacci_moves, basis2)


@pytest.fixture
def nielsen_table(basis2, nielsen_moves) -> SuffixTable:
    return build_collection(nielsen_moves, basis2)


@pytest.fixture
def fibonacci_table(basis2, fibonacci_moves) -> SuffixTable:
    return build_collection(fibonacci_moves, basis2)


@pytest.fixture
def rng() -> random.Random:
    """Seeded generator for randomized grids."""
    return random.Random(20240611)


@pytest.fixture
def clean_reduction_counters():
    """Reduction counters are module state; start every test from zero."""
    reset_reduction_counters()
    yield
    reset_reduction_counters()
