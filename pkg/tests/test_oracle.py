"""Tests for the boundary oracle."""

import pytest
from pydantic import ValidationError

from app.core.exceptions import InconclusiveOracle, ResourceBudgetExceeded, UsageError
from app.models.automorphism import Automorphism, stretch_S
from app.models.words import ReducedWord, iter_extensions
from app.services.cylinders import dual_apply_general
from app.services.oracle import (
    OracleConfig,
    assert_image_equal,
    boundary_image_prefixes,
    image_difference,
    starting_depth,
)


def strings(prefixes):
    return sorted(str(w) for w in prefixes)


class TestOracleConfig:
    """Test cases for OracleConfig."""

    def test_defaults_follow_settings(self):
        cfg = OracleConfig()
        assert cfg.out_depth == 2
        assert cfg.max_depth == 40

    def test_invalid_depths(self):
        with pytest.raises(ValidationError):
            OracleConfig(out_depth=0)
        with pytest.raises(ValidationError):
            OracleConfig(probe_depth_start=5, max_depth=3)

    def test_starting_depth(self, nielsen):
        identity = Automorphism.identity(nielsen.basis)
        assert starting_depth(identity, OracleConfig(out_depth=2)) == 2
        assert starting_depth(nielsen, OracleConfig(out_depth=2)) == 4
        assert starting_depth(nielsen, OracleConfig(out_depth=2, max_depth=3)) == 3


class TestBoundaryImagePrefixes:
    """Test cases for boundary_image_prefixes."""

    def test_identity(self, basis2, word):
        phi = Automorphism.identity(basis2)
        out = boundary_image_prefixes(phi, word("a"), OracleConfig(out_depth=2))
        assert strings(out) == ["aB", "aa", "ab"]

    def test_nielsen_letters(self, nielsen, word):
        assert strings(boundary_image_prefixes(nielsen, word("b"), OracleConfig(out_depth=1))) == ["A", "b"]
        assert strings(boundary_image_prefixes(nielsen, word("B"), OracleConfig(out_depth=2))) == ["BB", "Ba"]

    def test_cancellation_beyond_one_letter(self, nielsen, word):
        """bAbA... maps to AA..., so AA is reached from C_b."""
        out = strings(boundary_image_prefixes(nielsen, word("b"), OracleConfig(out_depth=2)))
        assert "AA" in out
        assert out == ["AA", "AB", "Ab", "bB", "ba", "bb"]

    def test_tiny_budget(self, fibonacci, word):
        with pytest.raises(InconclusiveOracle) as exc:
            boundary_image_prefixes(fibonacci, word("a"), OracleConfig(budget=3))
        assert isinstance(exc.value, ResourceBudgetExceeded)
        assert exc.value.budget == 3

    def test_depth_cap(self, basis2, word):
        phi = Automorphism.identity(basis2)
        with pytest.raises(InconclusiveOracle):
            boundary_image_prefixes(phi, word("a"), OracleConfig(out_depth=2, max_depth=2))

    def test_basis_mismatch(self, nielsen, basis3):
        with pytest.raises(UsageError):
            boundary_image_prefixes(nielsen, ReducedWord.parse("c", basis3))


class TestAssertImageEqual:
    """Test cases for comparing a claimed image against the oracle."""

    def test_agreement(self, nielsen, word, prefix_set):
        assert assert_image_equal(nielsen, word("b"), prefix_set("{A, b}"))
        assert assert_image_equal(nielsen, word("b"), prefix_set("{AA, Ab, AB, b}"))

    def test_disagreement(self, nielsen, word, prefix_set):
        missing, extra = image_difference(nielsen, word("b"), prefix_set("{b, a}"))
        assert strings(missing) == ["AA", "AB", "Ab"]
        assert strings(extra) == ["aB", "aa", "ab"]
        assert not assert_image_equal(nielsen, word("b"), prefix_set("{b}"))

    def test_out_depth_too_small(self, nielsen, word, prefix_set):
        with pytest.raises(UsageError):
            image_difference(nielsen, word("b"), prefix_set("{bab}"), OracleConfig(out_depth=2))

    def test_truncated_comparison(self, fibonacci, word, prefix_set):
        """U(a) = {a, Ba, BB} compared on its first letter only."""
        cfg = OracleConfig(out_depth=1)
        assert assert_image_equal(fibonacci, word("a"), prefix_set("{a, Ba, BB}"), cfg, truncate=True)
        with pytest.raises(UsageError):
            image_difference(fibonacci, word("a"), prefix_set("{a, Ba, BB}"), cfg)

    def test_truncated_disagreement(self, fibonacci, word, prefix_set):
        missing, extra = image_difference(
            fibonacci, word("a"), prefix_set("{b}"), OracleConfig(out_depth=1), truncate=True
        )
        assert strings(missing) == ["B", "a"]
        assert strings(extra) == ["b"]


@pytest.mark.slow
class TestOracleGrid:
    """The general image and the oracle agree on small words."""

    @pytest.mark.parametrize("length", [1, 2])
    def test_nielsen_words(self, nielsen, basis2, length):
        for letters in iter_extensions(basis2.rank, (), length):
            u = ReducedWord.trusted(letters, basis2)
            U = dual_apply_general(nielsen, u)
            cfg = OracleConfig(out_depth=max(2, U.max_length))
            assert assert_image_equal(nielsen, u, U, cfg), str(u)

    def test_fibonacci_letters(self, fibonacci, basis2):
        assert stretch_S(fibonacci) <= 3
        for x in basis2.letters():
            u = ReducedWord.trusted((x,), basis2)
            U = dual_apply_general(fibonacci, u)
            cfg = OracleConfig(out_depth=U.max_length)
            assert assert_image_equal(fibonacci, u, U, cfg), str(u)
