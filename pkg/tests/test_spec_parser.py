"""Tests for the automorphism file parser."""

import pytest

from app.core.exceptions import NotAnAutomorphism, SpecSyntaxError, UsageError
from app.models.automorphism import Inversion, NielsenRight, Permutation
from app.models.words import Basis
from scripts.spec_parser import parse_automorphism_spec, parse_move, parse_moves, parse_word

BASIS2 = Basis.standard(2)


class TestParseMoves:
    """Test cases for move tokens."""

    def test_tokens(self):
        assert parse_moves("N(a,b); N(a,B); I(b); P(ab)", BASIS2) == [
            NielsenRight(1, 2),
            NielsenRight(1, 2, -1),
            Inversion(2),
            Permutation((2, 1)),
        ]

    def test_whitespace_and_empty(self):
        assert parse_moves(" N( a , b ) ;; ", BASIS2) == [NielsenRight(1, 2)]
        assert parse_moves("", BASIS2) == []
        assert parse_move("P()", BASIS2) == []

    @pytest.mark.parametrize("token", ["N(A,b)", "N(a)", "N(ab,b)", "I(B)", "Q(a)", "P(aB)", "N(a,a)"])
    def test_bad_tokens(self, token):
        with pytest.raises(SpecSyntaxError):
            parse_move(token, BASIS2)

    def test_letter_outside_basis(self):
        with pytest.raises(SpecSyntaxError):
            parse_move("N(a,c)", BASIS2)

    def test_error_column(self):
        with pytest.raises(SpecSyntaxError) as exc:
            parse_automorphism_spec("moves: N(a,b); Q(b)")
        assert (exc.value.line, exc.value.column) == (1, 16)


class TestParseAutomorphismSpec:
    """Test cases for parse_automorphism_spec."""

    def test_image_lines(self):
        phi = parse_automorphism_spec("a -> ab\nb -> b\n")
        assert phi.forward.images == ((1, 2), (2,))
        assert phi.inverse.images == ((1, -2), (2,))

    def test_moves_line(self):
        phi = parse_automorphism_spec("moves: N(a,b); N(b,a)")
        assert phi.forward.render() == ["a -> ab", "b -> bab"]
        assert phi.factorization == (NielsenRight(1, 2), NielsenRight(2, 1))

    def test_comments_and_blank_lines(self):
        text = "# fibonacci\n\nmoves: N(a,b); N(b,a)  # a -> ab, b -> bab\n"
        assert parse_automorphism_spec(text).forward.render() == ["a -> ab", "b -> bab"]

    def test_inverse_block(self):
        phi = parse_automorphism_spec("a -> ab\nb -> b\ninverse:\na -> aB\nb -> b\n")
        assert phi.inverse.images == ((1, -2), (2,))
        assert phi.factorization is None

    def test_wrong_inverse_rejected(self):
        with pytest.raises(NotAnAutomorphism):
            parse_automorphism_spec("a -> ab\nb -> b\ninverse:\na -> ab\nb -> b\n")

    def test_images_and_moves_agree(self):
        phi = parse_automorphism_spec("a -> ab\nb -> b\nmoves: N(a,b)\n")
        assert phi.factorization == (NielsenRight(1, 2),)
        with pytest.raises(UsageError):
            parse_automorphism_spec("a -> ab\nb -> b\nmoves: N(b,a)\n")

    def test_rank_inference(self):
        assert parse_automorphism_spec("moves: N(a,c)").basis.rank == 3
        assert parse_automorphism_spec("moves: P()").is_identity()
        assert parse_automorphism_spec("moves: I(a)", rank=4).basis.rank == 4
        assert parse_automorphism_spec("a -> b\nb -> c\nc -> a").basis.rank == 3

    def test_image_lines_are_free_reduced(self):
        phi = parse_automorphism_spec("a -> abBb\nb -> b")
        assert phi.forward.images == ((1, 2), (2,))

    def test_not_an_automorphism(self):
        with pytest.raises(NotAnAutomorphism):
            parse_automorphism_spec("a -> ab\nb -> ab")

    def test_bad_letter_position(self):
        with pytest.raises(SpecSyntaxError) as exc:
            parse_automorphism_spec("a -> ab\nb -> bx")
        assert (exc.value.line, exc.value.column) == (2, 7)

    def test_bad_line(self):
        with pytest.raises(SpecSyntaxError) as exc:
            parse_automorphism_spec("a -> ab\n  b => b")
        assert (exc.value.line, exc.value.column) == (2, 3)

    def test_duplicates(self):
        with pytest.raises(SpecSyntaxError) as exc:
            parse_automorphism_spec("a -> a\na -> b")
        assert exc.value.line == 2
        with pytest.raises(SpecSyntaxError):
            parse_automorphism_spec("a -> ab\nb -> b\ninverse:\ninverse:")
        with pytest.raises(SpecSyntaxError):
            parse_automorphism_spec("moves: I(a)\nmoves: I(b)")

    def test_missing_content(self):
        with pytest.raises(UsageError):
            parse_automorphism_spec("# nothing here\n")
        with pytest.raises(UsageError):
            parse_automorphism_spec("a -> ab\n")
        with pytest.raises(UsageError):
            parse_automorphism_spec("moves: I(a)", rank=1)


class TestParseWord:
    """Test cases for word arguments."""

    def test_words(self):
        assert str(parse_word("aB", BASIS2)) == "aB"
        assert parse_word(" 1 ", BASIS2).is_empty

    @pytest.mark.parametrize("text", ["a-b", "c", "aA", "1a"])
    def test_rejected(self, text):
        with pytest.raises(UsageError):
            parse_word(text, BASIS2)
