"""
Parser for automorphism files and inline move words.

File grammar, one item per line, ``#`` starts a comment:

    a -> ab            generator image (one line per generator)
    b -> b
    inverse:           optional; image lines after it describe φ⁻¹
    a -> aB
    b -> b
    moves: N(a,b); I(b); P(ab)

Either the image lines or a ``moves:`` line must be present. When both are
given they have to describe the same map.
"""

import re
import string
from typing import Dict, List, Optional, Tuple

from app.core.exceptions import SpecSyntaxError, UsageError
from app.models.automorphism import (
    Automorphism,
    ElementaryMove,
    GeneratorMap,
    Inversion,
    NielsenRight,
    Permutation,
    compose_moves,
)
from app.models.words import MAX_RANK, MIN_RANK, Basis, ReducedWord, free_reduce

IMAGE_LINE = re.compile(r"^\s*([a-z])\s*->\s*(\S*)\s*$")
MOVE_TOKEN = re.compile(r"^\s*([NIP])\s*\(\s*([^)]*?)\s*\)\s*$")
WORD_TEXT = re.compile(r"^(1|[a-zA-Z]+)$")


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].rstrip()


def _infer_rank(moves_text: str) -> int:
    """Smallest rank covering every letter named inside the move tokens."""
    letters = "".join(re.findall(r"\(([^)]*)\)", moves_text))
    highest = max((string.ascii_lowercase.index(c.lower()) + 1 for c in letters if c.isalpha()), default=0)
    return max(MIN_RANK, highest)


def parse_move(token: str, basis: Basis, line: int = 1, column: int = 1) -> List[ElementaryMove]:
    """Parse one move token; ``P(...)`` may expand to nothing for the identity."""
    match = MOVE_TOKEN.match(token)
    if not match:
        raise SpecSyntaxError(f"expected N(x,y), I(x) or P(cycle), got {token.strip()!r}", line, column)
    kind, body = match.group(1), match.group(2)
    try:
        if kind == "N":
            parts = [p.strip() for p in body.split(",")]
            if len(parts) != 2 or any(len(p) != 1 for p in parts):
                raise SpecSyntaxError(f"N takes two letters, got {body!r}", line, column)
            if not parts[0].islower():
                raise SpecSyntaxError(f"the moved generator must be lowercase, got {parts[0]!r}", line, column)
            i = basis.parse_letter(parts[0])
            y = basis.parse_letter(parts[1])
            return [NielsenRight(i, abs(y), 1 if y > 0 else -1)]
        if kind == "I":
            if len(body) != 1 or not body.islower():
                raise SpecSyntaxError(f"I takes one lowercase letter, got {body!r}", line, column)
            return [Inversion(basis.parse_letter(body))]
        cycle = body.replace(",", "").replace(" ", "")
        if not cycle:
            return []
        if not cycle.islower():
            raise SpecSyntaxError(f"P takes lowercase generator names, got {body!r}", line, column)
        indices = [basis.parse_letter(c) for c in cycle]
        return [Permutation.from_cycle(indices, basis.rank)]
    except SpecSyntaxError:
        raise
    except UsageError as e:
        raise SpecSyntaxError(str(e), line, column) from e


def parse_moves(text: str, basis: Basis, line: int = 1, column: int = 1) -> List[ElementaryMove]:
    """Parse ``N(a,b); I(b); P(ab)``. Empty text is the identity."""
    moves: List[ElementaryMove] = []
    offset = 0
    for token in text.split(";"):
        stripped = token.strip()
        if stripped:
            lead = len(token) - len(token.lstrip())
            moves.extend(parse_move(stripped, basis, line, column + offset + lead))
        offset += len(token) + 1
    return moves


def _parse_image(word: str, basis: Basis, line: int, column: int) -> Tuple[int, ...]:
    if not WORD_TEXT.match(word):
        raise SpecSyntaxError(f"expected a word over letters or '1', got {word!r}", line, column)
    if word == "1":
        return ()
    letters = []
    for offset, char in enumerate(word):
        try:
            letters.append(basis.parse_letter(char))
        except UsageError as e:
            raise SpecSyntaxError(str(e), line, column + offset) from e
    return free_reduce(letters)


def _image_map(
    entries: Dict[str, Tuple[str, int, int]], basis: Basis, label: str
) -> GeneratorMap:
    missing = [name for name in basis.names if name not in entries]
    if missing:
        raise UsageError(f"{label} lacks images for {', '.join(missing)}")
    images = []
    for name in basis.names:
        word, line, column = entries[name]
        images.append(_parse_image(word, basis, line, column))
    return GeneratorMap(basis, tuple(images))


def parse_automorphism_spec(text: str, rank: Optional[int] = None) -> Automorphism:
    """Parse an automorphism file into a verified Automorphism."""
    forward: Dict[str, Tuple[str, int, int]] = {}
    backward: Dict[str, Tuple[str, int, int]] = {}
    moves_text: Optional[Tuple[str, int, int]] = None
    in_inverse = False

    for number, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        lead = len(line) - len(line.lstrip()) + 1
        stripped = line.strip()
        if stripped == "inverse:":
            if in_inverse:
                raise SpecSyntaxError("duplicate inverse: block", number, lead)
            in_inverse = True
            continue
        if stripped.startswith("moves:"):
            if moves_text is not None:
                raise SpecSyntaxError("duplicate moves: line", number, lead)
            body = line[line.index("moves:") + len("moves:"):]
            moves_text = (body, number, line.index("moves:") + len("moves:") + 1)
            continue
        match = IMAGE_LINE.match(line)
        if not match:
            raise SpecSyntaxError(f"expected 'x -> word', 'inverse:' or 'moves:', got {stripped!r}", number, lead)
        name = match.group(1)
        target = backward if in_inverse else forward
        if name in target:
            raise SpecSyntaxError(f"generator {name} has two images", number, match.start(1) + 1)
        target[name] = (match.group(2), number, match.start(2) + 1)

    if not forward and moves_text is None:
        raise UsageError("automorphism file has neither image lines nor a moves: line")
    if backward and not forward:
        raise UsageError("an inverse: block needs forward image lines")

    if rank is None:
        if forward:
            rank = len(forward)
        else:
            assert moves_text is not None
            rank = _infer_rank(moves_text[0])
    if not MIN_RANK <= rank <= MAX_RANK:
        raise UsageError(f"rank must be between {MIN_RANK} and {MAX_RANK}, got {rank}")
    if forward and len(forward) != rank:
        raise UsageError(f"file gives {len(forward)} generator images but rank is {rank}")
    basis = Basis.standard(rank)

    moves: Optional[List[ElementaryMove]] = None
    if moves_text is not None:
        moves = parse_moves(moves_text[0], basis, moves_text[1], moves_text[2])

    if not forward:
        assert moves is not None
        return Automorphism.from_moves(moves, basis)

    fwd = _image_map(forward, basis, "the forward map")
    if moves is not None and compose_moves(moves, basis).images != fwd.images:
        raise UsageError("the moves: line does not compose to the given generator images")
    if backward:
        inv = _image_map(backward, basis, "the inverse: block")
        phi = Automorphism.from_maps(fwd, inv)
        return phi if moves is None else Automorphism(fwd, inv, tuple(moves))
    if moves is not None:
        return Automorphism.from_moves(moves, basis)
    return Automorphism.from_images(fwd)


def parse_word(text: str, basis: Basis) -> ReducedWord:
    """Parse a word argument; letters outside the basis raise UsageError."""
    text = text.strip()
    if not WORD_TEXT.match(text) and text != "":
        raise UsageError(f"expected a word over letters or '1', got {text!r}")
    return ReducedWord.parse(text, basis)

