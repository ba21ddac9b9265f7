"""Boundary oracle: φ(C¹_u) approximated from deep sphere words, independent of the image formula.

Words u' extending u are pushed through φ one letter at a time. A word is
settled once its image is long enough that no further extension can touch
the first m letters (image length at least m plus the bounded cancellation
bound); unsettled words are refined. The prefix sets collected at successive
probe depths must agree before an answer is returned.
"""

import logging
from typing import FrozenSet, List, Optional, Set, Tuple

from pydantic import BaseModel, Field, model_validator

from app.core.config import settings
from app.core.exceptions import InconclusiveOracle, UsageError
from app.models.automorphism import Automorphism, bounded_cancellation_bound, cancellation_bound
from app.models.words import Letters, ReducedWord, concat_letters, iter_extensions, next_letters
from app.services.cylinders import PrefixSet, covers_at_depth, prefixes_at_depth

logger = logging.getLogger(__name__)


class OracleConfig(BaseModel):
    """Depths and budget for one oracle run."""

    probe_depth_start: int = Field(default_factory=lambda: settings.ORACLE_PROBE_DEPTH_START, ge=1)
    out_depth: int = Field(default_factory=lambda: settings.ORACLE_OUT_DEPTH, ge=1)
    max_depth: int = Field(default_factory=lambda: settings.ORACLE_MAX_DEPTH, ge=1)
    budget: int = Field(default_factory=lambda: settings.ENUMERATION_BUDGET, ge=1)
    sphere_depth_cap: int = Field(default_factory=lambda: settings.ORACLE_SPHERE_DEPTH_CAP, ge=1)

    @model_validator(mode="after")
    def check_depths(self) -> "OracleConfig":
        if self.probe_depth_start > self.max_depth:
            raise ValueError(
                f"probe_depth_start {self.probe_depth_start} exceeds max_depth {self.max_depth}"
            )
        return self


class _Probe:
    """Evaluation counter shared by all depth rounds of one oracle run."""

    def __init__(self, phi: Automorphism, u: ReducedWord, cfg: OracleConfig):
        self.phi = phi
        self.u = u
        self.cfg = cfg
        self.margin = bounded_cancellation_bound(phi)
        self.evaluations = 0

    def _spend(self, amount: int, depth: int) -> None:
        self.evaluations += amount
        if self.evaluations > self.cfg.budget:
            raise InconclusiveOracle(
                f"oracle for {self.u} spent {self.evaluations} evaluations by depth {depth}, "
                f"budget is {self.cfg.budget}",
                required=self.evaluations,
                budget=self.cfg.budget,
            )

    def prefixes_at(self, L: int) -> Set[Letters]:
        """First m image letters of every word through the depth-L sphere around u."""
        m = self.cfg.out_depth
        forward = self.phi.forward
        rank = self.u.basis.rank
        base = self.u.letters
        base_image = forward.apply_letters(base)
        frontier: List[Tuple[Letters, Letters]] = []
        for word in iter_extensions(rank, base, L):
            frontier.append((word, concat_letters(base_image, forward.apply_letters(word[len(base):]))))
        self._spend(len(frontier), L)

        out: Set[Letters] = set()
        depth = L
        while frontier:
            refined: List[Tuple[Letters, Letters]] = []
            for word, image in frontier:
                if len(image) >= m + self.margin:
                    out.add(image[:m])
                    continue
                for y in next_letters(rank, word[-1] if word else None):
                    refined.append((word + (y,), concat_letters(image, forward.letter_image(y))))
            if refined:
                depth += 1
                if depth > self.cfg.max_depth:
                    raise InconclusiveOracle(
                        f"oracle for {self.u} needs extensions deeper than max_depth {self.cfg.max_depth}"
                    )
                self._spend(len(refined), depth)
            frontier = refined
        return out


def starting_depth(phi: Automorphism, cfg: OracleConfig) -> int:
    m = cfg.out_depth
    heuristic = min(m + 2 * cancellation_bound(phi) * m, cfg.sphere_depth_cap)
    return min(max(cfg.probe_depth_start, heuristic), cfg.max_depth)


def boundary_image_prefixes(
    phi: Automorphism, u: ReducedWord, cfg: Optional[OracleConfig] = None
) -> FrozenSet[ReducedWord]:
    """All length-m prefixes of infinite words in φ(C¹_u)."""
    if u.basis != phi.basis:
        raise UsageError("word and automorphism are over different bases")
    cfg = cfg or OracleConfig()
    probe = _Probe(phi, u, cfg)
    L = starting_depth(phi, cfg)
    current = probe.prefixes_at(L)
    while True:
        if L + 1 > cfg.max_depth:
            raise InconclusiveOracle(f"oracle for {u} did not stabilize by depth {cfg.max_depth}")
        following = probe.prefixes_at(L + 1)
        logger.debug(f"Oracle depth {L}->{L + 1}: {len(current)} vs {len(following)} prefixes")
        if following == current:
            break
        current, L = following, L + 1

    # one more round at L+2 when the budget allows it
    expected = probe.evaluations * (2 * u.basis.rank - 1)
    if L + 2 <= cfg.max_depth and expected <= cfg.budget:
        confirm = probe.prefixes_at(L + 2)
        if confirm != current:
            raise InconclusiveOracle(f"oracle for {u} changed again at depth {L + 2}")

    logger.debug(f"Oracle for {u}: {len(current)} prefixes, {probe.evaluations} evaluations")
    return frozenset(ReducedWord.trusted(p, u.basis) for p in current)


def image_difference(
    phi: Automorphism,
    u: ReducedWord,
    U: PrefixSet,
    cfg: Optional[OracleConfig] = None,
    truncate: bool = False,
) -> Tuple[FrozenSet[ReducedWord], FrozenSet[ReducedWord]]:
    """(oracle-only prefixes, U-only prefixes) at depth m.

    With ``truncate`` the depth may be shorter than the words of U; both sides
    are then cut to their first m letters, which only compares the sets up to
    that depth.
    """
    cfg = cfg or OracleConfig()
    if truncate:
        claimed = prefixes_at_depth(U, cfg.out_depth)
    elif cfg.out_depth < U.max_length:
        raise UsageError(
            f"out_depth {cfg.out_depth} is below the longest word length {U.max_length} of the set"
        )
    else:
        claimed = covers_at_depth(U, cfg.out_depth)
    oracle = boundary_image_prefixes(phi, u, cfg)
    return oracle - claimed, claimed - oracle


def assert_image_equal(
    phi: Automorphism,
    u: ReducedWord,
    U: PrefixSet,
    cfg: Optional[OracleConfig] = None,
    truncate: bool = False,
) -> bool:
    missing, extra = image_difference(phi, u, U, cfg, truncate)
    if missing or extra:
        logger.info(
            f"Oracle disagrees on φ(C¹_{u}): missing {sorted(map(str, missing))}, "
            f"extra {sorted(map(str, extra))}"
        )
        return False
    return True
