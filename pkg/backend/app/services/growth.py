"""Dual growth rate: last-letter transition matrix, Perron-Frobenius eigenvalue, empirical check."""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from pydantic import BaseModel, Field

from app.core.config import settings
from app.core.exceptions import NumericError, PropertyViolation, ResourceBudgetExceeded, UsageError
from app.models.automorphism import ElementaryMove, conjugate_moves, nielsen_count, render_moves
from app.models.words import Basis, Letter
from app.services.dual import SuffixTable, build_collection, iterate_dual_sets

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """M[y][x] = number of words in U(x) ending in y; rows and columns follow letter_order."""

    basis: Basis
    letter_order: Tuple[Letter, ...]
    entries: np.ndarray

    @property
    def dimension(self) -> int:
        return len(self.letter_order)

    def column_sums(self) -> Dict[Letter, int]:
        sums = self.entries.sum(axis=0)
        return {x: int(sums[col]) for col, x in enumerate(self.letter_order)}

    def to_json(self) -> List[List[int]]:
        return [[int(v) for v in row] for row in self.entries]

    def letter_names(self) -> List[str]:
        return [self.basis.render_letter(x) for x in self.letter_order]


def build_transition_matrix(T: SuffixTable) -> TransitionMatrix:
    order = T.basis.letters()
    index = {x: pos for pos, x in enumerate(order)}
    entries = np.zeros((len(order), len(order)), dtype=np.int64)
    for x in order:
        for w in T.table[x].words:
            entries[index[w[-1]], index[x]] += 1
    return TransitionMatrix(T.basis, order, entries)


MatrixLike = Union[TransitionMatrix, np.ndarray, Sequence[Sequence[float]]]


def _irreducible_radius(block: np.ndarray, tol: float, max_iterations: int) -> Tuple[float, int]:
    """Spectral radius of an irreducible nonnegative block.

    Iterates on the primitive shift B + I and brackets its radius between
    the smallest and largest Collatz–Wielandt ratio (Bv)_i / v_i.
    """
    shifted = block + np.eye(block.shape[0])
    v = np.ones(block.shape[0])
    lo, hi = 0.0, float("inf")
    for iteration in range(1, max_iterations + 1):
        w = shifted @ v
        ratios = w / v
        lo, hi = float(ratios.min()), float(ratios.max())
        if hi - lo <= tol:
            return (lo + hi) / 2 - 1.0, iteration
        v = w / w.sum()
    raise NumericError(
        "Perron-Frobenius iteration did not converge",
        {"iterations": max_iterations, "lower": lo - 1.0, "upper": hi - 1.0, "size": block.shape[0]},
    )


def pf_eigenvalue(
    M: MatrixLike, tol: Optional[float] = None, max_iterations: Optional[int] = None
) -> float:
    """Spectral radius of a nonnegative square matrix.

    The matrix is split into strongly connected components; the radius is the
    largest radius among the irreducible diagonal blocks.

    Collatz–Wielandt bracketing on each block stands in for the shifted
    Gelfand estimate ‖(M+I)^k v‖₁^{1/k} with Richardson extrapolation, which
    converges only like 1/k when M has Jordan blocks. Both work on M + I and
    subtract 1 at the end.
    """
    tol = settings.PF_TOLERANCE if tol is None else tol
    max_iterations = settings.PF_MAX_ITERATIONS if max_iterations is None else max_iterations
    if tol <= 0:
        raise UsageError(f"tolerance must be positive, got {tol}")
    entries = M.entries if isinstance(M, TransitionMatrix) else M
    A = np.asarray(entries, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise UsageError(f"expected a square matrix, got shape {A.shape}")
    if (A < 0).any():
        raise UsageError("Perron-Frobenius eigenvalue needs a nonnegative matrix")

    n = A.shape[0]
    graph = nx.DiGraph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from((col, row) for row, col in zip(*np.nonzero(A)))

    radius = 0.0
    iterations = 0
    components = sorted((sorted(c) for c in nx.strongly_connected_components(graph)), key=lambda c: c[0])
    for component in components:
        if len(component) == 1:
            radius = max(radius, float(A[component[0], component[0]]))
            continue
        block = A[np.ix_(component, component)]
        block_radius, used = _irreducible_radius(block, tol, max_iterations)
        iterations += used
        radius = max(radius, block_radius)
    logger.debug(f"PF eigenvalue {radius:.12f} from {len(components)} components, {iterations} iterations")
    return radius


class EmpiricalPoint(BaseModel):
    """Largest cardinality of (φ^k)*(x) over all letters x."""

    k: int = Field(..., description="Iteration count")
    card: int = Field(..., description="max over x of card (φ^k)*(x)")
    ratio: float = Field(..., description="card^(1/k)")


class GrowthEstimate(BaseModel):
    """Matrix growth rate with the empirical sequence attached as evidence."""

    lambda_matrix: float = Field(..., description="Perron-Frobenius eigenvalue of the transition matrix")
    empirical: List[EmpiricalPoint] = Field(default_factory=list)
    tolerance: float = Field(..., description="Relative tolerance for the empirical check")
    tail_window: int = Field(..., description="Window used for the tail estimates")
    limsup_estimate: Optional[float] = Field(None, description="Max of card^(1/k) over the tail window")
    tail_rate: Optional[float] = Field(None, description="Geometric mean of successive ratios over the tail")
    partial: bool = Field(False, description="True if a budget cut the sequence short")

    def relative_gap(self) -> Optional[float]:
        if self.tail_rate is None:
            return None
        return (self.tail_rate - self.lambda_matrix) / self.lambda_matrix

    def consistent(self, tol: Optional[float] = None) -> bool:
        gap = self.relative_gap()
        if gap is None:
            return False
        return abs(gap) <= (self.tolerance if tol is None else tol)

    def discrepancy(self) -> Optional[str]:
        """Describe how the empirical sequence contradicts lambda_matrix; None when it does not."""
        gap = self.relative_gap()
        if gap is None:
            return "no empirical sequence to compare against"
        if self.consistent():
            return None
        side = "below" if gap < 0 else "above"
        return (
            f"tail rate {self.tail_rate:.4f} is {abs(gap):.0%} {side} matrix rate "
            f"{self.lambda_matrix:.4f} (tolerance {self.tolerance:.0%})"
        )


def witness_lines(T: SuffixTable, estimate: Optional[GrowthEstimate] = None) -> List[str]:
    """Suffix table, transition matrix and cardinalities behind a growth value."""
    matrix = build_transition_matrix(T)
    names = matrix.letter_names()
    lines = [f"U({T.basis.render_letter(x)}) = {T.table[x].render()}" for x in T.basis.letters()]
    lines.append("matrix columns " + " ".join(names))
    lines.extend(f"  {name}: {row}" for name, row in zip(names, matrix.to_json()))
    if estimate is not None:
        lines.append("cards " + ", ".join(str(p.card) for p in estimate.empirical))
    return lines


def _tail_estimates(points: List[EmpiricalPoint], window: int) -> Tuple[Optional[float], Optional[float]]:
    if not points:
        return None, None
    tail = points[-window:]
    limsup = max(p.ratio for p in tail)
    if len(points) == 1:
        return limsup, points[0].ratio
    span = min(window, len(points) - 1)
    last, first = points[-1], points[-1 - span]
    rate = (last.card / first.card) ** (1.0 / span)
    return limsup, rate


def empirical_growth(
    T: SuffixTable,
    kmax: Optional[int] = None,
    tolerance: Optional[float] = None,
    budget: Optional[int] = None,
) -> GrowthEstimate:
    kmax = settings.GROWTH_KMAX if kmax is None else kmax
    tolerance = settings.GROWTH_TOLERANCE if tolerance is None else tolerance
    window = settings.GROWTH_TAIL_WINDOW
    if kmax < 1:
        raise UsageError(f"kmax must be positive, got {kmax}")

    matrix = build_transition_matrix(T)
    lam = pf_eigenvalue(matrix)
    if lam < 1.0 - 1e-9:
        raise PropertyViolation(
            f"transition matrix has spectral radius {lam} < 1",
            {"matrix": matrix.to_json(), "letters": matrix.letter_names()},
        )

    cards: List[int] = [0] * kmax
    reached = kmax
    partial = False
    for x in T.basis.letters():
        k = 0
        try:
            for k, current in enumerate(iterate_dual_sets(T, x, budget), start=1):
                cards[k - 1] = max(cards[k - 1], len(current))
                if k >= reached:
                    break
        except ResourceBudgetExceeded as e:
            # k is the last index fully computed for x
            partial = True
            reached = min(reached, k)
            logger.warning(f"Growth sequence truncated at k={reached}: {e}")
    points = [
        EmpiricalPoint(k=k, card=cards[k - 1], ratio=cards[k - 1] ** (1.0 / k))
        for k in range(1, reached + 1)
    ]
    limsup, rate = _tail_estimates(points, window)
    estimate = GrowthEstimate(
        lambda_matrix=lam,
        empirical=points,
        tolerance=tolerance,
        tail_window=window,
        limsup_estimate=limsup,
        tail_rate=rate,
        partial=partial,
    )
    problem = estimate.discrepancy()
    if problem is not None and not partial:
        witness = "\n".join(witness_lines(T, estimate))
        logger.error(f"Empirical growth contradicts the transition matrix: {problem}\n{witness}")
    return estimate


def dual_growth_rate(moves: Sequence[ElementaryMove], basis: Basis, tol: Optional[float] = None) -> float:
    return pf_eigenvalue(build_transition_matrix(build_collection(moves, basis)), tol)


def basis_independence_check(
    phi_moves: Sequence[ElementaryMove],
    psi_moves: Sequence[ElementaryMove],
    basis: Basis,
    tol: float = 1e-6,
) -> bool:
    """Compare the growth rate of φ with that of ψ⁻¹∘φ∘ψ.

    A mismatch is logged with both suffix tables and matrices.
    """
    first = build_collection(phi_moves, basis)
    second = build_collection(conjugate_moves(phi_moves, psi_moves), basis)
    original = pf_eigenvalue(build_transition_matrix(first))
    conjugated = pf_eigenvalue(build_transition_matrix(second))
    logger.info(
        f"Growth rate {original:.9f} vs {conjugated:.9f} after change of basis "
        f"(t={nielsen_count(phi_moves)}, conjugator t={nielsen_count(psi_moves)})"
    )
    if abs(original - conjugated) <= tol:
        return True
    witness = "\n".join(
        [f"φ = {render_moves(phi_moves, basis)}: {original:.6f}"]
        + witness_lines(first)
        + [f"ψ⁻¹φψ with ψ = {render_moves(psi_moves, basis)}: {conjugated:.6f}"]
        + witness_lines(second)
    )
    logger.warning(f"Growth rate changed under change of basis\n{witness}")
    return False
