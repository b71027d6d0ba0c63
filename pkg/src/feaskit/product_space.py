"""Circumcentered reflections in the product space R^{nm}.

The m constraints become one product set ``S^k = S_1^k x ... x S_m^k`` and
the diagonal subspace ``D = {(x, ..., x)}``. Running CRM on ``(S^k, D)`` from
a diagonal point should reproduce PACA blockwise. Everything here goes
through the generic halfspace projection and three-point circumcenter, never
through the solver's closed-form step length, so it can serve as an
independent check on `feaskit.solvers`.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateConfiguration, DimensionMismatch, MismatchedTermination, ZeroSubgradientAtViolation
from .geometry import Halfspace, circumcenter3, project_halfspace
from .problem import CfpInstance, max_violation
from .schedules import PerturbationSchedule, epsilon
from .solvers import ZERO_W_THRESHOLD, paca_step

DIAGONAL_RTOL = 1e-12
# project_S only guards against non-diagonal input; accumulated roundoff is fine
DIAGONAL_GUARD = 1e-8


class BlockVector:
    """A point of R^{nm} stored as an ``(m, n)`` array of blocks."""

    def __init__(self, blocks):
        blocks = np.array(blocks, dtype=float)
        if blocks.ndim != 2 or blocks.size == 0:
            raise DimensionMismatch(f"blocks must form a non-empty (m, n) array, got shape {blocks.shape}")
        self.blocks = blocks

    @classmethod
    def diagonal(cls, x, m: int) -> "BlockVector":
        x = np.asarray(x, dtype=float)
        return cls(np.tile(x, (m, 1)))

    @classmethod
    def from_flat(cls, flat, m: int) -> "BlockVector":
        return cls(np.asarray(flat, dtype=float).reshape(m, -1))

    @property
    def m(self) -> int:
        return self.blocks.shape[0]

    @property
    def n(self) -> int:
        return self.blocks.shape[1]

    @property
    def flat(self) -> np.ndarray:
        return self.blocks.ravel()

    def diagonal_error(self) -> float:
        """Largest block deviation from the block mean, relative to ``max(1, |mean|)``."""
        mean = self.blocks.mean(axis=0)
        dev = np.linalg.norm(self.blocks - mean, axis=1).max()
        return float(dev / max(1.0, np.linalg.norm(mean)))

    def is_diagonal(self, rtol: float = DIAGONAL_RTOL) -> bool:
        return self.diagonal_error() <= rtol

    def __repr__(self):
        return f"BlockVector(m={self.m}, n={self.n})"


def project_diagonal(v: BlockVector) -> BlockVector:
    """Orthogonal projection onto D: every block becomes the block mean."""
    return BlockVector.diagonal(v.blocks.mean(axis=0), v.m)


def _project_perturbed(oracle, x, eps, index):
    """Projection of x onto ``{z : u^T (z - x) + f(x) + eps <= 0}`` (or x itself if inactive)."""
    fx = oracle.value(x) + eps
    if fx <= 0.0:
        return x.copy()
    u = oracle.subgradient(x)
    if not np.any(u):
        raise ZeroSubgradientAtViolation(index, fx)
    return project_halfspace(Halfspace(u, float(u @ x) - fx), x)


def project_S(inst: CfpInstance, xblk: BlockVector, eps: float) -> BlockVector:
    """Blockwise projection onto the perturbed separating sets at a diagonal point."""
    if xblk.m != inst.m or xblk.n != inst.n:
        raise DimensionMismatch(f"block vector is ({xblk.m}, {xblk.n}), instance is ({inst.m}, {inst.n})")
    if not xblk.is_diagonal(DIAGONAL_GUARD):
        raise ValueError("project_S is only defined at diagonal points")
    x = xblk.blocks.mean(axis=0)
    return BlockVector([_project_perturbed(o, x, eps, i) for i, o in enumerate(inst.oracles)])


def crm_step(inst: CfpInstance, xblk: BlockVector, eps: float) -> BlockVector:
    """One circumcentered-reflection step on ``(S^k, D)`` from a diagonal point.

    The reflections and the circumcenter are computed in coordinates centred
    at `xblk` (both are translation-equivariant and P_D is linear), which
    avoids cancelling small displacements against a large iterate.

    When the two reflections are mirror images through `xblk` (the three
    points are collinear with `xblk` as midpoint) no circumcenter exists and
    the point is returned unchanged.
    """
    x = xblk.flat
    y = 2.0 * (project_S(inst, xblk, eps).flat - x)
    z = 2.0 * project_diagonal(BlockVector.from_flat(y, inst.m)).flat - y
    origin = np.zeros_like(x)
    try:
        c = circumcenter3(origin, y, z)
    except DegenerateConfiguration:
        # symmetric pair about x: the averaged displacement vanished
        if np.linalg.norm(y + z) <= ZERO_W_THRESHOLD * 4.0 * np.linalg.norm(y):
            return BlockVector(xblk.blocks.copy())
        raise
    return BlockVector.from_flat(x + c, inst.m)


def _rel_dev(x, blocks):
    return float(np.linalg.norm(blocks - x, axis=1).max() / max(1.0, np.linalg.norm(x)))


def check_equivalence(inst: CfpInstance, x0, sched: PerturbationSchedule, K: int, tol: float = 0.0):
    """Run PACA and product-space CRM side by side for up to K iterations.

    Returns ``(max_rel_error, stop_index)`` where the error is the largest
    ``|x^k - block_j(X^k)| / max(1, |x^k|)`` seen and `stop_index` is the
    common termination index, or None if neither stopped within K steps.
    A sequence stops once ``max_i f_i <= tol``; with an unperturbed schedule
    the iterates approach the boundary, so pass a small positive `tol` there.

    Raises
    ------
    MismatchedTermination
        If exactly one of the two sequences reaches the feasible set.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    x = np.asarray(x0, dtype=float).copy()
    X = BlockVector.diagonal(x, inst.m)
    worst = 0.0
    for k in range(K + 1):
        worst = max(worst, _rel_dev(x, X.blocks))
        stop_p = max_violation(inst, x) <= tol
        stop_c = all(max_violation(inst, b) <= tol for b in X.blocks)
        if stop_p != stop_c:
            which = "PACA" if stop_p else "CRM"
            raise MismatchedTermination(f"only {which} stopped at iteration {k}")
        if stop_p:
            return worst, k
        if k == K:
            break
        eps = epsilon(sched, k)
        x, _ = paca_step(inst, x, eps, k=k)
        X = crm_step(inst, X, eps)
    return worst, None
