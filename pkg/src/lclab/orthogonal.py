"""Haar-random orthogonal matrices, sphere sampling, and spherical-cap geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc

from .rng import RandomStream
from .stats import clopper_pearson

ORTHO_TOL = 1e-10
DET_TOL = 1e-8


@dataclass(frozen=True)
class OrthogonalMatrix:
    """An element of O(n), validated to machine-level orthogonality."""

    entries: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        u = self.entries
        if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] < 1:
            raise ValueError("entries must be a square n x n matrix with n >= 1")
        if np.abs(u.T @ u - np.eye(u.shape[0])).max() > ORTHO_TOL:
            raise ValueError("matrix is not orthogonal within tolerance")
        if abs(abs(float(np.linalg.det(u))) - 1.0) > DET_TOL:
            raise ValueError("determinant is not +/-1 within tolerance")

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    def transpose(self) -> "OrthogonalMatrix":
        return OrthogonalMatrix(self.entries.T.copy())


def haar_matrices(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Stack of ``count`` Haar-distributed n x n orthogonal matrices.

    QR of a Gaussian matrix with the sign convention that makes the
    triangular factor's diagonal positive; this makes the law exactly Haar.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    a = rng.standard_normal((count, n, n))
    q, r = np.linalg.qr(a)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d[d == 0] = 1.0
    return q * d[:, None, :]


def haar(n: int, stream: RandomStream) -> OrthogonalMatrix:
    """One Haar-distributed element of O(n)."""
    return OrthogonalMatrix(haar_matrices(n, 1, stream.generator())[0])


def uniform_directions(n: int, count: int, stream: RandomStream) -> np.ndarray:
    """count x n matrix of i.i.d. uniform unit vectors (normalized Gaussians)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if count < 1:
        raise ValueError("count must be >= 1")
    g = stream.generator().standard_normal((count, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def cap_measure(n: int, eps: float) -> float:
    """Normalized measure of a spherical cap of Euclidean (chordal) radius eps.

    The cap is {x in S^{n-1} : |x - pole| <= eps}; the chordal radius is
    converted to the polar angle via eps = 2 sin(phi/2) and the measure
    evaluated exactly through the regularized incomplete beta function.
    """
    if n < 2:
        raise ValueError("cap measure needs n >= 2")
    if not 0.0 < eps <= 2.0:
        raise ValueError(f"eps must lie in (0, 2], got {eps}")
    phi = 2.0 * math.asin(eps / 2.0)
    x = math.sin(phi) ** 2
    half = 0.5 * float(betainc((n - 1) / 2.0, 0.5, x))
    return half if phi <= math.pi / 2.0 else 1.0 - half


@dataclass(frozen=True)
class CapBoundScan:
    """Smallest constant validating measure(cap_eps) <= (C eps)^{n-1} on a grid."""

    empirical_C: float
    argmax_eps: float


def cap_bound_scan(n: int, eps_grid) -> CapBoundScan:
    """Scan cap_measure(n, eps)^{1/(n-1)} / eps over a grid of radii below 1."""
    if n < 2:
        raise ValueError("cap bound scan needs n >= 2")
    grid = [float(e) for e in eps_grid]
    if not grid:
        raise ValueError("eps grid must be non-empty")
    if any(not 0.0 < e < 1.0 for e in grid):
        raise ValueError("all eps must lie in (0, 1)")
    best_c, best_eps = -math.inf, grid[0]
    for e in grid:
        c = cap_measure(n, e) ** (1.0 / (n - 1)) / e
        if c > best_c:
            best_c, best_eps = c, e
    return CapBoundScan(empirical_C=best_c, argmax_eps=best_eps)


@dataclass(frozen=True)
class RotationSeparation:
    """Monte Carlo result for the ball-union rotation-separation event."""

    p_all_separated: float
    ci_low: float
    ci_high: float
    worst_pair_rate: float
    pair_rates: dict
    qualifying: tuple
    trials: int


def rotation_separation_sim(
    centers,
    R: float,
    trials: int,
    stream: RandomStream,
    chunk: int = 4096,
) -> RotationSeparation:
    """Estimate how often a random rotation separates the far unit balls.

    ``centers`` are the ball centers of a union L of unit balls.  For each
    Haar rotation U, every ordered pair (i, j) of centers with norm above R
    is checked for |U x_i - x_j| <= 2 (the rotated and fixed balls meet);
    the trial counts as separated when no qualifying pair is close, which
    estimates the probability that L and U(L) only meet inside (R+1)B.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if centers.shape[0] < 1 or centers.size == 0:
        raise ValueError("centers must be non-empty")
    n = centers.shape[1]
    if n < 2:
        raise ValueError("need dimension >= 2")
    if R <= 0:
        raise ValueError("R must be positive")
    if trials < 1:
        raise ValueError("trials must be >= 1")

    norms = np.linalg.norm(centers, axis=1)
    qualifying = tuple(int(i) for i in np.nonzero(norms > R)[0])
    if not qualifying:
        # no qualifying pairs: containment in (R+1)B holds trivially
        return RotationSeparation(1.0, 1.0, 1.0, 0.0, {}, qualifying, trials)

    far = centers[list(qualifying)]
    m = far.shape[0]
    rng = stream.generator()
    all_sep = 0
    pair_hits = np.zeros((m, m), dtype=np.int64)
    done = 0
    while done < trials:
        b = min(chunk, trials - done)
        u = haar_matrices(n, b, rng)
        rotated = np.einsum("bij,kj->bki", u, far)  # rotated[b, i] = U_b x_i
        diff = rotated[:, :, None, :] - far[None, None, :, :]
        close = np.linalg.norm(diff, axis=-1) <= 2.0  # (b, i, j)
        pair_hits += close.sum(axis=0)
        all_sep += int((~close.any(axis=(1, 2))).sum())
        done += b

    rates = {
        (qualifying[i], qualifying[j]): float(pair_hits[i, j]) / trials
        for i in range(m)
        for j in range(m)
    }
    lo, hi = clopper_pearson(all_sep, trials)
    return RotationSeparation(
        p_all_separated=all_sep / trials,
        ci_low=lo,
        ci_high=hi,
        worst_pair_rate=float(pair_hits.max()) / trials,
        pair_rates=rates,
        qualifying=qualifying,
        trials=trials,
    )
