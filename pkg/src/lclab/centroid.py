"""Monte Carlo support-function estimation for moment bodies of a sample.

The p-th moment body of a law with density g has support function
h(theta) = (E |<X, theta>|^p)^{1/p}; the one-sided variant keeps only the
positive part of the inner product and doubles the mass.  Everything here
is the empirical plug-in on a fixed :class:`~lclab.sampler.SampleBatch`,
accumulated in the log domain so p up to 128 stays finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .orthogonal import uniform_directions
from .rng import RandomStream
from .sampler import SampleBatch

DIRECTION_TOL = 1e-12
EXACT_TOL = 1e-9


class DegenerateEstimateError(RuntimeError):
    """All inner products vanished (or all were non-positive for one-sided moments)."""


def unit(v) -> np.ndarray:
    """Normalize a vector to the unit sphere."""
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / norm


def check_direction(theta, n: int) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (n,):
        raise ValueError(f"direction must have shape ({n},), got {theta.shape}")
    if abs(float(np.linalg.norm(theta)) - 1.0) > DIRECTION_TOL:
        raise ValueError("direction must be a unit vector")
    return theta


def dyadic_p_grid(p_max: float) -> list[float]:
    """The dyadic grid 2, 4, 8, ... up to p_max."""
    if p_max < 2:
        raise ValueError("p_max must be >= 2")
    grid, p = [], 2.0
    while p <= p_max:
        grid.append(p)
        p *= 2.0
    return grid


def gaussian_moment(p: float) -> float:
    """(E |G|^p)^{1/p} for a standard Gaussian, exact via log-gamma."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return math.exp(0.5 * math.log(2.0) + (gammaln((p + 1.0) / 2.0) - gammaln(0.5)) / p)


@dataclass(frozen=True)
class SupportEstimate:
    value: float
    stderr: float
    p: float
    direction: np.ndarray = field(repr=False)
    count: int


def _moment_from_logs(logs: np.ndarray, total: int, p: float, log_mass: float = 0.0) -> tuple[float, float]:
    """(value, relative stderr) of (mass * mean(exp(logs)^p))^{1/p}.

    ``logs`` holds log|<x_i, theta>| over the contributing rows only;
    ``total`` is the full batch size, so zero inner products weigh in as
    exact zeros.  ``log_mass`` is log(2) for one-sided moments.
    """
    if logs.size == 0:
        raise DegenerateEstimateError("no contributing inner products")
    log_mp = logsumexp(p * logs) - math.log(total)
    log_m2p = logsumexp(2.0 * p * logs) - math.log(total)
    value = math.exp((log_mp + log_mass) / p)
    rel_var = math.expm1(log_m2p - 2.0 * log_mp)
    rel_stderr = math.sqrt(max(rel_var, 0.0) / total) / p
    return value, rel_stderr


def _abs_logs(data: np.ndarray, theta: np.ndarray) -> np.ndarray:
    dots = data @ theta
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(dots))
    return logs[np.isfinite(logs)]


def _pos_logs(data: np.ndarray, theta: np.ndarray) -> np.ndarray:
    dots = data @ theta
    return np.log(dots[dots > 0.0])


def support_zp(batch: SampleBatch, theta, p: float) -> SupportEstimate:
    """Empirical ((1/N) sum |<x_i, theta>|^p)^{1/p} with delta-method stderr."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if batch.count < 2:
        raise ValueError("need at least 2 rows")
    theta = check_direction(theta, batch.dimension)
    logs = _abs_logs(batch.data, theta)
    if logs.size == 0:
        raise DegenerateEstimateError("all inner products are zero")
    value, rel = _moment_from_logs(logs, batch.count, p)
    return SupportEstimate(value=value, stderr=value * rel, p=p, direction=theta, count=batch.count)


def support_zp_plus(batch: SampleBatch, theta, p: float) -> SupportEstimate:
    """One-sided version: (2 (1/N) sum <x_i, theta>_+^p)^{1/p}."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if batch.count < 2:
        raise ValueError("need at least 2 rows")
    theta = check_direction(theta, batch.dimension)
    logs = _pos_logs(batch.data, theta)
    if logs.size == 0:
        raise DegenerateEstimateError("no positive inner products")
    value, rel = _moment_from_logs(logs, batch.count, p, log_mass=math.log(2.0))
    return SupportEstimate(value=value, stderr=value * rel, p=p, direction=theta, count=batch.count)


@dataclass(frozen=True)
class SuperGaussianRatio:
    """One-sided support against the Gaussian moment baseline and against sqrt(p)."""

    ratio: float
    ratio_sqrtp: float
    estimate: SupportEstimate


def super_gaussian_ratio(batch: SampleBatch, theta, p: float) -> SuperGaussianRatio:
    est = support_zp_plus(batch, theta, p)
    return SuperGaussianRatio(
        ratio=est.value / gaussian_moment(p),
        ratio_sqrtp=est.value / math.sqrt(p),
        estimate=est,
    )


@dataclass(frozen=True)
class WorstDirection:
    direction: np.ndarray = field(repr=False)
    ratio_sqrtp: float
    support_value: float
    p: float
    evaluations: int


def worst_direction(
    batch: SampleBatch,
    p: float,
    restarts: int,
    steps: int,
    stream: RandomStream,
) -> WorstDirection:
    """Search the sphere for the direction minimizing h_+(theta)/sqrt(p).

    Stochastic multi-start plus greedy spherical perturbation; the step
    size starts at 0.5 and halves after every 20 rejected proposals.  The
    same batch is reused throughout, so the search minimizes a fixed
    deterministic function and the result is an upper bound on its true
    infimum over the sphere.
    """
    if restarts < 1 or steps < 1:
        raise ValueError("restarts and steps must be >= 1")
    n = batch.dimension
    rng = stream.generator()
    sqrt_p = math.sqrt(p)

    def objective(theta: np.ndarray) -> float:
        logs = _pos_logs(batch.data, theta)
        if logs.size == 0:
            raise DegenerateEstimateError("no positive inner products")
        value, _ = _moment_from_logs(logs, batch.count, p, log_mass=math.log(2.0))
        return value / sqrt_p

    best_theta, best_val, evals = None, math.inf, 0
    for _ in range(restarts):
        theta = unit(rng.standard_normal(n))
        val = objective(theta)
        evals += 1
        step, rejected = 0.5, 0
        for _ in range(steps):
            proposal = unit(theta + step * rng.standard_normal(n))
            v = objective(proposal)
            evals += 1
            if v < val:
                theta, val = proposal, v
            else:
                rejected += 1
                if rejected % 20 == 0:
                    step *= 0.5
        if val < best_val:
            best_theta, best_val = theta, val
    return WorstDirection(
        direction=best_theta,
        ratio_sqrtp=best_val,
        support_value=best_val * sqrt_p,
        p=p,
        evaluations=evals,
    )


@dataclass(frozen=True)
class PsiEstimate:
    alpha: float
    constant: float
    argmax_p: float
    argmax_direction: np.ndarray = field(repr=False)


def psi_alpha_estimate(
    batch: SampleBatch,
    alpha: float,
    p_grid=None,
    direction_count: int = 64,
    stream: RandomStream | None = None,
) -> PsiEstimate:
    """Empirical psi_alpha constant: max over (p, theta) of h_p / (p^{1/alpha} h_2).

    A lower bound on the true constant; the default grid is dyadic.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if stream is None:
        raise ValueError("a random stream is required for direction sampling")
    grid = dyadic_p_grid(16.0) if p_grid is None else [float(p) for p in p_grid]
    if not grid:
        raise ValueError("p grid must be non-empty")
    if any(p < 2 for p in grid):
        raise ValueError("p grid must lie in [2, inf)")
    dirs = uniform_directions(batch.dimension, direction_count, stream)
    best = (-math.inf, grid[0], dirs[0])
    for theta in dirs:
        logs = _abs_logs(batch.data, theta)
        if logs.size == 0:
            continue
        h2, _ = _moment_from_logs(logs, batch.count, 2.0)
        for p in grid:
            hp, _ = _moment_from_logs(logs, batch.count, p)
            ratio = hp / (p ** (1.0 / alpha) * h2)
            if ratio > best[0]:
                best = (ratio, p, theta)
    if not math.isfinite(best[0]):
        raise DegenerateEstimateError("every sampled direction was degenerate")
    return PsiEstimate(alpha=alpha, constant=best[0], argmax_p=best[1], argmax_direction=best[2])


@dataclass(frozen=True)
class BerwaldCheck:
    mono_ok: bool
    ratio: float
    h_p: SupportEstimate
    h_q: SupportEstimate


def berwald_check(batch: SampleBatch, theta, p: float, q: float) -> BerwaldCheck:
    """Moment monotonicity h_p <= h_q (exact on the batch) and the q/p growth ratio.

    The left inequality is the power-mean inequality on the empirical
    measure, so it must hold with only floating-point slack when both
    estimates share the batch.
    """
    if p > q:
        raise ValueError(f"need p <= q, got p={p}, q={q}")
    hp = support_zp(batch, theta, p)
    hq = support_zp(batch, theta, q)
    mono_ok = hp.value <= hq.value * (1.0 + EXACT_TOL)
    return BerwaldCheck(mono_ok=mono_ok, ratio=hq.value / (hp.value * (q / p)), h_p=hp, h_q=hq)


@dataclass(frozen=True)
class MeanWidth:
    W: float
    stderr: float
    p: float
    direction_count: int


def mean_width_zp(
    batch: SampleBatch,
    p: float,
    direction_count: int,
    stream: RandomStream,
) -> MeanWidth:
    """Mean width 2 * average of h over uniform directions, with two-level stderr.

    The stderr combines the spread across sampled directions with the
    per-direction delta-method error.
    """
    if direction_count < 10:
        raise ValueError("need at least 10 directions")
    dirs = uniform_directions(batch.dimension, direction_count, stream)
    values = np.empty(direction_count)
    errs = np.empty(direction_count)
    for k, theta in enumerate(dirs):
        est = support_zp(batch, theta, p)
        values[k], errs[k] = est.value, est.stderr
    width = 2.0 * float(values.mean())
    var_dir = float(values.var(ddof=1)) / direction_count
    var_mc = float(np.mean(errs**2)) / direction_count
    return MeanWidth(W=width, stderr=2.0 * math.sqrt(var_dir + var_mc), p=p, direction_count=direction_count)


@dataclass(frozen=True)
class TrivialInclusion:
    left_ok: bool
    right_ok: bool
    h_plus: float
    h_abs_scaled: float
    h_plus_sum: float


def trivial_inclusion_check(batch: SampleBatch, theta, p: float) -> TrivialInclusion:
    """Per-batch sandwich h_+(theta) <= 2^{1/p} h(theta) <= h_+(theta) + h_+(-theta).

    Both inequalities hold for any probability measure, so on a shared
    batch they must pass with floating-point slack only.
    """
    theta = check_direction(theta, batch.dimension)
    h_plus = support_zp_plus(batch, theta, p).value
    h_minus = support_zp_plus(batch, -theta, p).value
    middle = 2.0 ** (1.0 / p) * support_zp(batch, theta, p).value
    return TrivialInclusion(
        left_ok=h_plus <= middle * (1.0 + EXACT_TOL),
        right_ok=middle <= (h_plus + h_minus) * (1.0 + EXACT_TOL),
        h_plus=h_plus,
        h_abs_scaled=middle,
        h_plus_sum=h_plus + h_minus,
    )
