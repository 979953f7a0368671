"""Inner thickening (X +/- U X')/sqrt(2), Gaussian convolution, and tail estimation.

Mixing an isotropic log-concave vector with a rotated independent copy
keeps the law isotropic and log-concave while pushing every one-sided
moment body out to the sqrt(p) scale, and—unlike adding an independent
Gaussian—preserves small-ball behaviour.  The estimators here quantify
both effects by plain Monte Carlo with exact binomial intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .centroid import support_zp_plus
from .orthogonal import OrthogonalMatrix, haar
from .rng import RandomStream
from .sampler import DistributionSpec, SampleBatch, draw
from .stats import clopper_pearson, weighted_log_slope

SIGNS = ("plus", "minus")
DEFAULT_SHARD = 250_000
DEFAULT_CHUNK = 65_536
MAX_TRIALS = 10**8  # plain Monte Carlo only; no importance sampling


@dataclass(frozen=True)
class ThickenedSpec:
    """Law of (X +/- U X')/sqrt(2) for a base family and a fixed rotation."""

    base: DistributionSpec
    rotation: OrthogonalMatrix
    sign: str

    def __post_init__(self) -> None:
        if self.sign not in SIGNS:
            raise ValueError(f"sign must be one of {SIGNS}, got {self.sign!r}")
        if self.rotation.dimension != self.base.dimension:
            raise ValueError("rotation dimension must match the base dimension")

    @property
    def dimension(self) -> int:
        return self.base.dimension


@dataclass(frozen=True)
class GaussianConvolvedSpec:
    """Law of (X + G)/sqrt(2) with G an independent standard Gaussian."""

    base: DistributionSpec

    @property
    def dimension(self) -> int:
        return self.base.dimension


def spec_dimension(spec) -> int:
    if isinstance(spec, DistributionSpec):
        return spec.dimension
    return spec.dimension


def draw_any(spec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw from a base, thickened, or Gaussian-convolved law."""
    if isinstance(spec, DistributionSpec):
        return draw(spec, count, rng)
    if isinstance(spec, ThickenedSpec):
        x = draw(spec.base, count, rng)
        x2 = draw(spec.base, count, rng)
        rotated = x2 @ spec.rotation.entries.T
        mixed = x + rotated if spec.sign == "plus" else x - rotated
        return mixed / math.sqrt(2.0)
    if isinstance(spec, GaussianConvolvedSpec):
        x = draw(spec.base, count, rng)
        g = rng.standard_normal(x.shape)
        return (x + g) / math.sqrt(2.0)
    raise ValueError(f"unsupported spec type {type(spec).__name__}")


def sample_thickened(spec: ThickenedSpec, count: int, stream: RandomStream) -> SampleBatch:
    """Batch of (X +/- U X')/sqrt(2) rows with X, X' independent draws."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return SampleBatch(data=draw_any(spec, count, stream.generator()), spec=spec, provenance=stream)


def sample_gaussian_convolved(base: DistributionSpec, count: int, stream: RandomStream) -> SampleBatch:
    """Batch of (X + G)/sqrt(2) rows."""
    if count < 1:
        raise ValueError("count must be >= 1")
    spec = GaussianConvolvedSpec(base)
    return SampleBatch(data=draw_any(spec, count, stream.generator()), spec=spec, provenance=stream)


@dataclass(frozen=True)
class TailEstimate:
    """Binomial tail estimate with an exact 95% Clopper-Pearson interval."""

    threshold: float
    side: str
    hits: int
    trials: int
    ci_low: float
    ci_high: float

    @property
    def estimate(self) -> float:
        return self.hits / self.trials

    @property
    def stderr(self) -> float:
        p = self.estimate
        return math.sqrt(p * (1.0 - p) / self.trials)

    def interval(self, confidence: float) -> tuple[float, float]:
        return clopper_pearson(self.hits, self.trials, confidence)


def _make_tail(threshold: float, side: str, hits: int, trials: int) -> TailEstimate:
    lo, hi = clopper_pearson(hits, trials)
    return TailEstimate(threshold=threshold, side=side, hits=hits, trials=trials, ci_low=lo, ci_high=hi)


def norm_event_counts(
    spec,
    le_radii,
    ge_radii,
    trials: int,
    stream: RandomStream,
    threads: int = 1,
    shard_size: int = DEFAULT_SHARD,
    chunk: int = DEFAULT_CHUNK,
) -> tuple[np.ndarray, np.ndarray]:
    """Count, in one streaming pass, norms <= r and norms >= r for radius grids.

    Trials are partitioned into fixed-size shards, each on its own
    substream, so the counts do not depend on the thread count.  Draws
    are never materialized beyond one chunk.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if trials > MAX_TRIALS:
        raise ValueError(f"trials capped at {MAX_TRIALS}")
    le = np.asarray([float(r) for r in le_radii])
    ge = np.asarray([float(r) for r in ge_radii])
    if np.any(le < 0) or np.any(ge < 0):
        raise ValueError("radii must be non-negative")

    shards = [shard_size] * (trials // shard_size)
    if trials % shard_size:
        shards.append(trials % shard_size)

    def run_shard(args) -> tuple[np.ndarray, np.ndarray]:
        index, size = args
        rng = stream.substream(1 + index).generator()
        c_le = np.zeros(le.size, dtype=np.int64)
        c_ge = np.zeros(ge.size, dtype=np.int64)
        done = 0
        while done < size:
            b = min(chunk, size - done)
            norms = np.linalg.norm(draw_any(spec, b, rng), axis=1)
            if le.size:
                c_le += (norms[:, None] <= le[None, :]).sum(axis=0)
            if ge.size:
                c_ge += (norms[:, None] >= ge[None, :]).sum(axis=0)
            done += b
        return c_le, c_ge

    jobs = list(enumerate(shards))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_shard, jobs))
    else:
        results = [run_shard(j) for j in jobs]

    total_le = np.zeros(le.size, dtype=np.int64)
    total_ge = np.zeros(ge.size, dtype=np.int64)
    for c_le, c_ge in results:
        total_le += c_le
        total_ge += c_ge
    return total_le, total_ge


def tail_estimate(
    spec,
    threshold: float,
    side: str,
    trials: int,
    stream: RandomStream,
    threads: int = 1,
) -> TailEstimate:
    """P(|X| >= threshold) or P(|X| <= threshold) by streaming Monte Carlo."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    if side not in ("at_least", "at_most"):
        raise ValueError(f"side must be at_least or at_most, got {side!r}")
    if side == "at_most":
        counts, _ = norm_event_counts(spec, [threshold], [], trials, stream, threads=threads)
    else:
        _, counts = norm_event_counts(spec, [], [threshold], trials, stream, threads=threads)
    return _make_tail(threshold, side, int(counts[0]), trials)


@dataclass(frozen=True)
class TransferenceCheck:
    """Tail-transfer inequality P(X tail) <= (2 max of the two mixed tails)^{1/2}."""

    t: float
    side: str
    lhs: TailEstimate
    y_plus: TailEstimate
    y_minus: TailEstimate
    rhs_bound: float
    ok_within_ci: bool


def transference_check(
    base: DistributionSpec,
    U: OrthogonalMatrix,
    t: float,
    side: str,
    trials: int,
    stream: RandomStream,
    confidence: float = 0.9999,
    threads: int = 1,
) -> TransferenceCheck:
    """Check the orthogonal-mixing tail transfer at a matched threshold.

    at_least: P(|X| >= (1+t) sqrt(n)) against the mixed upper tails, t >= 0;
    at_most:  P(|X| <= (1-t) sqrt(n)) against the mixed lower tails, t in [0, 1].
    The flag compares the lower confidence bound of the left side with the
    bound built from the upper confidence bounds of the right side.
    """
    n = base.dimension
    if side == "at_least":
        if t < 0:
            raise ValueError("at_least requires t >= 0")
        radius = (1.0 + t) * math.sqrt(n)
    elif side == "at_most":
        if not 0.0 <= t <= 1.0:
            raise ValueError("at_most requires t in [0, 1]")
        radius = (1.0 - t) * math.sqrt(n)
    else:
        raise ValueError(f"side must be at_least or at_most, got {side!r}")

    specs = {
        "x": base,
        "plus": ThickenedSpec(base, U, "plus"),
        "minus": ThickenedSpec(base, U, "minus"),
    }
    tails = {}
    for k, (name, s) in enumerate(specs.items()):
        sub = stream.substream(1000 * (k + 1))
        tails[name] = tail_estimate(s, radius, side, trials, sub, threads=threads)

    lhs_low = tails["x"].interval(confidence)[0]
    rhs_high = max(tails["plus"].interval(confidence)[1], tails["minus"].interval(confidence)[1])
    rhs_bound = math.sqrt(2.0 * rhs_high)
    return TransferenceCheck(
        t=t,
        side=side,
        lhs=tails["x"],
        y_plus=tails["plus"],
        y_minus=tails["minus"],
        rhs_bound=rhs_bound,
        ok_within_ci=lhs_low <= rhs_bound,
    )


def deviation_curve(spec, t_grid, trials: int, stream: RandomStream, threads: int = 1) -> list[TailEstimate]:
    """P(| |X| - sqrt(n) | >= t sqrt(n)) per grid point, on shared draws.

    Sharing one set of draws across the grid makes the curve exactly
    monotone decreasing in t (the events are nested).  Each estimate's
    ``threshold`` records the deviation fraction t.
    """
    ts = [float(t) for t in t_grid]
    if any(t < 0 for t in ts):
        raise ValueError("t values must be non-negative")
    root_n = math.sqrt(spec_dimension(spec))
    lo = [(1.0 - t) * root_n for t in ts]  # for t > 1 the lower branch is empty
    hi = [(1.0 + t) * root_n for t in ts]
    c_le, c_ge = norm_event_counts(spec, [max(r, 0.0) for r in lo], hi, trials, stream, threads=threads)
    out = []
    for i, t in enumerate(ts):
        hits = int(c_ge[i]) + (int(c_le[i]) if lo[i] >= 0 else 0)
        out.append(_make_tail(t, "at_least", hits, trials))
    return out


@dataclass(frozen=True)
class SmallBallCurve:
    points: list
    log_slope: float | None

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


def small_ball_curve(spec, eps_grid, trials: int, stream: RandomStream, threads: int = 1) -> SmallBallCurve:
    """P(|X| <= eps sqrt(n)) per eps, plus the empirical log-log slope.

    Zero hits at small eps are reported with their one-sided interval, not
    as an error; the slope is fit over the grid points that saw hits.
    """
    eps = [float(e) for e in eps_grid]
    if any(not 0.0 < e <= 1.0 for e in eps):
        raise ValueError("eps values must lie in (0, 1]")
    root_n = math.sqrt(spec_dimension(spec))
    c_le, _ = norm_event_counts(spec, [e * root_n for e in eps], [], trials, stream, threads=threads)
    points = [_make_tail(e, "at_most", int(c), trials) for e, c in zip(eps, c_le)]
    positive = [(e, c / trials) for e, c in zip(eps, c_le) if c > 0]
    slope = None
    if len(positive) >= 2:
        xs, ys = zip(*positive)
        slope = weighted_log_slope(np.array(xs), np.array(ys))
    return SmallBallCurve(points=points, log_slope=slope)


@dataclass(frozen=True)
class FloorDemoRow:
    t: float
    floor: TailEstimate
    y_plus: TailEstimate
    y_minus: TailEstimate

    @property
    def floor_bound(self) -> float:
        return self.floor.estimate

    @property
    def thm_bound(self) -> float:
        return math.sqrt(2.0 * max(self.y_plus.estimate, self.y_minus.estimate))


def gaussian_floor_demo(
    base: DistributionSpec,
    t_grid,
    trials: int,
    stream: RandomStream,
    U: OrthogonalMatrix | None = None,
    threads: int = 1,
) -> list[FloorDemoRow]:
    """Gaussian-convolution small-ball floor versus the orthogonal-mixing bound.

    Per t in [0, 1]: the Gaussian-convolution transfer bound
    P(|(X+G)/sqrt 2| <= sqrt(((1-t)^2+1)/2) sqrt(n)) (unit constant), which
    plateaus at the t=1 floor, against (2 max of the mixed lower tails)^{1/2}
    at radius (1-t) sqrt(n), which decays to 0.
    """
    ts = [float(t) for t in t_grid]
    if any(not 0.0 <= t <= 1.0 for t in ts):
        raise ValueError("t values must lie in [0, 1]")
    n = base.dimension
    root_n = math.sqrt(n)
    if U is None:
        U = haar(n, stream.substream(777))

    conv = GaussianConvolvedSpec(base)
    conv_radii = [math.sqrt(((1.0 - t) ** 2 + 1.0) / 2.0) * root_n for t in ts]
    mixed_radii = [(1.0 - t) * root_n for t in ts]

    c_floor, _ = norm_event_counts(conv, conv_radii, [], trials, stream.substream(1000), threads=threads)
    c_plus, _ = norm_event_counts(ThickenedSpec(base, U, "plus"), mixed_radii, [], trials, stream.substream(2000), threads=threads)
    c_minus, _ = norm_event_counts(ThickenedSpec(base, U, "minus"), mixed_radii, [], trials, stream.substream(3000), threads=threads)

    rows = []
    for i, t in enumerate(ts):
        rows.append(
            FloorDemoRow(
                t=t,
                floor=_make_tail(conv_radii[i], "at_most", int(c_floor[i]), trials),
                y_plus=_make_tail(mixed_radii[i], "at_most", int(c_plus[i]), trials),
                y_minus=_make_tail(mixed_radii[i], "at_most", int(c_minus[i]), trials),
            )
        )
    return rows


@dataclass(frozen=True)
class SumLowerBoundCheck:
    """h_+(Y)(theta) against (h_+(X)(theta) + h_+(X)(U^T theta)) / (2 sqrt(2) e^{1/p})."""

    lhs: float
    lhs_stderr: float
    rhs: float
    rhs_stderr: float
    ok_within_se: bool


def onesided_sum_lower_check(
    thickened: SampleBatch,
    base_batch: SampleBatch,
    U: OrthogonalMatrix,
    theta,
    p: float,
    slack_se: float = 4.0,
) -> SumLowerBoundCheck:
    """Per-direction Minkowski-sum lower bound for the mixed law.

    Uses h_{U(K)}(theta) = h_K(U^T theta) to evaluate the rotated term on
    the base batch.
    """
    lhs = support_zp_plus(thickened, theta, p)
    a = support_zp_plus(base_batch, theta, p)
    b = support_zp_plus(base_batch, U.entries.T @ np.asarray(theta, dtype=float), p)
    factor = 1.0 / (2.0 * math.sqrt(2.0) * math.exp(1.0 / p))
    rhs = factor * (a.value + b.value)
    rhs_se = factor * math.hypot(a.stderr, b.stderr)
    joint = math.hypot(lhs.stderr, rhs_se)
    return SumLowerBoundCheck(
        lhs=lhs.value,
        lhs_stderr=lhs.stderr,
        rhs=rhs,
        rhs_stderr=rhs_se,
        ok_within_se=lhs.value >= rhs - slack_se * joint,
    )
