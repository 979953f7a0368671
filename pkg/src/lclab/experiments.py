"""Named, reproducible experiments over the estimation library.

Every experiment is a pure function of its resolved configuration: records
regenerate bit-for-bit from (params, seed).  Assertion-style experiments
set a pass flag per record; the confidence policy widens inequalities by
4 standard errors, or uses 99.99% exact binomial bounds for counts, so a
full suite false-alarms well under once per thousand runs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from . import centroid, orthogonal, polygon2d, sampler, thicken
from .config import ConfigError, ExperimentConfig
from .records import ResultRecord
from .rng import RandomStream
from .stats import clopper_pearson

SE_SLACK = 4.0
COUNT_CONFIDENCE = 0.9999
EXACT_TOL = 1e-9

# fixed stream roles per experiment run (offsets under the root seed);
# searches and bulk polygon draws sit far from the batch range to avoid overlap
S_BATCH, S_DIRECTIONS, S_ROTATION, S_TRIALS, S_AUX = 0, 1, 2, 3, 5
S_SEARCH = 100
S_POLYGONS = 1000


def _rec(cfg: ExperimentConfig, metric: str, estimate: float, samples: int, **kw) -> ResultRecord:
    # numpy scalars are not JSON-serializable; normalize every field
    for key in ("stderr", "ci_low", "ci_high"):
        if kw.get(key) is not None:
            kw[key] = float(kw[key])
    if kw.get("passed") is not None:
        kw["passed"] = bool(kw["passed"])
    return ResultRecord(
        experiment=cfg.experiment,
        metric=metric,
        estimate=float(estimate),
        samples=int(samples),
        seed=cfg.root_seed,
        params=cfg.params(),
        **kw,
    )


def _stream(cfg: ExperimentConfig, role: int) -> RandomStream:
    return RandomStream(cfg.root_seed, role)


def _base_spec(cfg: ExperimentConfig) -> sampler.DistributionSpec:
    return sampler.DistributionSpec(cfg.family, cfg.n)


def _tail_rec(cfg, metric, tail: thicken.TailEstimate, coords, passed=None) -> ResultRecord:
    return _rec(
        cfg,
        metric,
        tail.estimate,
        tail.trials,
        coords=coords,
        stderr=tail.stderr,
        ci_low=tail.ci_low,
        ci_high=tail.ci_high,
        passed=passed,
    )


# ----------------------------------------------------------------- isotropy

_FOURTH_MOMENT_CAP = 24.0


def _fourth_moment(family: str, n: int) -> float:
    if family == "ball":
        return 3.0 * (n + 2) / (n + 4)
    return sampler.axis_moment_oracle(family, 4.0)


def run_isotropy(cfg: ExperimentConfig, threads: int) -> list[ResultRecord]:
    spec = _base_spec(cfg)
    batch = sampler.sample(spec, cfg.trials, _stream(cfg, S_BATCH))
    report = sampler.isotropy_report(batch)
    kappa = min(_fourth_moment(cfg.family, cfg.n), _FOURTH_MOMENT_CAP)
    bound = 5.0 * math.sqrt(kappa / cfg.trials)
    return [
        _rec(cfg, "max_abs_mean", report.max_abs_mean, cfg.trials, passed=report.max_abs_mean < bound),
        _rec(cfg, "max_cov_deviation", report.max_cov_deviation, cfg.trials, passed=report.max_cov_deviation < bound),
    ]


# ---------------------------------------------------------------- gruenbaum


def run_gruenbaum(cfg: ExperimentConfig, threads: int) -> list[ResultRecord]:
    spec = _base_spec(cfg)
    batch = sampler.sample(spec, cfg.trials, _stream(cfg, S_BATCH))
    dirs = [np.eye(cfg.n)[0]]
    if cfg.directions > 1:
        dirs.extend(orthogonal.uniform_directions(cfg.n, cfg.directions - 1, _stream(cfg, S_DIRECTIONS)))
    lo_target, hi_target = 1.0 / math.e, 1.0 - 1.0 / math.e
    records = []
    for k, theta in enumerate(dirs):
        hits = int((batch.data @ theta >= 0.0).sum())
        mass = hits / cfg.trials
        se = math.sqrt(max(mass * (1.0 - mass), 1e-12) / cfg.trials)
        ok = lo_target - SE_SLACK * se <= mass <= hi_target + SE_SLACK * se
        ci = clopper_pearson(hits, cfg.trials)
        records.append(
            _rec(cfg, "positive_mass", mass, cfg.trials,
                 coords={"theta_index": k}, stderr=se, ci_low=ci[0], ci_high=ci[1], passed=ok)
        )
    return records


# ------------------------------------------------------- trivial-inclusion


def run_trivial_inclusion(cfg: ExperimentConfig, threads: int) -> list[ResultRecord]:
    spec = _base_spec(cfg)
    batch = sampler.sample(spec, cfg.trials, _stream(cfg, S_BATCH))
    rng = _stream(cfg, S_DIRECTIONS).generator()
    records = []
    for k in range(cfg.directions):
        theta = centroid.unit(rng.standard_normal(cfg.n))
        p = 1.0 + 63.0 * rng.random()
        q = p + (64.0 - p) * rng.random()
        sandwich = centroid.trivial_inclusion_check(batch, theta, p)
        growth = centroid.berwald_check(batch, theta, p, q)
        ok = sandwich.left_ok and sandwich.right_ok and growth.mono_ok
        records.append(
            _rec(cfg, "exact_inclusion", sandwich.h_plus / sandwich.h_abs_scaled, cfg.trials,
                 coords={"theta_index": k, "p": p, "q": q}, passed=ok)
        )
    return records


# ------------------------------------------------------------------ berwald


def run_berwald(cfg: ExperimentConfig, threads: int) -> list[ResultRecord]:
    spec = _base_spec(cfg)
    batch = sampler.sample(spec, cfg.trials, _stream(cfg, S_BATCH))
    dirs = orthogonal.uniform_directions(cfg.n, cfg.directions, _stream(cfg, S_DIRECTIONS))
    pairs = list(zip(cfg.p_list[:-1], cfg.p_list[1:]))
    records = []
    for k, theta in enumerate(dirs):
        for p, q in pairs:
            chk = centroid.berwald_check(batch, theta, p, q)
            records.append(
                _rec(cfg, "growth_ratio", chk.ratio, cfg.trials,
                     coords={"theta_index": k, "p": p, "q": q}, passed=chk.mono_ok)
            )
    return records


# ------------------------------------------------------------ super-gaussian


def run_super_gaussian(cfg: ExperimentConfig, threads: int) -> list[ResultRecord]:
    spec = _base_spec(cfg)
    batch = sampler.sample(spec, cfg.trials, _stream(cfg, S_BATCH))
    dirs = orthogonal.uniform_directions(cfg.n, cfg.directions, _stream(cfg, S_DIRECTIONS))
    records = []
    for p in cfg.p_list:
        values = [centroid.support_zp_plus(batch, theta, p).value for theta in dirs]
        gm = centroid.gaussian_moment(p)
        records.append(_rec(cfg, "min_ratio_gaussian", min(values) / gm, cfg.trials, coords={"p": p}))
        records.append(_rec(cfg, "max_ratio_gaussian", max(values) / gm, cfg.trials, coords={"p": p}))
        records.append(_rec(cfg, "min_ratio_sqrtp", min(values) / math.sqrt(p), cfg.trials, coords={"p": p}))
    return records


# ------------------------------------------------------ cube-counterexample

RECOVERY_FACTOR = 1.5  # pilot-confirmed margin of the mixed law over the cube axis


def run_cube_counterexample(cfg: ExperimentConfig, threads: int) -> list[ResultRecord]:
    if cfg.family != "cube":
        raise ConfigError("cube-counterexample requires family = cube")
    spec = _base_spec(cfg)
    U = orthogonal.haar(cfg.n, _stream(cfg, S_ROTATION))
    cube_batch = sampler.sample(spec, cfg.trials, _stream(cfg, S_BATCH))
    batches = {
        sign: thicken.sample_thickened(thicken.ThickenedSpec(spec, U, sign), cfg.trials, _stream(cfg, S_AUX + i))
        for i, sign in enumerate(thicken.SIGNS)
    }
    steps = max(1, cfg.directions // cfg.restarts - 1)
    e1 = np.eye(cfg.n)[0]
    records = []
    for j, p in enumerate(cfg.p_list):
        oracle = sampler.axis_moment_oracle("cube", p) ** (1.0 / p) / math.sqrt(p)
        axis = centroid.support_zp_plus(cube_batch, e1, p)
        axis_ratio = axis.value / math.sqrt(p)
        axis_ok = abs(axis_ratio - oracle) <= SE_SLACK * axis.stderr / math.sqrt(p)
        records.append(
            _rec(cfg, "axis_ratio_sqrtp", axis_ratio, cfg.trials,
                 coords={"p": p}, stderr=axis.stderr / math.sqrt(p), passed=axis_ok)
        )
        worst = {}
        for i, sign in enumerate(thicken.SIGNS):
            found = centroid.worst_direction(
                batches[sign], p, cfg.restarts, steps, _stream(cfg, S_SEARCH + 10 * j + i)
            )
            worst[sign] = found.ratio_sqrtp
            records.append(
                _rec(cfg, "worst_ratio_sqrtp", found.ratio_sqrtp, cfg.trials, coords={"p": p, "sign": sign})
            )
        factor = min(worst.values()) / oracle
        records.append(
            _rec(cfg, "recovery_factor", factor, cfg.trials,
                 coords={"p": p}, passed=factor >= RECOVERY_FACTOR)
        )
    return records


# ---------------------------------------------------------------- psi-alpha


def run_psi_alpha(cfg: ExperimentConfig, threads: int) -> list[ResultRecord]:
    spec = _base_spec(cfg)
    batch = sampler.sample(spec, cfg.trials, _stream(cfg, S_BATCH))
    est = centroid.psi_alpha_estimate(
        batch, spec.nominal_alpha, p_grid=cfg.p_list,
        direction_count=cfg.directions, stream=_stream(cfg, S_DIRECTIONS),
    )
    return [
        _rec(cfg, "psi_constant", est.constant, cfg.trials),
        _rec(cfg, "argmax_p", est.argmax_p, cfg.trials),
    ]


# --------------------------------------------------------------- mean-width


def run_mean_width(cfg: ExperimentConfig, threads: int) -> list[ResultRecord]:
    spec = _base_spec(cfg)
    batch = sampler.sample(spec, cfg.trials, _stream(cfg, S_BATCH))
    records = []
    for j, p in enumerate(cfg.p_list):
        mw = centroid.mean_width_zp(batch, p, cfg.directions, _stream(cfg, S_DIRECTIONS).substream(j))
        normalized = mw.W / math.sqrt(p)
        ok = (mw.W - SE_SLACK * mw.stderr) / math.sqrt(p) <= 2.0
        records.append(_rec(cfg, "mean_width", mw.W, cfg.trials, coords={"p": p}, stderr=mw.stderr))
        records.append(
            _rec(cfg, "mean_width_over_sqrtp", normalized, cfg.trials,
                 coords={"p": p}, stderr=mw.stderr / math.sqrt(p), passed=ok)
        )
    return records


# ------------------------------------------------------- thm1-transference


def run_transference(cfg: ExperimentConfig, threads: int) -> list[ResultRecord]:
    spec = _base_spec(cfg)
    U = orthogonal.haar(cfg.n, _stream(cfg, S_ROTATION))
    root_n = math.sqrt(cfg.n)
    ts = list(cfg.t_grid)
    if any(t < 0 for t in ts):
        raise ConfigError("t_grid values must be non-negative")
    le = [max(0.0, (1.0 - t)) * root_n for t in ts]
    ge = [(1.0 + t) * root_n for t in ts]
    specs = {
        "x": spec,
        "plus": thicken.ThickenedSpec(spec, U, "plus"),
        "minus": thicken.ThickenedSpec(spec, U, "minus"),
    }
    counts = {}
    for k, (name, s) in enumerate(specs.items()):
        counts[name] = thicken.norm_event_counts(
            s, le, ge, cfg.trials, _stream(cfg, S_TRIALS).substream(1000 * k), threads=threads
        )
    records = []
    for i, t in enumerate(ts):
        for side, pick in (("at_least", 1), ("at_most", 0)):
            if side == "at_most" and t > 1.0:
                continue
            lhs_hits = int(counts["x"][pick][i])
            rhs_hits = max(int(counts["plus"][pick][i]), int(counts["minus"][pick][i]))
            lhs_low = clopper_pearson(lhs_hits, cfg.trials, COUNT_CONFIDENCE)[0]
            rhs_high = max(
                clopper_pearson(int(counts[name][pick][i]), cfg.trials, COUNT_CONFIDENCE)[1]
                for name in ("plus", "minus")
            )
            rhs_bound = math.sqrt(2.0 * rhs_high)
            ci = clopper_pearson(lhs_hits, cfg.trials)
            records.append(
                _rec(cfg, "tail_transfer", lhs_hits / cfg.trials, cfg.trials,
                     coords={"t": t, "side": side}, ci_low=ci[0], ci_high=ci[1],
                     passed=lhs_low <= rhs_bound)
            )
            records.append(
                _rec(cfg, "transfer_bound", rhs_bound, cfg.trials, coords={"t": t, "side": side})
            )
    return records


# ------------------------------------------------------------- thm1-part2


def run_part2_envelope(cfg: ExperimentConfig, threads: int) -> list[ResultRecord]:
    spec = _base_spec(cfg)
    alpha = spec.nominal_alpha
    U = orthogonal.haar(cfg.n, _stream(cfg, S_ROTATION))
    base = sampler.sample(spec, cfg.trials, _stream(cfg, S_BATCH))
    dirs = orthogonal.uniform_directions(cfg.n, cfg.directions, _stream(cfg, S_DIRECTIONS))
    records = []
    base_env = {
        p: max(centroid.support_zp_plus(base, theta, p).value for theta in dirs) / p ** (1.0 / alpha)
        for p in cfg.p_list
    }
    for i, sign in enumerate(thicken.SIGNS):
        mixed = thicken.sample_thickened(thicken.ThickenedSpec(spec, U, sign), cfg.trials, _stream(cfg, S_AUX + i))
        for p in cfg.p_list:
            env = max(centroid.support_zp_plus(mixed, theta, p).value for theta in dirs) / p ** (1.0 / alpha)
            records.append(
                _rec(cfg, "envelope_ratio", env / base_env[p], cfg.trials,
                     coords={"p": p, "sign": sign}, passed=env <= 2.0 * base_env[p])
            )
    return records


# ------------------------------------------------------------- thm1-part3

_SEARCH_STEPS = 40


def run_part3_floor(cfg: ExperimentConfig, threads: int) -> list[ResultRecord]:
    spec = _base_spec(cfg)
    U = orthogonal.haar(cfg.n, _stream(cfg, S_ROTATION))
    records = []
    for i, sign in enumerate(thicken.SIGNS):
        mixed = thicken.sample_thickened(thicken.ThickenedSpec(spec, U, sign), cfg.trials, _stream(cfg, S_AUX + i))
        for j, p in enumerate(cfg.p_list):
            found = centroid.worst_direction(
                mixed, p, cfg.restarts, _SEARCH_STEPS, _stream(cfg, S_SEARCH + 10 * j + i)
            )
            records.append(
                _rec(cfg, "floor_ratio_sqrtp", found.ratio_sqrtp, cfg.trials, coords={"p": p, "sign": sign})
            )
    return records


# ------------------------------------------------------------------- lemma0


def run_lemma0(cfg: ExperimentConfig, threads: int) -> list[ResultRecord]:
    spec = _base_spec(cfg)
    U = orthogonal.haar(cfg.n, _stream(cfg, S_ROTATION))
    base = sampler.sample(spec, cfg.trials, _stream(cfg, S_BATCH))
    mixed = thicken.sample_thickened(thicken.ThickenedSpec(spec, U, "plus"), cfg.trials, _stream(cfg, S_AUX))
    dirs = orthogonal.uniform_directions(cfg.n, cfg.directions, _stream(cfg, S_DIRECTIONS))
    records = []
    for p in cfg.p_list:
        for k, theta in enumerate(dirs):
            chk = thicken.onesided_sum_lower_check(mixed, base, U, theta, p, slack_se=SE_SLACK)
            records.append(
                _rec(cfg, "sum_lower_margin", chk.lhs / chk.rhs, cfg.trials,
                     coords={"p": p, "theta_index": k}, stderr=chk.lhs_stderr, passed=chk.ok_within_se)
            )
    return records


# ------------------------------------------------------------ gaussian-floor


def run_gaussian_floor(cfg: ExperimentConfig, threads: int) -> list[ResultRecord]:
    spec = _base_spec(cfg)
    U = orthogonal.haar(cfg.n, _stream(cfg, S_ROTATION))
    rows = thicken.gaussian_floor_demo(spec, cfg.t_grid, cfg.trials, _stream(cfg, S_TRIALS), U=U, threads=threads)
    records = []
    for row in rows:
        records.append(_tail_rec(cfg, "floor_bound", row.floor, coords={"t": row.t}))
        records.append(_rec(cfg, "mixing_bound", row.thm_bound, cfg.trials, coords={"t": row.t}))
    last = rows[-1]
    records.append(
        _rec(cfg, "plateau_vs_decay", last.floor_bound - last.thm_bound, cfg.trials,
             coords={"t": last.t}, passed=last.thm_bound < last.floor_bound)
    )
    return records


# ----------------------------------------------------------- deviation-curve


def run_deviation_curve(cfg: ExperimentConfig, threads: int) -> list[ResultRecord]:
    spec = _base_spec(cfg)
    points = thicken.deviation_curve(spec, cfg.t_grid, cfg.trials, _stream(cfg, S_TRIALS), threads=threads)
    records = [_tail_rec(cfg, "deviation_mass", pt, coords={"t": pt.threshold}) for pt in points]
    monotone = all(points[i].hits >= points[i + 1].hits for i in range(len(points) - 1))
    records.append(_rec(cfg, "monotone_envelope", float(monotone), cfg.trials, passed=monotone))
    return records


# --------------------------------------------------------------- small-ball


def run_small_ball(cfg: ExperimentConfig, threads: int) -> list[ResultRecord]:
    spec = _base_spec(cfg)
    curve = thicken.small_ball_curve(spec, cfg.eps_grid, cfg.trials, _stream(cfg, S_TRIALS), threads=threads)
    records = [_tail_rec(cfg, "small_ball_mass", pt, coords={"eps": pt.threshold}) for pt in curve.points]
    order = sorted(range(len(curve.points)), key=lambda i: curve.points[i].threshold)
    monotone = all(
        curve.points[order[i]].hits <= curve.points[order[i + 1]].hits for i in range(len(order) - 1)
    )
    records.append(_rec(cfg, "monotone_in_eps", float(monotone), cfg.trials, passed=monotone))
    if curve.log_slope is not None:
        records.append(
            _rec(cfg, "log_slope", curve.log_slope, cfg.trials, passed=curve.log_slope > 0.0)
        )
    return records


# ---------------------------------------------------------------- cap-bound


def run_cap_bound(cfg: ExperimentConfig, threads: int) -> list[ResultRecord]:
    scan = orthogonal.cap_bound_scan(cfg.n, cfg.eps_grid)
    records = [
        _rec(cfg, "cap_measure", orthogonal.cap_measure(cfg.n, e), 0, coords={"eps": e})
        for e in cfg.eps_grid
    ]
    records.append(_rec(cfg, "empirical_C", scan.empirical_C, 0, coords={"eps": scan.argmax_eps}))
    return records


# ------------------------------------------------------- rotation-separation

_SEPARATION_NORM = 10.0
_SEPARATION_RADIUS = 5.0


def run_rotation_separation(cfg: ExperimentConfig, threads: int) -> list[ResultRecord]:
    centers = np.zeros((2, cfg.n))
    centers[0, 0] = _SEPARATION_NORM
    centers[1, 0] = -_SEPARATION_NORM
    result = orthogonal.rotation_separation_sim(centers, _SEPARATION_RADIUS, cfg.trials, _stream(cfg, S_TRIALS))
    oracle = orthogonal.cap_measure(cfg.n, 2.0 / _SEPARATION_NORM)
    records = [
        _rec(cfg, "p_all_separated", result.p_all_separated, cfg.trials,
             ci_low=result.ci_low, ci_high=result.ci_high),
        _rec(cfg, "worst_pair_rate", result.worst_pair_rate, cfg.trials),
        _rec(cfg, "cap_oracle", oracle, 0),
    ]
    for k, ((i, j), rate) in enumerate(sorted(result.pair_rates.items())):
        se = math.sqrt(max(oracle * (1.0 - oracle), 1e-12) / cfg.trials)
        records.append(
            _rec(cfg, f"pair_rate_{i}_{j}", rate, cfg.trials,
                 coords={"theta_index": k}, stderr=se, passed=abs(rate - oracle) <= SE_SLACK * se)
        )
    return records


# ------------------------------------------------------------- polygon-suite

_ZP_BATCH_COUNT = 100_000
_ANGLE_GRIDS = (90, 180, 360)


def run_polygon_suite(cfg: ExperimentConfig, threads: int) -> list[ResultRecord]:
    records = []
    triangle = polygon2d.ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    square = polygon2d.ConvexPolygon(np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]))
    rs_tri = polygon2d.rogers_shephard_ratio(triangle)
    rs_sq = polygon2d.rogers_shephard_ratio(square)
    records.append(_rec(cfg, "difference_body_ratio_triangle", rs_tri, 0, passed=abs(rs_tri - 6.0) <= EXACT_TOL))
    records.append(_rec(cfg, "difference_body_ratio_square", rs_sq, 0, passed=abs(rs_sq - 4.0) <= EXACT_TOL))

    centered = polygon2d.translate(triangle, -polygon2d.barycenter(triangle))
    mp_tri = polygon2d.milman_pajor_ratio(centered)
    records.append(_rec(cfg, "symmetrization_ratio_triangle", mp_tri, 0, passed=abs(mp_tri - 2.0 / 3.0) <= EXACT_TOL))

    mp_min, rs_min, rs_max = math.inf, math.inf, -math.inf
    for i in range(cfg.trials):
        poly = polygon2d.random_convex_polygon(3 + i % 10, _stream(cfg, S_POLYGONS).substream(i), centered=True)
        mp_min = min(mp_min, polygon2d.milman_pajor_ratio(poly))
        ratio = polygon2d.rogers_shephard_ratio(poly)
        rs_min, rs_max = min(rs_min, ratio), max(rs_max, ratio)
    records.append(_rec(cfg, "symmetrization_ratio_min", mp_min, cfg.trials, passed=mp_min >= 0.25 - EXACT_TOL))
    records.append(
        _rec(cfg, "difference_body_ratio_range", rs_max, cfg.trials,
             passed=(rs_min >= 4.0 - EXACT_TOL) and (rs_max <= 6.0 + EXACT_TOL))
    )

    worst_involution = 0.0
    for i in range(cfg.directions):
        poly = polygon2d.random_convex_polygon(3 + i % 10, _stream(cfg, S_POLYGONS).substream(500_000 + i), centered=True)
        poly = polygon2d.scale(poly, 1.0 / polygon2d.origin_margin(poly))
        back = polygon2d.polar(polygon2d.polar(poly))
        if len(back) == len(poly):
            err = float(np.abs(back.vertices - poly.vertices).max())
        else:
            err = math.inf
        worst_involution = max(worst_involution, err)
    records.append(
        _rec(cfg, "polar_involution_max_error", worst_involution, cfg.directions,
             passed=worst_involution <= EXACT_TOL)
    )

    batch = sampler.sample(sampler.DistributionSpec("gaussian", 2), _ZP_BATCH_COUNT, _stream(cfg, S_BATCH))
    areas = {}
    for angles in _ANGLE_GRIDS:
        fit = polygon2d.zp_polygon(batch, cfg.p_list[0], angles)
        areas[angles] = polygon2d.area(fit.polygon)
        if angles == _ANGLE_GRIDS[-1]:
            target = centroid.gaussian_moment(cfg.p_list[0])
            ok = abs(fit.vr - target) / target <= 0.05
            records.append(
                _rec(cfg, "moment_body_vr", fit.vr, _ZP_BATCH_COUNT,
                     coords={"p": cfg.p_list[0], "angle_count": angles}, passed=ok)
            )
    refinement = all(
        areas[_ANGLE_GRIDS[i]] >= areas[_ANGLE_GRIDS[i + 1]] - EXACT_TOL
        for i in range(len(_ANGLE_GRIDS) - 1)
    )
    records.append(
        _rec(cfg, "grid_refinement_monotone", float(refinement), _ZP_BATCH_COUNT, passed=refinement)
    )
    return records


# ------------------------------------------------------------------ registry


@dataclass(frozen=True)
class RegistryEntry:
    fn: object
    description: str
    required: tuple
    defaults: dict


REGISTRY: dict[str, RegistryEntry] = {
    "isotropy": RegistryEntry(
        run_isotropy,
        "empirical mean and covariance deviations of a family (zero mean, identity covariance)",
        ("family", "n"),
        {"trials": 10**6},
    ),
    "gruenbaum": RegistryEntry(
        run_gruenbaum,
        "positive mass of centered log-concave marginals stays in [1/e, 1 - 1/e]",
        ("family", "n"),
        {"trials": 10**6, "directions": 20},
    ),
    "trivial-inclusion": RegistryEntry(
        run_trivial_inclusion,
        "per-batch sandwich h+ <= 2^{1/p} h <= h+(th) + h+(-th), exact up to float rounding",
        ("family",),
        {"n": 8, "trials": 10**5, "directions": 25},
    ),
    "berwald": RegistryEntry(
        run_berwald,
        "moment monotonicity h_p <= h_q (exact per batch) and the q/p growth ratio",
        ("family",),
        {"n": 8, "trials": 10**5, "directions": 10, "p_list": (2.0, 4.0, 8.0, 16.0, 32.0, 64.0)},
    ),
    "super-gaussian": RegistryEntry(
        run_super_gaussian,
        "one-sided support against the Gaussian moment baseline and against sqrt(p)",
        ("family", "n"),
        {"trials": 200_000, "directions": 50, "p_list": (2.0, 4.0, 8.0, 16.0, 32.0, 64.0)},
    ),
    "cube-counterexample": RegistryEntry(
        run_cube_counterexample,
        "cube axis moments stall below sqrt(p); mixing with a rotated copy recovers the floor",
        ("family", "n"),
        {"trials": 10**6, "directions": 500, "restarts": 10, "p_list": (16.0, 32.0, 64.0)},
    ),
    "psi-alpha": RegistryEntry(
        run_psi_alpha,
        "empirical psi_alpha constant: max over (p, theta) of h_p / (p^{1/alpha} h_2)",
        ("family", "n"),
        {"trials": 200_000, "directions": 64, "p_list": (2.0, 4.0, 8.0, 16.0)},
    ),
    "mean-width": RegistryEntry(
        run_mean_width,
        "mean width of moment bodies; W(Z_p)/sqrt(p) stays below a universal ceiling",
        ("family", "n"),
        {"trials": 200_000, "directions": 200, "p_list": (2.0, 4.0, 8.0, 16.0)},
    ),
    "thm1-transference": RegistryEntry(
        run_transference,
        "two-sided tail transfer: P(X tail) <= (2 max of the two mixed tails)^{1/2}",
        ("family", "n"),
        {"trials": 10**6, "t_grid": (0.0, 0.25, 0.5, 1.0)},
    ),
    "thm1-part2": RegistryEntry(
        run_part2_envelope,
        "outer envelope: mixed one-sided bodies stay within twice the base p^{1/alpha} envelope",
        ("family", "n"),
        {"trials": 200_000, "directions": 100, "p_list": (2.0, 4.0, 8.0, 16.0)},
    ),
    "thm1-part3": RegistryEntry(
        run_part3_floor,
        "inner floor: worst-direction one-sided support of the mixed law on a dyadic p grid",
        ("family", "n"),
        {"trials": 200_000, "restarts": 8, "p_list": (2.0, 4.0, 8.0, 16.0)},
    ),
    "lemma0": RegistryEntry(
        run_lemma0,
        "per-direction Minkowski-sum lower bound with the 1/(2 sqrt(2) e^{1/p}) factor",
        ("family", "n"),
        {"trials": 200_000, "directions": 50, "p_list": (2.0, 4.0, 8.0)},
    ),
    "gaussian-floor": RegistryEntry(
        run_gaussian_floor,
        "Gaussian-convolution lower-tail bound plateaus while the mixing bound decays to 0",
        ("family",),
        {"n": 8, "trials": 10**6, "t_grid": (0.0, 0.25, 0.5, 0.75, 0.9, 1.0)},
    ),
    "deviation-curve": RegistryEntry(
        run_deviation_curve,
        "two-sided norm deviation probabilities P(| |X| - sqrt n | >= t sqrt n) on a t grid",
        ("family", "n"),
        {"trials": 10**6, "t_grid": (0.0, 0.25, 0.5, 0.75, 1.0)},
    ),
    "small-ball": RegistryEntry(
        run_small_ball,
        "small-ball curve P(|X| <= eps sqrt n) and its empirical log-log slope",
        ("family", "n"),
        {"trials": 10**6, "eps_grid": (0.4, 0.5, 0.6, 0.7, 1.0)},
    ),
    "cap-bound": RegistryEntry(
        run_cap_bound,
        "smallest C validating cap_measure(n, eps) <= (C eps)^{n-1} on an eps grid",
        (),
        {"n": 3, "eps_grid": (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)},
    ),
    "rotation-separation": RegistryEntry(
        run_rotation_separation,
        "random rotation separates far unit balls; pair rates match the exact cap measure",
        (),
        {"n": 3, "trials": 10**5},
    ),
    "polygon-suite": RegistryEntry(
        run_polygon_suite,
        "planar exact checks: difference body, central symmetrization, polarity, moment-body vr",
        (),
        {"trials": 1000, "directions": 100, "p_list": (4.0,)},
    ),
}


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> list[ResultRecord]:
    """Resolve defaults, run the named experiment, stamp wall time."""
    entry = REGISTRY.get(cfg.experiment)
    if entry is None:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}")
    resolved = cfg.resolved(**entry.defaults)
    resolved.require(*entry.required)
    start = time.perf_counter()
    records = entry.fn(resolved, threads)
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    return [replace(r, wall_time_ms=elapsed_ms) for r in records]


@dataclass(frozen=True)
class ReplayResult:
    record: ResultRecord
    matches: bool
    regenerated: ResultRecord | None


def replay_records(records, threads: int = 1) -> list[ReplayResult]:
    """Re-run each record's experiment from its parameter echo and compare.

    Estimates, intervals, and pass flags must reproduce bit-for-bit; the
    informational timing field is ignored.
    """
    import json

    from .config import config_from_params

    groups: dict = {}
    for rec in records:
        key = (rec.experiment, json.dumps(rec.params, sort_keys=True), rec.seed)
        groups.setdefault(key, []).append(rec)

    out = []
    for (experiment, params_json, seed), group in groups.items():
        cfg = config_from_params(json.loads(params_json), seed)
        regenerated = run_experiment(cfg, threads=threads)
        index = {(r.metric, json.dumps(r.coords, sort_keys=True)): r for r in regenerated}
        for rec in group:
            fresh = index.get((rec.metric, json.dumps(rec.coords, sort_keys=True)))
            if fresh is None:
                out.append(ReplayResult(rec, False, None))
                continue
            matches = (
                fresh.estimate == rec.estimate
                and fresh.stderr == rec.stderr
                and fresh.ci_low == rec.ci_low
                and fresh.ci_high == rec.ci_high
                and fresh.passed == rec.passed
                and fresh.samples == rec.samples
            )
            out.append(ReplayResult(rec, matches, fresh))
    return out
