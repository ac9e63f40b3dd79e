"""Fractional Bessel process R_t = ||B_t||, the divergence part Theta, and
its variation / negative-moment / self-similarity experiments.

Theta is evaluated pathwise through the representation

    Theta_t = R_t - H (d - 1) int_0^t s^{2H-1} / R_s ds,

never through an abstract divergence operator.  The drift integrand 1/R_s
is sampled at cell right endpoints (R_0 = 0 makes the left endpoint
undefined; the true integrand behaves like s^{H-1}, which is integrable, so
the first-cell bias vanishes under refinement).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln
from scipy.stats import ks_2samp

from .core import (
    LANE_XI,
    HurstParam,
    MultiPath,
    RealPath,
    SeedSpec,
    UniformGrid,
    as_hurst,
)
from .errors import ConfigError, DomainError, GateError, NumericalError
from .fbm import sample_fbm_multi
from .ito import DEFAULT_XI_DRAWS, DEFAULT_XI_PATHS, _cross_check, _weighted_cumulative, xi_mc_target
from .parallel import replication_map
from .report import CONVERGENCE_COLUMNS, ConvergenceReport, Report, aggregate, build_id
from .variation import _strictly_decreasing, e_H, variation_Vnq

__all__ = [
    "KqConstant",
    "k_q",
    "BesselPaths",
    "bessel_from_multipath",
    "theta_path",
    "require_variation_gate",
    "theta_variation_experiment",
    "negative_moment_experiment",
    "KSOutcome",
    "self_similarity_test",
    "self_similarity_suite",
    "DEFAULT_KS_LEVEL",
]

DEFAULT_KS_LEVEL = 0.01


@dataclass(frozen=True)
class KqConstant:
    """K_q = E||Z||^{-q} for Z ~ N(0, I_d): 2^{-q/2} Gamma((d-q)/2) / Gamma(d/2)."""

    d: int
    q: float
    value: float


def k_q(d: int, q: float) -> KqConstant:
    """Negative moment constant, defined only for 0 < q < d."""
    if not 0 < q < d:
        raise GateError(f"negative moment requires 0 < q < d, got q={q}, d={d}")
    value = float(np.exp(-0.5 * q * np.log(2.0) + gammaln((d - q) / 2) - gammaln(d / 2)))
    return KqConstant(d=d, q=q, value=value)


def bessel_from_multipath(path: MultiPath) -> RealPath:
    """R_t = ||B_t||, the nodewise Euclidean norm of a d >= 2 path."""
    if path.dimension < 2:
        raise DomainError(f"the Bessel process needs d >= 2, got d={path.dimension}")
    return RealPath(path.grid, np.linalg.norm(path.values, axis=1))


def theta_path(path: MultiPath, hurst: HurstParam | float) -> RealPath:
    """Theta_t = R_t - H (d-1) int_0^t s^{2H-1} / R_s ds along one path.

    Requires R_{t_i} > 0 for i >= 1 (an almost-sure event; a zero signals a
    corrupted sampler, not randomness).
    """
    h = as_hurst(hurst).h
    d = path.dimension
    r = bessel_from_multipath(path)
    interior = r.values[1:]
    if np.any(interior == 0.0):
        i = 1 + int(np.flatnonzero(interior == 0.0)[0])
        raise NumericalError(
            f"degenerate Bessel path: R = 0 at node {i} (probability zero; "
            "the sampler is corrupted)"
        )
    inv_r = np.concatenate([[0.0], 1.0 / interior])  # node 0 never used
    drift = h * (d - 1) * _weighted_cumulative(inv_r, path.grid, h)
    values = r.values - drift
    values[0] = 0.0
    return RealPath(path.grid, values)


@dataclass(frozen=True)
class BesselPaths:
    """A d-dim driving path with its radius and zero-mean part bundled.

    Derived triples satisfy r = ||base|| nodewise and r - theta equals the
    nonnegative, nondecreasing drift H (d-1) int s^{2H-1}/R_s ds.
    """

    base: MultiPath
    r: RealPath
    theta: RealPath

    @classmethod
    def derive(cls, base: MultiPath, hurst: HurstParam | float) -> "BesselPaths":
        return cls(base=base, r=bessel_from_multipath(base), theta=theta_path(base, hurst))

    @property
    def drift(self) -> np.ndarray:
        return self.r.values - self.theta.values


def require_variation_gate(d: int, hurst: HurstParam | float) -> None:
    """The Theta variation limit is only claimed under 2 d H^2 > 1."""
    h = as_hurst(hurst).h
    if not 2 * d * h * h > 1:
        raise GateError(
            f"Theta variation requires 2dH^2 > 1; got 2*{d}*{h}^2 = {2 * d * h * h:.4g} <= 1"
        )


def _theta_rep(args: tuple, r: int):
    d, h, horizon, n, master, base, method, xi_draws, xi_paths = args
    grid = UniformGrid(horizon, n)
    seed = SeedSpec(master, base + r)
    path = sample_fbm_multi(h, d, grid, seed, method=method)
    theta = theta_path(path, h)
    p = 1.0 / h
    v = variation_Vnq(theta, p).value
    # ||B_s / R_s|| = 1, so the nu-integral target collapses to e_H * T.
    target_a = e_H(h).value * horizon
    if r < xi_paths:
        bess = np.linalg.norm(path.values[1:], axis=1)
        u = path.values[1:] / bess[:, None]
        target_b, se_b = xi_mc_target(u, grid.dt, p, seed.stream(lane=LANE_XI), xi_draws)
    else:
        target_b, se_b = np.nan, np.nan
    return v, target_a, abs(v - target_a), target_b, se_b


_THETA_COLUMNS = CONVERGENCE_COLUMNS + ("target_mc", "target_mc_se")


def theta_variation_experiment(
    d: int,
    hurst: HurstParam | float,
    horizon: float,
    grid_sizes: list[int],
    replications: int,
    seed: SeedSpec,
    workers: int = 1,
    method: str = "circulant",
    xi_draws: int = DEFAULT_XI_DRAWS,
    xi_paths: int | None = DEFAULT_XI_PATHS,
) -> ConvergenceReport:
    """L^1 convergence of V_n^{1/H}(Theta) to e_H * T under 2dH^2 > 1.

    Because B_s / R_s is a unit vector, <B_s/R_s, xi> is standard normal
    under the xi-measure and the limit collapses to e_H * T in closed form;
    the xi-Monte-Carlo estimate of the same functional rides along as a
    cross-check and must agree within 3 standard errors.
    """
    hp = as_hurst(hurst)
    require_variation_gate(d, hp)
    if d < 2:
        raise GateError(f"the Bessel process needs d >= 2, got d={d}")
    if sorted(grid_sizes) != list(grid_sizes) or len(set(grid_sizes)) != len(grid_sizes):
        raise ConfigError("grid_sizes must be strictly increasing")
    if replications < 2:
        raise ConfigError("need at least 2 replications for standard errors")
    xi_paths = replications if xi_paths is None else min(max(xi_paths, 1), replications)
    rows = []
    for n in grid_sizes:
        args = (
            d, hp.h, horizon, n,
            seed.master_seed, seed.replication_index, method, xi_draws, xi_paths,
        )
        per_rep = replication_map(functools.partial(_theta_rep, args), replications, workers)
        target_mc, target_mc_se = _cross_check(per_rep, n)
        est, _ = aggregate([v for v, *_ in per_rep])
        target = horizon * e_H(hp).value
        abs_err, stderr = aggregate([dev for _, _, dev, *_ in per_rep])
        rows.append(
            (n, est, target, abs_err, abs_err / target, stderr, target_mc, target_mc_se)
        )
    flags = {
        "monotone_decreasing": _strictly_decreasing([r[4] for r in rows]),
        "targets_agree_3se": True,
    }
    meta = {
        "experiment": "theta-variation",
        "dimension": d,
        "hurst": hp.h,
        "horizon": horizon,
        "replications": replications,
        "master_seed": seed.master_seed,
        "xi_draws": xi_draws,
        "xi_paths": xi_paths,
        "build": build_id(),
    }
    return ConvergenceReport(columns=_THETA_COLUMNS, rows=rows, flags=flags, meta=meta)


def _moment_grid(t_list: list[float], max_n: int = 4096) -> UniformGrid:
    """Smallest uniform grid whose nodes contain every requested time."""
    horizon = max(t_list)
    for n in range(1, max_n + 1):
        dt = horizon / n
        if all(abs(t / dt - round(t / dt)) < 1e-9 for t in t_list):
            return UniformGrid(horizon, n)
    raise ConfigError(f"t_list {t_list} does not fit a uniform grid with n <= {max_n}")


def _moment_rep(args: tuple, r: int) -> list[float]:
    d, q, h, horizon, n, indices, master, base, method = args
    grid = UniformGrid(horizon, n)
    path = sample_fbm_multi(h, d, grid, SeedSpec(master, base + r), method=method)
    radii = np.linalg.norm(path.values, axis=1)[list(indices)]
    if np.any(radii == 0.0):
        raise NumericalError("degenerate Bessel path: R = 0 at a requested time")
    return [float(rad ** (-q)) for rad in radii]


def negative_moment_experiment(
    d: int,
    q: float,
    hurst: HurstParam | float,
    t_list: list[float],
    replications: int,
    seed: SeedSpec,
    workers: int = 1,
    method: str = "circulant",
) -> Report:
    """Monte Carlo check of E(R_t^{-q}) = K_q t^{-Hq} for q < d.

    Reports per-t estimates against the closed-form target plus a log-log
    regression whose slope is compared to -Hq and intercept to log K_q.
    """
    hp = as_hurst(hurst)
    constant = k_q(d, q)  # gates 0 < q < d
    if d < 2:
        raise GateError(f"the Bessel process needs d >= 2, got d={d}")
    if len(t_list) < 2:
        raise ConfigError("need at least two times for the scaling regression")
    if sorted(t_list) != list(t_list) or min(t_list) <= 0:
        raise ConfigError("t_list must be positive and increasing")
    if replications < 2:
        raise ConfigError("need at least 2 replications for standard errors")
    grid = _moment_grid(t_list)
    indices = tuple(grid.index_of(t) for t in t_list)
    args = (
        d, q, hp.h, grid.horizon, grid.n, indices,
        seed.master_seed, seed.replication_index, method,
    )
    per_rep = replication_map(functools.partial(_moment_rep, args), replications, workers)
    rows = []
    for k, t in enumerate(t_list):
        est, stderr = aggregate([per_rep[r][k] for r in range(replications)])
        target = constant.value * t ** (-hp.h * q)
        abs_err = abs(est - target)
        rows.append((t, est, target, abs_err, abs_err / target, stderr))
    log_t = np.log(t_list)
    log_est = np.log([row[1] for row in rows])
    design = np.vstack([log_t, np.ones_like(log_t)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, log_est, rcond=None)
    fitted = design @ np.array([slope, intercept])
    ss_res = float(np.sum((log_est - fitted) ** 2))
    ss_tot = float(np.sum((log_est - log_est.mean()) ** 2))
    extra = {
        "slope": float(slope),
        "slope_target": -hp.h * q,
        "intercept": float(intercept),
        "intercept_target": float(np.log(constant.value)),
        "r_squared": 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0,
        "k_q": constant.value,
    }
    meta = {
        "experiment": "negative-moments",
        "dimension": d,
        "q": q,
        "hurst": hp.h,
        "replications": replications,
        "master_seed": seed.master_seed,
        "grid_n": grid.n,
        "build": build_id(),
    }
    return Report(
        columns=("t", "estimate", "target", "abs_err", "rel_err", "stderr"),
        rows=rows,
        extra=extra,
        meta=meta,
    )


def _theta_terminal_rep(args: tuple, r: int) -> float:
    d, h, horizon, n, master, base, method = args
    grid = UniformGrid(horizon, n)
    path = sample_fbm_multi(h, d, grid, SeedSpec(master, base + r), method=method)
    return float(theta_path(path, h).values[-1])


@dataclass(frozen=True)
class KSOutcome:
    """Two-sample Kolmogorov-Smirnov comparison of Theta marginals."""

    a: float
    t: float
    scaling: str  # "a^-H" or the deliberately wrong "a^-2H"
    statistic: float
    p_value: float


def _theta_samples(
    d: int,
    h: float,
    horizon: float,
    grid_size: int,
    replications: int,
    seed: SeedSpec,
    workers: int,
    method: str,
) -> np.ndarray:
    args = (d, h, horizon, grid_size, seed.master_seed, seed.replication_index, method)
    return np.array(
        replication_map(functools.partial(_theta_terminal_rep, args), replications, workers)
    )


def self_similarity_test(
    d: int,
    hurst: HurstParam | float,
    a: float,
    t: float,
    replications: int,
    seed: SeedSpec,
    workers: int = 1,
    grid_size: int = 1024,
    method: str = "circulant",
    wrong_scaling: bool = False,
) -> KSOutcome:
    """KS comparison of a^{-H} Theta_{at} against an independent Theta_t.

    Both Monte Carlo arms use disjoint replication ranges of the same master
    seed.  Self-similarity is tested one marginal at a time: the processes
    are equal in law, and the marginal KS statistic is the falsifiable
    desk-scale projection of that statement.  With ``wrong_scaling`` the
    first arm is rescaled by a^{-2H} instead, which a powerful test must
    reject.
    """
    hp = as_hurst(hurst)
    if d < 2:
        raise GateError(f"the Bessel process needs d >= 2, got d={d}")
    if not a > 0:
        raise DomainError(f"scale factor a must be positive, got {a}")
    if not t > 0:
        raise DomainError(f"time t must be positive, got {t}")
    arm_scaled = _theta_samples(
        d, hp.h, a * t, grid_size, replications, seed, workers, method
    )
    arm_plain = _theta_samples(
        d, hp.h, t, grid_size, replications, seed.replicate(replications), workers, method
    )
    exponent = -2 * hp.h if wrong_scaling else -hp.h
    stat, p_value = ks_2samp(arm_scaled * a**exponent, arm_plain)
    return KSOutcome(
        a=a,
        t=t,
        scaling="a^-2H" if wrong_scaling else "a^-H",
        statistic=float(stat),
        p_value=float(p_value),
    )


def self_similarity_suite(
    d: int,
    hurst: HurstParam | float,
    pairs: list[tuple[float, float]],
    replications: int,
    seed: SeedSpec,
    workers: int = 1,
    grid_size: int = 1024,
    method: str = "circulant",
    level: float = DEFAULT_KS_LEVEL,
    control_a: float | None = 4.0,
) -> Report:
    """Run KS self-similarity tests over (a, t) pairs with a power control.

    The pass threshold is Bonferroni-corrected across the proper pairs
    (p > level / #pairs each).  The control row repeats the largest-|a| test
    with the wrong exponent a^{-2H} and must be *rejected* at the same
    corrected threshold, demonstrating the test has power at this sample
    size.
    """
    hp = as_hurst(hurst)
    if not pairs:
        raise ConfigError("need at least one (a, t) pair")
    threshold = level / len(pairs)
    rows = []
    ok = True
    offset = 0
    for a, t in pairs:
        outcome = self_similarity_test(
            d, hp, a, t, replications, seed.replicate(offset), workers, grid_size, method
        )
        offset += 2 * replications
        passed = outcome.p_value > threshold
        ok = ok and passed
        rows.append(
            (a, t, outcome.scaling, replications, outcome.statistic, outcome.p_value,
             threshold, passed)
        )
    flags = {"marginals_match": ok}
    if control_a is not None:
        matching = [t for a, t in pairs if a == control_a]
        t_control = matching[0] if matching else pairs[-1][1]
        control = self_similarity_test(
            d, hp, control_a, t_control, replications, seed.replicate(offset), workers,
            grid_size, method, wrong_scaling=True,
        )
        detected = control.p_value < threshold
        rows.append(
            (control_a, t_control, control.scaling, replications, control.statistic,
             control.p_value, threshold, detected)
        )
        flags["control_rejected"] = detected
    meta = {
        "experiment": "self-similarity",
        "dimension": d,
        "hurst": hp.h,
        "replications": replications,
        "master_seed": seed.master_seed,
        "grid_size": grid_size,
        "level": level,
        "build": build_id(),
    }
    return Report(
        columns=("a", "t", "scaling", "m", "ks_stat", "p_value", "threshold", "ok"),
        rows=rows,
        flags=flags,
        meta=meta,
    )
