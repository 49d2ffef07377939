"""Synthetic score-error fields and the mean-squared-gap bounds they obey.

A field f_t(x) stands in for the error of a score estimate along the forward
noising process.  ``discounted_lipschitz_integral`` is the constant
(1/T) int_0^T L_t^2 exp(-2 eta t) dt; ``field_gap`` estimates the expected
absolute gap between E||f_t(x_t)||^2 under two start laws; ``field_gap_bound``
evaluates the transport-based upper bounds on that gap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy import integrate

from .errors import MissingBoundError, RegimeError
from .diffusion import NoiseSchedule
from .tilting import Dataset


@dataclass(frozen=True)
class ErrorFieldSpec:
    """Closed-form error field with a declared per-time Lipschitz constant.

    Supported kinds: ``linear`` f_t(x) = c_t x, ``affine`` f_t(x) = c_t x + b,
    ``clipped`` f_t(x) = clip(c_t x, -clip_at, clip_at) componentwise.  The
    slope c_t is a constant or a callable of t; L_t = |c_t| in every case.
    The declared constant is spot-checked against random secant slopes at
    construction.
    """

    kind: str = "linear"
    slope: Union[float, Callable[[float], float]] = 1.0
    offset: float = 0.0
    clip_at: float | None = None

    def __post_init__(self):
        if self.kind not in ("linear", "affine", "clipped"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.kind == "clipped" and not (self.clip_at is not None and self.clip_at > 0):
            raise ValueError("clipped fields need a positive clip_at")
        self._spot_check()

    def slope_at(self, t: float) -> float:
        return float(self.slope(t)) if callable(self.slope) else float(self.slope)

    def lipschitz(self, t: float) -> float:
        return abs(self.slope_at(t))

    def __call__(self, x: np.ndarray, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        c = self.slope_at(t)
        if self.kind == "linear":
            return c * x
        if self.kind == "affine":
            return c * x + self.offset
        return np.clip(c * x, -self.clip_at, self.clip_at)

    def _spot_check(self, n_pairs: int = 32, n_times: int = 5):
        rng = np.random.default_rng(1234)
        for t in rng.uniform(0.0, 1.0, n_times):
            lip = self.lipschitz(t)
            a = rng.uniform(-3, 3, (n_pairs, 2))
            b = rng.uniform(-3, 3, (n_pairs, 2))
            num = np.abs(self(a, t) - self(b, t)).max(axis=1)
            den = np.abs(a - b).max(axis=1)
            ok = den > 0
            if (num[ok] > lip * den[ok] + 1e-9).any():
                raise ValueError("declared Lipschitz constant fails a secant spot check")


def discounted_lipschitz_integral(field: ErrorFieldSpec, schedule: NoiseSchedule) -> float:
    """(1/T) int_0^T L_t^2 exp(-2 eta t) dt; closed form for constant slopes."""
    eta, horizon = schedule.eta, schedule.horizon
    if not callable(field.slope):
        lip = abs(float(field.slope))
        return float(lip ** 2 * (1.0 - np.exp(-2.0 * eta * horizon)) / (2.0 * eta * horizon))
    value, err = integrate.quad(
        lambda t: field.lipschitz(t) ** 2 * np.exp(-2.0 * eta * t), 0.0, horizon,
        limit=200)
    if not np.isfinite(value) or err > max(1e-8, 1e-6 * abs(value)):
        raise RegimeError("discounted Lipschitz integral did not converge")
    return float(value / horizon)


@dataclass(frozen=True)
class GapEstimate:
    """Monte Carlo estimate of a time-averaged quantity.

    ``stderr`` is the across-time standard error; ``noise_allowance`` bounds
    the upward bias that taking |.| of noisy inner means can introduce
    (mean inner standard error times sqrt(2/pi)); zero for plain averages.
    """

    value: float
    stderr: float
    n_time: int
    noise_allowance: float = 0.0


def _replicate(points: np.ndarray, at_least: int) -> np.ndarray:
    reps = max(1, int(np.ceil(at_least / points.shape[0])))
    return np.tile(points, (reps, 1))


def _noised(points: np.ndarray, t: float, schedule: NoiseSchedule,
            rng: np.random.Generator) -> np.ndarray:
    mc = float(schedule.mean_coeff(t))
    sd = float(np.sqrt(schedule.noise_var(t)))
    return mc * points + sd * rng.standard_normal(points.shape)


def field_gap_estimate(field: ErrorFieldSpec, mu_samples: Dataset, nu_samples: Dataset,
                       schedule: NoiseSchedule, n_mc: int,
                       rng: np.random.Generator, inner: int = 1024) -> GapEstimate:
    """E_t |E_mu ||f_t(x_t)||^2 - E_nu ||f_t(y_t)||^2| by common t draws.

    For each uniform t the two inner expectations are estimated separately
    (fresh forward noise per point, supports replicated to at least ``inner``
    rows) and the absolute value is applied to the difference of the two
    means, matching the definition.  The inner noise can only bias |.| upward;
    the returned noise_allowance bounds that bias.
    """
    if mu_samples.d != nu_samples.d:
        raise ValueError("sample sets must share a dimension")
    xp = _replicate(mu_samples.points, inner)
    yp = _replicate(nu_samples.points, inner)
    ts = rng.uniform(0.0, schedule.horizon, size=n_mc)
    gaps = np.empty(n_mc)
    inner_se = np.empty(n_mc)
    for i, t in enumerate(ts):
        fx = field(_noised(xp, float(t), schedule, rng), float(t))
        fy = field(_noised(yp, float(t), schedule, rng), float(t))
        sx = np.sum(fx * fx, axis=1)
        sy = np.sum(fy * fy, axis=1)
        gaps[i] = abs(sx.mean() - sy.mean())
        inner_se[i] = np.sqrt(sx.var(ddof=1) / sx.size + sy.var(ddof=1) / sy.size)
    return GapEstimate(
        value=float(gaps.mean()),
        stderr=float(gaps.std(ddof=1) / np.sqrt(n_mc)) if n_mc > 1 else 0.0,
        n_time=n_mc,
        noise_allowance=float(inner_se.mean() * np.sqrt(2.0 / np.pi)),
    )


def field_gap(field: ErrorFieldSpec, mu_samples: Dataset, nu_samples: Dataset,
              schedule: NoiseSchedule, n_mc: int, rng: np.random.Generator) -> float:
    return field_gap_estimate(field, mu_samples, nu_samples, schedule, n_mc, rng).value


def field_loss_estimate(field: ErrorFieldSpec, nu_samples: Dataset,
                        schedule: NoiseSchedule, n_mc: int,
                        rng: np.random.Generator, inner: int = 1024) -> GapEstimate:
    """Time-averaged E||f_t(y_t)||^2 under one start law, same harness as the gap."""
    yp = _replicate(nu_samples.points, inner)
    ts = rng.uniform(0.0, schedule.horizon, size=n_mc)
    vals = np.empty(n_mc)
    for i, t in enumerate(ts):
        fy = field(_noised(yp, float(t), schedule, rng), float(t))
        vals[i] = np.mean(np.sum(fy * fy, axis=1))
    return GapEstimate(value=float(vals.mean()),
                       stderr=float(vals.std(ddof=1) / np.sqrt(n_mc)) if n_mc > 1 else 0.0,
                       n_time=n_mc)


GAP_BOUND_VARIANTS = ("w2", "w2_bounded", "w1_bounded")


def field_gap_bound(variant: str, wasserstein: float, c_integral: float,
                    eps: float, support_radius: float | None = None) -> float:
    """Upper bound on the field gap from transport distance between start laws.

    ``w2``:          C W2^2 + 2 sqrt(C) W2 eps
    ``w2_bounded``:  (2 C M + 2 sqrt(C) eps) W2          (supports in ||x|| <= M)
    ``w1_bounded``:  K W1 + 2 sqrt(K eps) sqrt(W1), K = 2 M C

    C is the discounted Lipschitz integral and eps^2 dominates the field loss
    under the second law.
    """
    if variant not in GAP_BOUND_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; pick from {GAP_BOUND_VARIANTS}")
    if eps < 0 or wasserstein < 0 or c_integral < 0:
        raise ValueError("wasserstein, c_integral and eps must be nonnegative")
    w = wasserstein
    c = c_integral
    if variant == "w2":
        return float(c * w ** 2 + 2.0 * np.sqrt(c) * w * eps)
    if support_radius is None:
        raise MissingBoundError("bounded variants need support_radius")
    m = support_radius
    if variant == "w2_bounded":
        return float((2.0 * c * m + 2.0 * np.sqrt(c) * eps) * w)
    k = 2.0 * m * c
    return float(k * w + 2.0 * np.sqrt(k * eps) * np.sqrt(w))


# ---------------------------------------------------------------------------
# randomized inequality battery
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BatteryRow:
    """One (instance, variant) check of the gap against its bound."""

    instance: int
    label: str
    dim: int
    variant: str
    gap: float
    gap_stderr: float
    eps_sq: float
    wasserstein: float
    bound: float
    margin: float
    holds: bool


def _atom_dataset(atoms: np.ndarray, counts: np.ndarray) -> Dataset:
    """Replicate atoms by integer counts so expectations over rows are exact."""
    rows = np.repeat(atoms, counts, axis=0)
    return Dataset(rows)


def _random_support(rng: np.random.Generator, d: int, n_rows: int = 8) -> Dataset:
    k = int(rng.integers(1, 5))
    atoms = rng.uniform(-1.0, 1.0, (k, d))
    counts = np.full(k, n_rows // k)
    counts[: n_rows - counts.sum()] += 1
    return _atom_dataset(atoms, counts)


def _random_field(rng: np.random.Generator) -> tuple[ErrorFieldSpec, str]:
    kind = rng.choice(["linear", "affine", "clipped"])
    c0 = float(rng.uniform(0.25, 2.0))
    if rng.random() < 0.2:
        rate = float(rng.uniform(0.2, 1.0))
        slope = lambda t, c0=c0, rate=rate: c0 * np.exp(-rate * t)
        label = f"{kind}(c={c0:.2f}*exp(-{rate:.2f}t))"
    else:
        slope = c0
        label = f"{kind}(c={c0:.2f})"
    if kind == "clipped":
        return ErrorFieldSpec(kind="clipped", slope=slope,
                              clip_at=float(rng.uniform(0.5, 2.0))), label
    if kind == "affine":
        return ErrorFieldSpec(kind="affine", slope=slope,
                              offset=float(rng.uniform(-1.0, 1.0))), label
    return ErrorFieldSpec(kind="linear", slope=slope), label


def _bound_eps_slack(variant: str, wasserstein: float, c_integral: float,
                     eps: float, support_radius: float, eps_stderr: float) -> float:
    """3-sigma slack of the bound coming from the Monte Carlo error in eps."""
    if eps_stderr == 0.0:
        return 0.0
    if variant in ("w2", "w2_bounded"):
        sens = 2.0 * np.sqrt(c_integral) * wasserstein
    else:
        k = 2.0 * support_radius * c_integral
        sens = np.sqrt(k / eps) * np.sqrt(wasserstein) if eps > 0 else 0.0
    return float(3.0 * sens * eps_stderr)


def inequality_battery(n_instances: int, schedule: NoiseSchedule,
                       rng: np.random.Generator, n_mc: int = 400,
                       include_analytic: bool = True) -> list:
    """Randomized point-mass / small-mixture instances checked against all bounds.

    Transport distances between the instance supports are computed exactly, so
    a violation beyond the 3-sigma Monte Carlo margin indicates a genuine bug
    in the gap or bound evaluators.
    """
    from .transport import exact_wp_small

    rows: list[BatteryRow] = []
    instances = []
    if include_analytic:
        field = ErrorFieldSpec(kind="linear", slope=1.0)
        mu = Dataset(np.ones((8, 1)))
        nu = Dataset(np.zeros((8, 1)))
        instances.append((field, "linear(analytic delta1 vs delta0)", mu, nu))
    while len(instances) < n_instances:
        d = int(rng.integers(1, 3))
        field, label = _random_field(rng)
        instances.append((field, label, _random_support(rng, d), _random_support(rng, d)))

    for idx, (field, label, mu, nu) in enumerate(instances):
        c_int = discounted_lipschitz_integral(field, schedule)
        gap = field_gap_estimate(field, mu, nu, schedule, n_mc, rng)
        loss_nu = field_loss_estimate(field, nu, schedule, n_mc, rng)
        eps_sq = loss_nu.value
        eps = float(np.sqrt(max(eps_sq, 0.0)))
        eps_stderr = loss_nu.stderr / (2.0 * eps) if eps > 0 else 0.0
        radius = float(max(np.linalg.norm(mu.points, axis=1).max(),
                           np.linalg.norm(nu.points, axis=1).max()))
        radius = max(radius, 1e-12)
        w2 = exact_wp_small(mu, nu, 2.0)
        w1 = exact_wp_small(mu, nu, 1.0)
        for variant in GAP_BOUND_VARIANTS:
            w = w2 if variant.startswith("w2") else w1
            bound = field_gap_bound(variant, w, c_int, eps, support_radius=radius)
            margin = (3.0 * gap.stderr + gap.noise_allowance
                      + _bound_eps_slack(variant, w, c_int, eps, radius, eps_stderr))
            rows.append(BatteryRow(
                instance=idx, label=label, dim=mu.d, variant=variant,
                gap=gap.value, gap_stderr=gap.stderr, eps_sq=eps_sq,
                wasserstein=w, bound=bound, margin=margin,
                holds=bool(gap.value <= bound + margin),
            ))
    return rows
