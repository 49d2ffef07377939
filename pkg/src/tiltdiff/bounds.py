"""Tilted-mass functionals and the sampling-error bounds built from them.

Everything here is a closed-form evaluation: weight MGFs M(k theta), the
weight-spread and weight-ratio constants they induce, expected-transport upper
bounds for plain and tilted empirical sampling, the per-set discrepancy bound,
and the asymptotic variance of the plug-in mass of a set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import logsumexp

from .errors import MissingBoundError, RegimeError, WeightOverflowError
from .tilting import Dataset, Exponential, TiltSpec, tilt_exponent
from .transport import Box

_LOG_FLOAT_MAX = 709.0


@dataclass(frozen=True)
class FiniteMeasure:
    """A k x d atom matrix with masses summing to 1; exact-evaluation oracle."""

    atoms: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        at = np.atleast_2d(np.array(self.atoms, dtype=float, copy=True))
        ms = np.array(self.masses, dtype=float, copy=True).reshape(-1)
        if at.shape[0] != ms.size:
            raise ValueError("one mass per atom required")
        if (ms < 0).any() or abs(ms.sum() - 1.0) > 1e-9:
            raise ValueError("masses must be nonnegative and sum to 1")
        at.flags.writeable = False
        ms.flags.writeable = False
        object.__setattr__(self, "atoms", at)
        object.__setattr__(self, "masses", ms)

    @property
    def d(self) -> int:
        return self.atoms.shape[1]


Source = Union[FiniteMeasure, Dataset]


@dataclass(frozen=True)
class EstimationMode:
    """How tilt quantities were computed: exact sums or a Monte Carlo sample."""

    kind: str
    n: int | None = None
    seed: int | None = None

    @classmethod
    def exact(cls) -> "EstimationMode":
        return cls(kind="exact_discrete")

    @classmethod
    def monte_carlo(cls, n: int, seed: int | None = None) -> "EstimationMode":
        return cls(kind="monte_carlo", n=n, seed=seed)


def _source_parts(source: Source) -> tuple[np.ndarray, np.ndarray, EstimationMode]:
    if isinstance(source, FiniteMeasure):
        return source.atoms, np.log(source.masses, where=source.masses > 0,
                                    out=np.full(source.masses.shape, -np.inf)), EstimationMode.exact()
    if isinstance(source, Dataset):
        n = source.n
        return source.points, np.full(n, -np.log(n)), EstimationMode.monte_carlo(n)
    raise TypeError(f"expected FiniteMeasure or Dataset, got {type(source)!r}")


def log_mgf(source: Source, tilt: TiltSpec, scale: float = 1.0,
            box: Box | None = None) -> float:
    """log E[exp(scale * theta . g(x)) 1{x in box}], exact or sample mean.

    Overflow-free log-domain evaluation; returns -inf for an empty box.
    """
    atoms, log_mass, _ = _source_parts(source)
    s = tilt_exponent(atoms, tilt)
    terms = scale * s + log_mass
    if box is not None:
        inside = box.contains(atoms)
        if not inside.any():
            return float("-inf")
        terms = terms[inside]
    return float(logsumexp(terms))


def mgf(source: Source, tilt: TiltSpec, scale: float = 1.0,
        box: Box | None = None) -> float:
    """E[exp(scale * theta . g(x)) 1{x in box}]; raises on float64 overflow."""
    lm = log_mgf(source, tilt, scale, box)
    if lm > _LOG_FLOAT_MAX:
        raise WeightOverflowError(
            f"mgf log value {lm:.3g} overflows float64; use log_mgf instead")
    return float(np.exp(lm))


def moment_q_tilted(source: Source, tilt: TiltSpec, q: float,
                    theta_scale: float = 1.0) -> float:
    """q-th absolute moment E ||x||^q under the tilt rescaled by theta_scale.

    Self-normalized: sum w_i ||x_i||^q / sum w_i with w at scale * theta, which
    is the exact tilted moment for a FiniteMeasure source.
    """
    if not q > 0:
        raise ValueError("need q > 0")
    atoms, log_mass, _ = _source_parts(source)
    s = tilt_exponent(atoms, tilt)
    lw = theta_scale * s + log_mass
    lw = lw - lw.max()
    w = np.exp(lw)
    norms = np.linalg.norm(atoms, axis=1)
    return float(np.sum(w * norms ** q) / w.sum())


@dataclass(frozen=True)
class TiltQuantities:
    """The scalar functionals of a tilt that the transport bounds consume.

    weight_spread = M(-2 theta) M(2 theta) >= 1 controls how hard the weight
    normalizer is to estimate; weight_l2_ratio = sqrt(M(2 theta)) / M(theta)
    >= 1 is the L2/L1 norm ratio of the weights; bounded_tilt_factor =
    exp(||theta|| g_max) M(2 theta) / M(theta) needs a bound on ||g||.
    """

    mass_theta: float
    mass_2theta: float
    mass_minus_2theta: float
    weight_spread: float
    weight_l2_ratio: float
    bounded_tilt_factor: float | None
    g_max: float | None
    estimation_mode: EstimationMode


def weight_lk_ratio(source: Source, tilt: TiltSpec, k: float) -> float:
    """M(k theta)^(1/k) / M((k/2) theta)^(2/k), the order-k weight ratio."""
    lk = log_mgf(source, tilt, scale=k)
    lk2 = log_mgf(source, tilt, scale=k / 2.0)
    return float(np.exp(lk / k - 2.0 * lk2 / k))


def tilt_quantities(source: Source, tilt: TiltSpec) -> TiltQuantities:
    """All bound constants for an exponential tilt, in one overflow-free pass."""
    if not isinstance(tilt.family, Exponential):
        raise ValueError("tilt quantities are defined for the exponential family only")
    _, _, mode = _source_parts(source)
    l1 = log_mgf(source, tilt, 1.0)
    l2 = log_mgf(source, tilt, 2.0)
    lm2 = log_mgf(source, tilt, -2.0)
    theta_norm = tilt.theta_norm
    if tilt.g_max is not None:
        btf = float(np.exp(theta_norm * tilt.g_max + l2 - l1))
    elif theta_norm == 0.0:
        btf = float(np.exp(l2 - l1))
    else:
        btf = None
    return TiltQuantities(
        mass_theta=float(np.exp(l1)),
        mass_2theta=float(np.exp(l2)),
        mass_minus_2theta=float(np.exp(lm2)),
        weight_spread=float(np.exp(lm2 + l2)),
        weight_l2_ratio=float(np.exp(0.5 * l2 - l1)),
        bounded_tilt_factor=btf,
        g_max=tilt.g_max,
        estimation_mode=mode,
    )


def _check_regime(p: float, q: float, d: int, *, need_p_below_half_d: bool = False):
    if not q > p:
        raise RegimeError(f"requires q > p, got q = {q}, p = {p}")
    if not d > q * p / (q - p):
        raise RegimeError(f"requires d > qp/(q-p) = {q * p / (q - p):.6g}, got d = {d}")
    if need_p_below_half_d and not p < d / 2:
        raise RegimeError(f"requires p < d/2 = {d / 2:.6g}, got p = {p}")


def bound_iid(n_samples: int, p: float, q: float, d: int, moment_q: float,
              constant: float = 1.0) -> float:
    """Expected-transport bound for plain i.i.d. empirical sampling.

    constant * moment_q^(p/q) * (N^(-p/d) + N^(-1/2)), valid for q > p,
    d > qp/(q-p) and p < d/2.  The leading constant is unspecified by the
    theory; results are up to that constant.
    """
    _check_regime(p, q, d, need_p_below_half_d=True)
    n = float(n_samples)
    return float(constant * moment_q ** (p / q) * (n ** (-p / d) + n ** (-0.5)))


def bound_tilted_unbounded(n_samples: int, p: float, q: float, d: int,
                           quantities: TiltQuantities, moment_q_2theta: float,
                           constant: float = 1.0) -> float:
    """Expected-transport bound for the tilted plug-in measure, no ||g|| bound.

    constant * M_q(mu_{2 theta})^(p/q) * weight_spread
    * (N^(-p/d) + weight_l2_ratio * N^(-1/2)).
    """
    _check_regime(p, q, d)
    n = float(n_samples)
    return float(
        constant
        * moment_q_2theta ** (p / q)
        * quantities.weight_spread
        * (n ** (-p / d) + quantities.weight_l2_ratio * n ** (-0.5))
    )


def bound_tilted_bounded(n_samples: int, p: float, q: float, d: int,
                         quantities: TiltQuantities, moment_q_theta: float,
                         constant: float = 1.0) -> float:
    """Expected-transport bound for the tilted plug-in measure when ||g|| <= g_max.

    constant * M_q(mu_theta)^(p/q)
    * (bounded_tilt_factor * N^(-p/d) + N^(-1/2)).
    """
    _check_regime(p, q, d)
    if quantities.bounded_tilt_factor is None:
        raise MissingBoundError("bounded_tilt_factor needs g_max; none was provided")
    n = float(n_samples)
    return float(
        constant
        * moment_q_theta ** (p / q)
        * (quantities.bounded_tilt_factor * n ** (-p / d) + n ** (-0.5))
    )


def set_discrepancy_bound(n_samples: int, quantities: TiltQuantities,
                          mass_2theta_set: float, mass_theta_set: float) -> float:
    """Upper bound on E |mu_theta(A) - mu_{n,theta}(A)| for one set A.

    (1/sqrt(n)) * sqrt(weight_spread) * (sqrt(mu_{2 theta}(A)) + mu_theta(A)).
    """
    for m in (mass_2theta_set, mass_theta_set):
        if not 0.0 <= m <= 1.0 + 1e-12:
            raise ValueError(f"set masses must lie in [0, 1], got {m!r}")
    return float(
        np.sqrt(quantities.weight_spread)
        * (np.sqrt(mass_2theta_set) + mass_theta_set)
        / np.sqrt(n_samples)
    )


def plugin_clt_variance(measure: FiniteMeasure, tilt: TiltSpec, box: Box) -> float:
    """Asymptotic variance of sqrt(n) (mu_{n,theta}(A) - mu_theta(A)).

    Delta-method variance of the ratio of the two weight averages
    (U, V) = (w 1_A, w):

        Var(U)/M^2 - 2 (M_A / M^3) Cov(U, V) + (M_A^2 / M^4) Var(V)

    with M = M(theta), M_A = M(theta, A), Var(U) = M(2 theta, A) - M_A^2,
    Var(V) = M(2 theta) - M^2, Cov(U, V) = M(2 theta, A) - M M_A.
    """
    m1 = mgf(measure, tilt, 1.0)
    m2 = mgf(measure, tilt, 2.0)
    m1a = np.exp(log_mgf(measure, tilt, 1.0, box))
    m2a = np.exp(log_mgf(measure, tilt, 2.0, box))
    var_u = m2a - m1a ** 2
    var_v = m2 - m1 ** 2
    cov_uv = m2a - m1 * m1a
    value = var_u / m1 ** 2 - 2.0 * (m1a / m1 ** 3) * cov_uv + (m1a ** 2 / m1 ** 4) * var_v
    return float(max(value, 0.0))
