"""Tilt families, sample weights, the weighted plug-in measure, and samplers.

Weights always route through log space with max-subtraction so that large tilt
vectors normalize without overflow.  Datasets and measures are immutable after
construction and safe to share across threads; anything random takes an
explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import (
    BoundViolationError,
    DegenerateMeasureError,
    DomainError,
    SlowOracleWarning,
    WeightOverflowError,
)

# log(float64 max) is ~709.78; beyond this exp() is inf
_LOG_FLOAT_MAX = 709.0


@dataclass(frozen=True)
class Dataset:
    """An n x d matrix of sample coordinates, read-only once constructed."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        pts = np.atleast_2d(pts)
        if pts.ndim != 2:
            raise ValueError(f"points must be 2-D, got shape {pts.shape}")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"need n >= 1 and d >= 1, got shape {pts.shape}")
        if not np.isfinite(pts).all():
            raise ValueError("dataset contains non-finite entries")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class TiltFunction:
    """Maps sample points into the space the tilt vector theta lives in.

    Kinds: ``identity`` (g(x) = x), ``linear_map`` (g(x) = B x),
    ``coordinate_mean`` (g(x) = mean of coordinates, 1-D output), and
    ``custom`` (host-supplied evaluator with a declared output dimension).
    """

    kind: str = "identity"
    matrix: np.ndarray | None = None
    evaluator: Callable[[np.ndarray], np.ndarray] | None = None
    out_dim: int | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind == "linear_map":
            if self.matrix is None:
                raise ValueError("linear_map tilt function needs a matrix")
            m = np.array(self.matrix, dtype=float, copy=True)
            if m.ndim != 2:
                raise ValueError("linear_map matrix must be 2-D")
            m.flags.writeable = False
            object.__setattr__(self, "matrix", m)
        elif self.kind == "custom":
            if self.evaluator is None or self.out_dim is None:
                raise ValueError("custom tilt functions must declare evaluator and out_dim")
        elif self.kind not in ("identity", "coordinate_mean"):
            raise ValueError(f"unknown tilt function kind {self.kind!r}")

    def output_dim(self, d: int) -> int:
        if self.kind == "identity":
            return d
        if self.kind == "linear_map":
            return self.matrix.shape[0]
        if self.kind == "coordinate_mean":
            return 1
        return int(self.out_dim)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Evaluate on points of shape (n, d); returns (n, d')."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.kind == "identity":
            return x
        if self.kind == "linear_map":
            return x @ self.matrix.T
        if self.kind == "coordinate_mean":
            return x.mean(axis=1, keepdims=True)
        out = np.atleast_2d(np.asarray(self.evaluator(x), dtype=float))
        if out.shape != (x.shape[0], self.out_dim):
            raise DomainError(
                f"custom tilt function returned shape {out.shape}, "
                f"declared out_dim is {self.out_dim}"
            )
        return out


@dataclass(frozen=True)
class Exponential:
    """w(x) = exp(theta . g(x))."""


@dataclass(frozen=True)
class Escort:
    """w(x) = (a + b * theta . g(x)) ** (1 / (alpha - 1)) with alpha > 0, != 1."""

    alpha: float
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0) or self.alpha == 1.0:
            raise ValueError(f"escort needs alpha > 0 and alpha != 1, got {self.alpha}")


@dataclass(frozen=True)
class QExponential:
    """w(x) = (1 + (1 - q) * c * theta . g(x)) ** (1 / (1 - q)) with q > 0, != 1."""

    q: float
    c: float = 1.0

    def __post_init__(self):
        if not (self.q > 0) or self.q == 1.0:
            raise ValueError(f"q-exponential needs q > 0 and q != 1, got {self.q}")


TiltFamily = Union[Exponential, Escort, QExponential]


@dataclass(frozen=True)
class TiltSpec:
    """A tilt: family, tilt vector theta, tilt function g, optional ||g|| bound."""

    theta: np.ndarray
    g: TiltFunction = field(default_factory=TiltFunction)
    family: TiltFamily = field(default_factory=Exponential)
    g_max: float | None = None

    def __post_init__(self):
        th = np.array(self.theta, dtype=float, copy=True).reshape(-1)
        if th.size < 1 or not np.isfinite(th).all():
            raise ValueError("theta must be a nonempty finite vector")
        th.flags.writeable = False
        object.__setattr__(self, "theta", th)
        if self.g_max is not None and not (self.g_max >= 0):
            raise ValueError("g_max must be nonnegative")

    @property
    def theta_norm(self) -> float:
        return float(np.linalg.norm(self.theta))

    def to_json(self) -> dict:
        """JSON object {family, theta, g: {kind, params}, g_max}."""
        if isinstance(self.family, Exponential):
            fam = {"name": "exponential"}
        elif isinstance(self.family, Escort):
            fam = {"name": "escort", "alpha": self.family.alpha, "a": self.family.a, "b": self.family.b}
        else:
            fam = {"name": "q_exponential", "q": self.family.q, "c": self.family.c}
        if self.g.kind == "custom":
            raise ValueError("custom tilt functions are host-supplied and not serializable")
        params = {}
        if self.g.kind == "linear_map":
            params["matrix"] = self.g.matrix.tolist()
        return {
            "family": fam,
            "theta": self.theta.tolist(),
            "g": {"kind": self.g.kind, "params": params},
            "g_max": self.g_max,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TiltSpec":
        fam_obj = obj.get("family", "exponential")
        if isinstance(fam_obj, str):
            fam_obj = {"name": fam_obj}
        name = fam_obj["name"]
        if name == "exponential":
            family: TiltFamily = Exponential()
        elif name == "escort":
            family = Escort(alpha=fam_obj["alpha"], a=fam_obj.get("a", 1.0), b=fam_obj.get("b", 1.0))
        elif name == "q_exponential":
            family = QExponential(q=fam_obj["q"], c=fam_obj.get("c", 1.0))
        else:
            raise ValueError(f"unknown tilt family {name!r}")
        g_obj = obj.get("g", {"kind": "identity", "params": {}})
        kind = g_obj.get("kind", "identity")
        params = g_obj.get("params", {}) or {}
        if kind == "linear_map":
            g = TiltFunction(kind="linear_map", matrix=np.asarray(params["matrix"], dtype=float))
        else:
            g = TiltFunction(kind=kind)
        return cls(theta=np.asarray(obj["theta"], dtype=float), g=g,
                   family=family, g_max=obj.get("g_max"))


@dataclass(frozen=True)
class WeightedMeasure:
    """Atoms of a dataset plus normalized nonnegative weights (the plug-in measure)."""

    atoms: Dataset
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, copy=True).reshape(-1)
        if w.size != self.atoms.n:
            raise ValueError(f"{w.size} weights for {self.atoms.n} atoms")
        if not np.isfinite(w).all() or (w < 0).any():
            raise ValueError("weights must be finite and nonnegative")
        total = w.sum()
        if abs(total - 1.0) > 1e-12 * max(1.0, abs(total)):
            raise ValueError(f"weights must sum to 1 within 1e-12, got {total!r}")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.atoms.n

    @property
    def d(self) -> int:
        return self.atoms.d


def tilt_exponent(points: np.ndarray, tilt: TiltSpec) -> np.ndarray:
    """theta . g(x) for each row of points; shape (n,)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    gx = tilt.g(pts)
    if gx.shape[1] != tilt.theta.size:
        raise DomainError(
            f"tilt function output dimension {gx.shape[1]} does not match "
            f"theta dimension {tilt.theta.size}"
        )
    if tilt.g_max is not None:
        norms = np.linalg.norm(gx, axis=1)
        bad = norms > tilt.g_max * (1 + 1e-12) + 1e-300
        if bad.any():
            i = int(np.argmax(bad))
            raise DomainError(
                f"||g(x)|| = {norms[i]:.6g} exceeds declared g_max = {tilt.g_max:.6g} "
                f"at atom {i}"
            )
    return gx @ tilt.theta


def _log_weights_permissive(exponents: np.ndarray, family: TiltFamily) -> np.ndarray:
    """Per-atom log weights; zero weights map to -inf instead of raising."""
    s = np.asarray(exponents, dtype=float)
    if isinstance(family, Exponential):
        return s.copy()
    if isinstance(family, Escort):
        base = family.a + family.b * s
        power = 1.0 / (family.alpha - 1.0)
    else:
        base = 1.0 + (1.0 - family.q) * family.c * s
        power = 1.0 / (1.0 - family.q)
    neg = base < 0
    if neg.any():
        i = int(np.argmax(neg))
        raise DomainError(
            f"tilt base {base[i]:.6g} is negative at atom {i}; "
            "this family is undefined for sign-changing bases"
        )
    with np.errstate(divide="ignore"):
        lw = power * np.log(base)
    if np.isposinf(lw).any():
        i = int(np.argmax(np.isposinf(lw)))
        raise DomainError(f"tilt weight diverges (zero base, negative power) at atom {i}")
    return lw


def tilt_weight(x: np.ndarray, tilt: TiltSpec) -> float:
    """Weight of a single point under the tilt; finite and >= 0.

    Exponential: exp(theta . g(x)).  Escort: (a + b theta.g(x))^(1/(alpha-1)).
    QExponential: (1 + (1-q) c theta.g(x))^(1/(1-q)).
    """
    s = tilt_exponent(np.atleast_2d(x), tilt)
    lw = _log_weights_permissive(s, tilt.family)[0]
    if lw > _LOG_FLOAT_MAX:
        raise WeightOverflowError(
            f"log weight {lw:.3g} overflows exp(); use log_weights and the "
            "normalized log-weight path instead"
        )
    return float(np.exp(lw))


def log_weights(dataset: Dataset, tilt: TiltSpec) -> np.ndarray:
    """Log tilt weight per dataset row; exact for the exponential family.

    Raises DomainError if any weight is nonpositive (escort / q-exponential
    bases at zero), since those have no finite log.
    """
    lw = _log_weights_permissive(tilt_exponent(dataset.points, tilt), tilt.family)
    if np.isneginf(lw).any():
        i = int(np.argmax(np.isneginf(lw)))
        raise DomainError(f"nonpositive weight at atom {i} has no log; "
                          "use plugin_measure which tolerates zero weights")
    return lw


def normalized_weights_from_log(lw: np.ndarray) -> np.ndarray:
    """exp(lw - max(lw)) / sum, the overflow-free normalization."""
    lw = np.asarray(lw, dtype=float)
    m = lw.max()
    if np.isneginf(m):
        raise DegenerateMeasureError("all weights are zero; measure undefined")
    w = np.exp(lw - m)
    return w / w.sum()


def plugin_measure(dataset: Dataset, tilt: TiltSpec) -> WeightedMeasure:
    """The self-normalized weighted empirical measure w_i / sum_j w_j.

    Computed via the log-weight path, so it is invariant to rescaling all
    weights by a common positive constant and never overflows.
    """
    lw = _log_weights_permissive(tilt_exponent(dataset.points, tilt), tilt.family)
    return WeightedMeasure(atoms=dataset, weights=normalized_weights_from_log(lw))


def resample(measure: WeightedMeasure, m: int, rng: np.random.Generator) -> Dataset:
    """m draws with replacement, atom i picked with probability weights[i].

    Inverse-CDF search on the cumulative weight vector; deterministic given
    the generator state.
    """
    if m < 1:
        raise ValueError("need m >= 1")
    cum = np.cumsum(measure.weights)
    cum[-1] = 1.0
    idx = np.searchsorted(cum, rng.random(m), side="right")
    return Dataset(measure.atoms.points[idx])


def effective_sample_size(measure: WeightedMeasure) -> float:
    """1 / sum(w_i^2), between 1 (degenerate) and n (uniform)."""
    return float(1.0 / np.sum(measure.weights ** 2))


def rejection_sample_tilted(
    base_sampler: Callable[[int, np.random.Generator], np.ndarray],
    tilt: TiltSpec,
    w_bound: float,
    n: int,
    rng: np.random.Generator,
    *,
    batch_size: int = 8192,
    min_acceptance: float = 1e-4,
    stats: dict | None = None,
) -> Dataset:
    """Exact sampler for the tilted law: accept x with probability w(x)/w_bound.

    ``base_sampler(k, rng)`` must return k i.i.d. base draws as a (k, d) array.
    Requires w_bound >= sup_x w(x); an observed violation raises
    BoundViolationError.  A persistent acceptance rate below ``min_acceptance``
    emits SlowOracleWarning with the measured rate.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if not (w_bound > 0):
        raise ValueError("w_bound must be positive")
    log_bound = np.log(w_bound)
    chunks = []
    accepted = 0
    proposed = 0
    warned = False
    while accepted < n:
        x = np.atleast_2d(np.asarray(base_sampler(batch_size, rng), dtype=float))
        lw = _log_weights_permissive(tilt_exponent(x, tilt), tilt.family)
        if (lw > log_bound + 1e-9).any():
            i = int(np.argmax(lw))
            raise BoundViolationError(
                f"weight exp({lw[i]:.6g}) exceeds w_bound {w_bound:.6g}; "
                "the supplied bound does not dominate the weight function"
            )
        u = rng.random(x.shape[0])
        keep = np.log(u) < lw - log_bound
        hits = np.flatnonzero(keep)
        need = n - accepted
        if hits.size >= need:
            # stop counting at the proposal that completed the request
            proposed += int(hits[need - 1]) + 1
            accepted += need
            chunks.append(x[hits[:need]])
        else:
            proposed += x.shape[0]
            accepted += hits.size
            chunks.append(x[hits])
        if not warned and proposed >= 50 * batch_size and accepted / proposed < min_acceptance:
            warnings.warn(
                f"rejection oracle acceptance rate {accepted / proposed:.3g} is below "
                f"the floor {min_acceptance:.3g} after {proposed} proposals",
                SlowOracleWarning,
            )
            warned = True
    out = np.concatenate(chunks, axis=0)[:n]
    if stats is not None:
        stats["proposals"] = proposed
        stats["accepted"] = accepted
        stats["acceptance_rate"] = accepted / proposed
    return Dataset(out)
