"""Ornstein-Uhlenbeck forward noising, a from-scratch noise-prediction network
trained by manual backprop on tilt-resampled data, and the reverse sampler.

The forward process is dx = -eta x dt + sqrt(2) sigma db, whose marginal at
time t is mean_coeff(t) x0 + sqrt(noise_var(t)) * standard normal with
mean_coeff(t) = exp(-eta t) and noise_var(t) = (sigma^2/eta)(1 - exp(-2 eta t)).
The reverse pass integrates dx = (eta x + 2 sigma^2 score) dt + sqrt(2) sigma db
backwards on a uniform grid with a noiseless final step.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from typing import Callable, Sequence, Union

import numpy as np

from .errors import (
    NumericsError,
    OracleUnavailableError,
    SingularTimeError,
    TrainingDivergedError,
)
from .tilting import Dataset, TiltSpec, plugin_measure, resample


@dataclass(frozen=True)
class NoiseSchedule:
    """OU drift eta, noise scale sigma, horizon, and the reverse-pass grid size."""

    eta: float = 1.0
    sigma: float = 1.0
    horizon: float = 1.0
    steps: int = 200

    def __post_init__(self):
        if not (self.eta > 0 and self.sigma > 0 and self.horizon > 0):
            raise ValueError("eta, sigma and horizon must be positive")
        if self.steps < 2:
            raise ValueError("need steps >= 2")

    def mean_coeff(self, t):
        return np.exp(-self.eta * np.asarray(t, dtype=float))

    def noise_var(self, t):
        return (self.sigma ** 2 / self.eta) * (1.0 - np.exp(-2.0 * self.eta * np.asarray(t, dtype=float)))

    @property
    def stationary_var(self) -> float:
        return self.sigma ** 2 / self.eta

    def to_json(self) -> dict:
        return {"eta": self.eta, "sigma": self.sigma,
                "horizon": self.horizon, "steps": self.steps}

    @classmethod
    def from_json(cls, obj: dict) -> "NoiseSchedule":
        return cls(eta=obj["eta"], sigma=obj["sigma"],
                   horizon=obj["horizon"], steps=obj["steps"])


def forward_noise(x0: np.ndarray, t, schedule: NoiseSchedule,
                  rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Noise x0 to time t: returns (x_t, eps) with x_t = m(t) x0 + sqrt(v(t)) eps.

    x0 may be a single d-vector or an (n, d) batch; t a scalar or (n,) vector.
    """
    x0 = np.asarray(x0, dtype=float)
    single = x0.ndim == 1
    x0 = np.atleast_2d(x0)
    t = np.asarray(t, dtype=float)
    if (t < 0).any() or (t > schedule.horizon + 1e-12).any():
        raise ValueError("t must lie in [0, horizon]")
    tcol = np.broadcast_to(t.reshape(-1, 1) if t.ndim else t, (x0.shape[0], 1))
    eps = rng.standard_normal(x0.shape)
    x_t = schedule.mean_coeff(tcol) * x0 + np.sqrt(schedule.noise_var(tcol)) * eps
    if single:
        return x_t[0], eps[0]
    return x_t, eps


# ---------------------------------------------------------------------------
# denoiser network
# ---------------------------------------------------------------------------

def _tanh(z):
    return np.tanh(z)


def _dtanh_from_act(a):
    return 1.0 - a * a


def _softplus(z):
    return np.logaddexp(0.0, z)


def _dsoftplus_from_act(a):
    # derivative sigmoid(z) expressed through a = softplus(z)
    return -np.expm1(-a)


_ACTIVATIONS = {
    "tanh": (_tanh, _dtanh_from_act),
    "softplus": (_softplus, _dsoftplus_from_act),
}


@dataclass
class DenoiserModel:
    """Feed-forward noise predictor on [x, time features], trained by hand.

    weights[l] has shape (out_l, in_l); the last layer is linear, hidden layers
    use a smooth activation so finite-difference gradient checks are clean.
    Time enters through fixed Fourier features sin/cos(freq * u(t)) where u is
    either raw time or log time; the log warp resolves the small-t region
    where the implied score steepens.
    """

    weights: list
    biases: list
    freqs: np.ndarray
    activation: str = "tanh"
    time_warp: str = "log"
    t_floor: float = 1e-6
    out_scale_eta: float | None = None
    out_scale_horizon: float | None = None

    @property
    def d(self) -> int:
        return self.weights[-1].shape[0]

    @property
    def layer_dims(self) -> list:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    def time_features(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float)).reshape(-1, 1)
        u = np.log(np.maximum(t, self.t_floor)) if self.time_warp == "log" else t
        ang = u * self.freqs[None, :]
        return np.concatenate([np.sin(ang), np.cos(ang)], axis=1)

    def output_scale(self, t) -> np.ndarray:
        """sqrt(noise_var(t) / noise_var(horizon)) when enabled, else 1.

        Scaling the prediction this way pins the small-t decay of the target,
        so the implied score -pred/sqrt(noise_var) stays bounded as t -> 0.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float)).reshape(-1, 1)
        if self.out_scale_eta is None:
            return np.ones_like(t)
        num = -np.expm1(-2.0 * self.out_scale_eta * t)
        den = -np.expm1(-2.0 * self.out_scale_eta * self.out_scale_horizon)
        return np.sqrt(num / den)


def init_denoiser(d: int, schedule: NoiseSchedule, rng: np.random.Generator,
                  hidden: Sequence[int] = (128, 128), n_freq: int = 8,
                  activation: str = "tanh", time_warp: str = "log",
                  t_min_frac: float = 1e-3,
                  output_time_scaling: bool = True) -> DenoiserModel:
    """Xavier-initialized hidden layers, zero final layer, geometric time freqs."""
    if activation not in _ACTIVATIONS:
        raise ValueError(f"unknown activation {activation!r}")
    if time_warp == "log":
        # periods span the log-time range [t_min, horizon]
        span = np.log(1.0 / t_min_frac)
        freqs = 2.0 * np.pi * (2.0 ** np.arange(n_freq)) / span
    elif time_warp == "linear":
        freqs = 2.0 * np.pi * (2.0 ** np.arange(n_freq)) / schedule.horizon
    else:
        raise ValueError(f"unknown time_warp {time_warp!r}")
    dims = [d + 2 * n_freq, *hidden, d]
    weights, biases = [], []
    for i in range(len(dims) - 1):
        fan_in, fan_out = dims[i], dims[i + 1]
        if i == len(dims) - 2:
            w = np.zeros((fan_out, fan_in))
        else:
            lim = np.sqrt(6.0 / (fan_in + fan_out))
            w = rng.uniform(-lim, lim, size=(fan_out, fan_in))
        weights.append(w)
        biases.append(np.zeros(fan_out))
    return DenoiserModel(weights=weights, biases=biases, freqs=freqs,
                         activation=activation, time_warp=time_warp,
                         t_floor=t_min_frac * schedule.horizon * 1e-3,
                         out_scale_eta=schedule.eta if output_time_scaling else None,
                         out_scale_horizon=schedule.horizon if output_time_scaling else None)


def _forward_cached(model: DenoiserModel, x: np.ndarray, t: np.ndarray) -> tuple[list, np.ndarray]:
    act_fn, _ = _ACTIVATIONS[model.activation]
    z = np.concatenate([x, model.time_features(t)], axis=1)
    scale = model.output_scale(t)
    acts = [z]
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        pre = acts[-1] @ w.T + b
        a = pre * scale if i == last else act_fn(pre)
        if not np.isfinite(a).all():
            raise NumericsError(f"non-finite activation at layer {i}", index=i)
        acts.append(a)
    return acts, scale


def denoiser_forward(model: DenoiserModel, x: np.ndarray, t) -> np.ndarray:
    """Deterministic forward pass; accepts a single (d,) point or an (n, d) batch."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xb = np.atleast_2d(x)
    tb = np.broadcast_to(np.asarray(t, dtype=float), (xb.shape[0],))
    out = _forward_cached(model, xb, tb)[0][-1]
    return out[0] if single else out


def denoiser_loss_and_grad(model: DenoiserModel, x_t: np.ndarray, t: np.ndarray,
                           eps: np.ndarray,
                           sample_weights: np.ndarray | None = None) -> tuple[float, list]:
    """Mean squared noise-prediction error over the batch and its exact gradient.

    Loss is mean_b w_b ||eps_b - model(x_b, t_b)||^2 with w_b = 1 by default;
    the optional weights let a stratified t sampler stay unbiased for the
    uniform-t objective.  The gradient is reverse-mode, returned as
    [(dW, db), ...] in layer order.
    """
    x_t = np.atleast_2d(np.asarray(x_t, dtype=float))
    eps = np.atleast_2d(np.asarray(eps, dtype=float))
    t = np.broadcast_to(np.asarray(t, dtype=float), (x_t.shape[0],))
    if x_t.shape[0] == 0:
        raise ValueError("batch must be nonempty")
    _, dact = _ACTIVATIONS[model.activation]
    acts, scale = _forward_cached(model, x_t, t)
    out = acts[-1]
    resid = out - eps
    n_batch = x_t.shape[0]
    if sample_weights is None:
        weighted = resid
        loss = float(np.sum(resid * resid) / n_batch)
    else:
        sw = np.asarray(sample_weights, dtype=float).reshape(-1, 1)
        weighted = resid * sw
        loss = float(np.sum(resid * resid * sw) / n_batch)
    # gradient w.r.t. the pre-scale output of the last linear layer
    delta = 2.0 * weighted * scale / n_batch
    grads: list = [None] * len(model.weights)
    for layer in reversed(range(len(model.weights))):
        a_prev = acts[layer]
        grads[layer] = (delta.T @ a_prev, delta.sum(axis=0))
        if layer > 0:
            delta = (delta @ model.weights[layer]) * dact(acts[layer])
    return loss, grads


def denoiser_grad(model: DenoiserModel, x_t: np.ndarray, t, eps: np.ndarray) -> list:
    """Gradient of the batch noise-prediction loss, same shapes as parameters."""
    return denoiser_loss_and_grad(model, x_t, t, eps)[1]


def flatten_params(model: DenoiserModel) -> np.ndarray:
    return np.concatenate([np.concatenate([w.ravel(), b.ravel()])
                           for w, b in zip(model.weights, model.biases)])


def set_params(model: DenoiserModel, flat: np.ndarray) -> None:
    pos = 0
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        model.weights[i] = flat[pos:pos + w.size].reshape(w.shape).copy()
        pos += w.size
        model.biases[i] = flat[pos:pos + b.size].reshape(b.shape).copy()
        pos += b.size


def flatten_grads(grads: list) -> np.ndarray:
    return np.concatenate([np.concatenate([gw.ravel(), gb.ravel()]) for gw, gb in grads])


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    """Knobs for the minibatch noise-prediction training loop."""

    batch_size: int = 128
    steps: int = 2000
    learning_rate: float = 1e-3
    final_lr_frac: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    grad_clip: float = 10.0
    seed: int = 0
    hidden: tuple = (128, 128)
    n_freq: int = 8
    activation: str = "tanh"
    time_warp: str = "log"
    output_time_scaling: bool = True
    t_min_frac: float = 1e-3
    tail_average_frac: float = 0.25
    low_t_boost: float = 0.25

    def __post_init__(self):
        if min(self.batch_size, self.steps) < 1:
            raise ValueError("batch_size and steps must be positive")
        if not (self.learning_rate > 0 and self.grad_clip > 0 and self.t_min_frac > 0):
            raise ValueError("learning_rate, grad_clip and t_min_frac must be positive")
        if not 0.0 < self.final_lr_frac <= 1.0:
            raise ValueError("final_lr_frac must lie in (0, 1]")
        if not 0.0 <= self.tail_average_frac <= 1.0:
            raise ValueError("tail_average_frac must lie in [0, 1]")
        if not 0.0 <= self.low_t_boost < 1.0:
            raise ValueError("low_t_boost must lie in [0, 1)")
        for b in (self.beta1, self.beta2):
            if not 0.0 < b < 1.0:
                raise ValueError("moment decay rates must lie in (0, 1)")

    def to_json(self) -> dict:
        obj = asdict(self)
        obj["hidden"] = list(self.hidden)
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "TrainConfig":
        obj = dict(obj)
        if "hidden" in obj:
            obj["hidden"] = tuple(obj["hidden"])
        return cls(**obj)


@dataclass
class LossTrace:
    """Per-step minibatch noise-prediction MSE."""

    steps: list = field(default_factory=list)
    losses: list = field(default_factory=list)

    def append(self, step: int, loss: float):
        self.steps.append(step)
        self.losses.append(loss)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write("step,loss\n")
            for s, l in zip(self.steps, self.losses):
                fh.write(f"{s},{l!r}\n")


def train(dataset: Dataset, tilt: TiltSpec, schedule: NoiseSchedule,
          config: TrainConfig) -> tuple[DenoiserModel, LossTrace]:
    """Resample the dataset under the tilt, then fit the noise predictor to it.

    Builds the training set by weighted resampling with replacement (same size
    as the input), draws t uniformly on [t_min, horizon] per sample, and runs
    adaptive-moment minibatch descent on the noise MSE.  Deterministic given
    config.seed.
    """
    rng = np.random.default_rng(config.seed)
    measure = plugin_measure(dataset, tilt)
    train_set = resample(measure, dataset.n, rng).points
    d = dataset.d
    model = init_denoiser(d, schedule, rng, hidden=config.hidden,
                          n_freq=config.n_freq, activation=config.activation,
                          time_warp=config.time_warp, t_min_frac=config.t_min_frac,
                          output_time_scaling=config.output_time_scaling)
    adam_m = np.zeros_like(flatten_params(model))
    adam_v = np.zeros_like(adam_m)
    t_min = config.t_min_frac * schedule.horizon
    trace = LossTrace()
    tail_start = int(np.floor(config.steps * (1.0 - config.tail_average_frac)))
    tail_mean = None
    horizon = schedule.horizon
    log_span = np.log(horizon / t_min)
    n_low = int(round(config.low_t_boost * config.batch_size))
    for step in range(config.steps):
        idx = rng.integers(0, train_set.shape[0], size=config.batch_size)
        x0 = train_set[idx]
        t = rng.uniform(t_min, horizon, size=config.batch_size)
        weights = None
        if n_low > 0:
            # stratified small-t draws, importance-weighted back to the
            # uniform-t objective: low-t accuracy dominates sampling quality
            # but uniform sampling rarely visits it
            t[:n_low] = t_min * np.exp(rng.uniform(0.0, log_span, size=n_low))
            p_uniform = 1.0 / (horizon - t_min)
            p_mix = ((1.0 - config.low_t_boost) * p_uniform
                     + config.low_t_boost / (t * log_span))
            weights = p_uniform / p_mix
        eps = rng.standard_normal((config.batch_size, d))
        x_t = schedule.mean_coeff(t)[:, None] * x0 + np.sqrt(schedule.noise_var(t))[:, None] * eps
        try:
            loss, grads = denoiser_loss_and_grad(model, x_t, t, eps, weights)
        except NumericsError as exc:
            raise TrainingDivergedError(
                f"non-finite activations at step {step}: {exc}", trace=trace) from exc
        if not np.isfinite(loss):
            raise TrainingDivergedError(f"loss became non-finite at step {step}", trace=trace)
        g = flatten_grads(grads)
        gmax = float(np.abs(g).max())
        # rescale before the norm so huge gradients cannot overflow to inf
        gnorm = gmax * float(np.linalg.norm(g / gmax)) if gmax > 0 else 0.0
        if gnorm > config.grad_clip:
            g *= config.grad_clip / gnorm
        adam_m = config.beta1 * adam_m + (1 - config.beta1) * g
        adam_v = config.beta2 * adam_v + (1 - config.beta2) * g * g
        m_hat = adam_m / (1 - config.beta1 ** (step + 1))
        v_hat = adam_v / (1 - config.beta2 ** (step + 1))
        frac = step / max(config.steps - 1, 1)
        lr = config.learning_rate * (1.0 - (1.0 - config.final_lr_frac) * frac)
        params = flatten_params(model)
        params -= lr * m_hat / (np.sqrt(v_hat) + 1e-8)
        set_params(model, params)
        trace.append(step, loss)
        # tail averaging: the returned weights are the mean of the last
        # iterates, which removes most of the minibatch noise in the model
        if config.tail_average_frac > 0 and step >= tail_start:
            k = step - tail_start
            tail_mean = params if k == 0 else tail_mean + (params - tail_mean) / (k + 1)
    if config.tail_average_frac > 0:
        set_params(model, tail_mean)
    return model, trace


# ---------------------------------------------------------------------------
# score conversion and reverse sampling
# ---------------------------------------------------------------------------

def score_from_eps(model: DenoiserModel, x: np.ndarray, t,
                   schedule: NoiseSchedule) -> np.ndarray:
    """Score estimate -model(x, t) / sqrt(noise_var(t)); undefined at t = 0."""
    tarr = np.asarray(t, dtype=float)
    if (tarr <= 0).any():
        raise SingularTimeError("score conversion needs t > 0 (noise_var(0) = 0)")
    v = schedule.noise_var(tarr)
    pred = denoiser_forward(model, x, t)
    if pred.ndim == 1:
        return -pred / np.sqrt(v)
    vcol = np.broadcast_to(np.atleast_1d(v).reshape(-1, 1) if np.ndim(v) else v,
                           (pred.shape[0], 1))
    return -pred / np.sqrt(vcol)


ScoreLike = Union[DenoiserModel, Callable[[np.ndarray, float], np.ndarray]]


def reverse_sample(model: ScoreLike, schedule: NoiseSchedule, n: int,
                   rng: np.random.Generator, d: int | None = None) -> Dataset:
    """Integrate the reverse process from the stationary Gaussian.

    Euler steps x <- x + h (eta x + 2 sigma^2 score(x, t_fwd)) + sqrt(2h) sigma xi
    on a uniform grid, with the noise omitted on the final step.  ``model`` is
    either a trained DenoiserModel or a raw score callable (x, t) -> score,
    in which case d must be given.
    """
    if isinstance(model, DenoiserModel):
        score = lambda x, t: score_from_eps(model, x, t, schedule)
        d = model.d
    else:
        if d is None:
            raise ValueError("raw score callables need the dimension d")
        score = model
    if n < 1:
        raise ValueError("need n >= 1")
    h = schedule.horizon / schedule.steps
    x = rng.standard_normal((n, d)) * np.sqrt(schedule.stationary_var)
    sig2 = schedule.sigma ** 2
    for i in range(schedule.steps):
        t_fwd = schedule.horizon - i * h
        x = x + h * (schedule.eta * x + 2.0 * sig2 * score(x, t_fwd))
        if i < schedule.steps - 1:
            x = x + np.sqrt(2.0 * h) * schedule.sigma * rng.standard_normal((n, d))
        if not np.isfinite(x).all():
            raise NumericsError(f"non-finite state at reverse step {i}", index=i)
    return Dataset(x)


# ---------------------------------------------------------------------------
# score oracles and the empirical denoiser loss
# ---------------------------------------------------------------------------

def gaussian_score_oracle(mean, var: float, schedule: NoiseSchedule):
    """True score of the noised marginal when the data law is N(mean, var I)."""
    mean = np.atleast_1d(np.asarray(mean, dtype=float))

    def score(x, t):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        t = np.asarray(t, dtype=float)
        mc = schedule.mean_coeff(t)
        vt = var * mc ** 2 + schedule.noise_var(t)
        mt = np.multiply.outer(np.atleast_1d(mc), mean) if np.ndim(mc) else mc * mean
        vt = np.atleast_1d(vt).reshape(-1, 1) if np.ndim(vt) else vt
        return -(x - mt) / vt

    return score


def mixture_score_oracle(means, variances, weights, schedule: NoiseSchedule):
    """True score when the data law is a finite isotropic Gaussian mixture.

    Zero component variances (point masses) are allowed for t > 0 since the
    forward noise regularizes every component.
    """
    means = np.atleast_2d(np.asarray(means, dtype=float))
    variances = np.asarray(variances, dtype=float).reshape(-1)
    logw = np.log(np.asarray(weights, dtype=float).reshape(-1))

    def score(x, t):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        t = float(t) if np.ndim(t) == 0 else None
        if t is None:
            raise ValueError("mixture oracle evaluates one time per call")
        mc = float(schedule.mean_coeff(t))
        nv = float(schedule.noise_var(t))
        m_t = mc * means                       # (k, d)
        v_t = variances * mc ** 2 + nv         # (k,)
        d = x.shape[1]
        diff = x[:, None, :] - m_t[None, :, :]
        sq = np.sum(diff * diff, axis=2)
        logp = logw[None, :] - 0.5 * sq / v_t[None, :] - 0.5 * d * np.log(v_t)[None, :]
        logp -= logp.max(axis=1, keepdims=True)
        post = np.exp(logp)
        post /= post.sum(axis=1, keepdims=True)
        comp_scores = -diff / v_t[None, :, None]
        return np.sum(post[:, :, None] * comp_scores, axis=1)

    return score


def empirical_denoiser_loss(model: ScoreLike, dataset: Dataset, tilt: TiltSpec,
                            schedule: NoiseSchedule, n_mc: int,
                            rng: np.random.Generator, *,
                            score_oracle=None, surrogate: bool = False) -> float:
    """Monte Carlo time-averaged squared score error of the model.

    Oracle mode averages ||score_from_eps - true_score||^2 over (t, x_t) pairs
    with x0 resampled under the tilt; ``score_oracle`` must expose the true
    noised-marginal score.  ``model`` may also be a raw score callable, e.g.
    an analytically known score.  Surrogate mode needs no oracle and returns
    the noise MSE divided by noise_var(t) per sample, which matches the score
    loss in expectation by the usual denoising identity.
    """
    if score_oracle is None and not surrogate:
        raise OracleUnavailableError(
            "no true-score oracle supplied; pass score_oracle or surrogate=True")
    measure = plugin_measure(dataset, tilt)
    x0 = resample(measure, n_mc, rng).points
    t_min = 1e-3 * schedule.horizon
    t = rng.uniform(t_min, schedule.horizon, size=n_mc)
    eps = rng.standard_normal(x0.shape)
    nv = schedule.noise_var(t)
    x_t = schedule.mean_coeff(t)[:, None] * x0 + np.sqrt(nv)[:, None] * eps
    if surrogate:
        if not isinstance(model, DenoiserModel):
            raise ValueError("surrogate mode needs a noise-prediction model")
        pred = denoiser_forward(model, x_t, t)
        return float(np.mean(np.sum((eps - pred) ** 2, axis=1) / nv))
    total = 0.0
    for i in range(n_mc):  # oracle may be one-time-per-call
        if isinstance(model, DenoiserModel):
            s_hat = score_from_eps(model, x_t[i], float(t[i]), schedule)
        else:
            s_hat = np.asarray(model(x_t[i : i + 1], float(t[i])))[0]
        s_true = np.asarray(score_oracle(x_t[i : i + 1], float(t[i])))[0]
        total += float(np.sum((s_hat - s_true) ** 2))
    return total / n_mc


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

def save_checkpoint(path, model: DenoiserModel, schedule: NoiseSchedule,
                    config: TrainConfig) -> None:
    """JSON checkpoint: layer dims, row-major weights as decimal text, configs."""
    obj = {
        "layer_dims": model.layer_dims,
        "activation": model.activation,
        "time_warp": model.time_warp,
        "t_floor": repr(float(model.t_floor)),
        "out_scale_eta": None if model.out_scale_eta is None else repr(float(model.out_scale_eta)),
        "out_scale_horizon": None if model.out_scale_horizon is None else repr(float(model.out_scale_horizon)),
        "freqs": [repr(float(v)) for v in model.freqs],
        "layers": [
            {"w": [repr(float(v)) for v in w.ravel()],
             "b": [repr(float(v)) for v in b.ravel()]}
            for w, b in zip(model.weights, model.biases)
        ],
        "schedule": schedule.to_json(),
        "train_config": config.to_json(),
        "seed": config.seed,
    }
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1)


def load_checkpoint(path) -> tuple[DenoiserModel, NoiseSchedule, TrainConfig]:
    with open(path) as fh:
        obj = json.load(fh)
    dims = obj["layer_dims"]
    weights, biases = [], []
    for i, layer in enumerate(obj["layers"]):
        w = np.array([float(v) for v in layer["w"]]).reshape(dims[i + 1], dims[i])
        b = np.array([float(v) for v in layer["b"]])
        weights.append(w)
        biases.append(b)
    model = DenoiserModel(
        weights=weights, biases=biases,
        freqs=np.array([float(v) for v in obj["freqs"]]),
        activation=obj["activation"],
        time_warp=obj.get("time_warp", "log"),
        t_floor=float(obj.get("t_floor", 1e-6)),
        out_scale_eta=None if obj.get("out_scale_eta") is None else float(obj["out_scale_eta"]),
        out_scale_horizon=None if obj.get("out_scale_horizon") is None else float(obj["out_scale_horizon"]),
    )
    return model, NoiseSchedule.from_json(obj["schedule"]), TrainConfig.from_json(obj["train_config"])
