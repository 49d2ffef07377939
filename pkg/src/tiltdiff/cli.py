"""Reproducible experiment drivers and the command-line interface.

Subcommands: convergence, bounded-target, bounds, scoregap, train, sample,
eval.  Each command reads one JSON config (defaults apply field by field),
writes its outputs into the output directory plus a run-manifest JSON listing
every file, and is byte-identical on rerun with the same config.

Exit codes: 0 ok, 2 bad config or parameter regime, 3 numeric failure
(partial CSV left in place), 4 I/O failure, 5 inequality violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
import time
from dataclasses import dataclass, field, fields, asdict
from pathlib import Path

import numpy as np
import jsonschema

from . import __version__
from .bounds import (
    FiniteMeasure,
    bound_iid,
    bound_tilted_bounded,
    bound_tilted_unbounded,
    log_mgf,
    moment_q_tilted,
    plugin_clt_variance,
    tilt_quantities,
    set_discrepancy_bound,
    _check_regime,
)
from .diffusion import (
    NoiseSchedule,
    TrainConfig,
    load_checkpoint,
    reverse_sample,
    save_checkpoint,
    train,
)
from .errors import (
    ConfigError,
    DegenerateMeasureError,
    InequalityViolationError,
    MissingBoundError,
    NumericsError,
    ParseError,
    RegimeError,
    TrainingDivergedError,
    WeightOverflowError,
)
from .scoregap import inequality_battery
from .synthdata import (
    BetaMixSpec,
    gen_beta_mix_spec,
    ground_truth_tilted,
    load_csv,
    sample_beta_mix,
    save_csv,
)
from .tilting import (
    Dataset,
    TiltSpec,
    effective_sample_size,
    plugin_measure,
    resample,
)
from .transport import Box, HistogramGrid, sliced_wp, tv_histogram


@dataclass
class ExperimentConfig:
    """One config type shared by every subcommand; unknown keys are rejected."""

    name: str = "default"
    seed: int = 0
    out_dir: str = "out"
    threads: int = 1
    data: dict = field(default_factory=lambda: {
        "kind": "beta_mix", "d": 10, "gen_seed": 7, "normalization": "row", "n": 10000})
    tilt: dict | None = None
    theta_fill: float = 2.0
    n_grid: list = field(default_factory=lambda: [100, 1000, 10000, 100000])
    resample_size: int = 10000
    oracle_size: int = 10000
    seeds: list = field(default_factory=lambda: list(range(10)))
    theta_grid: list = field(default_factory=lambda: [1.0, 2.0, 2.5])
    metric: dict = field(default_factory=lambda: {"p": 2.0, "n_proj": 128, "bins": 50})
    schedule: dict = field(default_factory=lambda: {
        "eta": 1.0, "sigma": 1.0, "horizon": 4.0, "steps": 400})
    train: dict = field(default_factory=dict)
    bound: dict = field(default_factory=lambda: {
        "p": 4.9, "q": 12.0, "constant": 1.0, "calibration_n": 100000})
    boxes: list = field(default_factory=list)
    scoregap: dict = field(default_factory=lambda: {"instances": 50, "n_mc": 400})
    sample_size: int = 10000
    checkpoint: str | None = None
    inputs: list = field(default_factory=list)

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**obj)
        cfg.validate()
        return cfg

    def validate(self):
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        if list(self.n_grid) != sorted(self.n_grid) or len(set(self.n_grid)) != len(self.n_grid):
            raise ConfigError("n_grid must be strictly ascending")
        if any(int(n) < 1 for n in self.n_grid):
            raise ConfigError("n_grid entries must be positive")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.data.get("kind") not in ("beta_mix", "csv", "finite"):
            raise ConfigError(f"unknown data kind {self.data.get('kind')!r}")
        p, q = float(self.bound.get("p", 4.9)), float(self.bound.get("q", 12.0))
        if not q > p:
            raise ConfigError(f"bound params need q > p, got p={p}, q={q}")

    def hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def load_config(path: str | None, overrides: dict | None = None) -> ExperimentConfig:
    obj = {}
    if path is not None:
        try:
            with open(path) as fh:
                obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    for key, val in (overrides or {}).items():
        if val is not None:
            obj[key] = val
    return ExperimentConfig.from_dict(obj)


# ---------------------------------------------------------------------------
# shared pieces
# ---------------------------------------------------------------------------

def _cell_rng(*entropy) -> np.random.Generator:
    return np.random.default_rng(list(entropy))


def _build_beta_spec(cfg: ExperimentConfig) -> BetaMixSpec:
    data = cfg.data
    if "alpha" in data:
        return BetaMixSpec.from_json(data)
    gen_seed = int(data.get("gen_seed", 7))
    return gen_beta_mix_spec(int(data["d"]), np.random.default_rng(gen_seed),
                             normalization=data.get("normalization", "row"),
                             seed=gen_seed)


def _build_finite(cfg: ExperimentConfig) -> FiniteMeasure:
    data = cfg.data
    return FiniteMeasure(atoms=np.asarray(data["atoms"], dtype=float),
                         masses=np.asarray(data["masses"], dtype=float))


def _default_g_max(cfg: ExperimentConfig, d: int) -> float | None:
    kind = cfg.data.get("kind")
    if kind == "beta_mix":
        if cfg.data.get("normalization", "row") == "row":
            return float(np.sqrt(d))
        spec = _build_beta_spec(cfg)
        return float(np.linalg.norm(spec.mix.sum(axis=1)))
    if kind == "finite":
        atoms = np.asarray(cfg.data["atoms"], dtype=float)
        return float(np.linalg.norm(np.atleast_2d(atoms), axis=1).max())
    return None


def _build_tilt(cfg: ExperimentConfig, d: int, theta_fill: float | None = None) -> TiltSpec:
    if cfg.tilt is not None and theta_fill is None:
        return TiltSpec.from_json(cfg.tilt)
    fill = cfg.theta_fill if theta_fill is None else theta_fill
    return TiltSpec(theta=np.full(d, float(fill)), g_max=_default_g_max(cfg, d))


def _prepare_out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out_dir: Path, command: str, cfg: ExperimentConfig,
                    outputs: list, t0: float) -> Path:
    manifest = {
        "command": command,
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "outputs": [Path(p).name for p in outputs],
        "wall_clock_s": time.time() - t0,
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "tiltdiff": __version__,
        },
    }
    path = out_dir / f"{command.replace('-', '_')}_manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=1)
    return path


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


class _CsvWriter:
    """Line-buffered CSV writer so partial output survives a failure."""

    def __init__(self, path: Path, header: list):
        self.fh = open(path, "w", newline="")
        self.fh.write(",".join(header) + "\n")
        self.fh.flush()

    def row(self, values: list):
        self.fh.write(",".join(_fmt(v) for v in values) + "\n")
        self.fh.flush()

    def close(self):
        self.fh.close()


# ---------------------------------------------------------------------------
# convergence
# ---------------------------------------------------------------------------

def run_convergence(cfg: ExperimentConfig) -> list:
    """Sliced distance to the exact tilted oracle plus bound curves over the N grid."""
    t0 = time.time()
    out_dir = _prepare_out_dir(cfg)
    spec = _build_beta_spec(cfg)
    d = spec.d
    tilt = _build_tilt(cfg, d)
    p_b, q_b = float(cfg.bound["p"]), float(cfg.bound["q"])
    constant = float(cfg.bound.get("constant", 1.0))
    _check_regime(p_b, q_b, d)
    metric_p = float(cfg.metric.get("p", 2.0))
    n_proj = int(cfg.metric.get("n_proj", 128))

    # Bound constants are population quantities of (base law, tilt); estimate
    # them once from a dedicated calibration sample and reuse across the grid.
    cal_rng = _cell_rng(cfg.seed, 0xCA11)
    cal = sample_beta_mix(spec, int(cfg.bound.get("calibration_n", 100000)), cal_rng)
    quants = tilt_quantities(cal, tilt)
    mq_2t = moment_q_tilted(cal, tilt, q_b, theta_scale=2.0)
    mq_1t = moment_q_tilted(cal, tilt, q_b, theta_scale=1.0)

    csv_path = out_dir / "convergence.csv"
    writer = _CsvWriter(csv_path, ["n", "seed", "sw_p", "bound_unbounded",
                                   "bound_bounded", "bound_iid", "ess",
                                   "acceptance_rate"])
    try:
        for n in cfg.n_grid:
            n = int(n)
            b_unb = bound_tilted_unbounded(n, p_b, q_b, d, quants, mq_2t, constant)
            b_bnd = bound_tilted_bounded(n, p_b, q_b, d, quants, mq_1t, constant)
            b_iid = bound_iid(n, p_b, q_b, d, mq_1t, constant)
            for seed in cfg.seeds:
                rng = _cell_rng(cfg.seed, n, int(seed))
                base = sample_beta_mix(spec, n, rng)
                measure = plugin_measure(base, tilt)
                cloud = resample(measure, int(cfg.resample_size), rng)
                stats: dict = {}
                oracle = ground_truth_tilted(spec, tilt, int(cfg.oracle_size), rng, stats)
                sw = sliced_wp(cloud, oracle, metric_p, n_proj, rng)
                writer.row([n, int(seed), sw, b_unb, b_bnd, b_iid,
                            effective_sample_size(measure),
                            stats.get("acceptance_rate", 1.0)])
    finally:
        writer.close()
    manifest = _write_manifest(out_dir, "convergence", cfg, [csv_path], t0)
    return [csv_path, manifest]


# ---------------------------------------------------------------------------
# bounded-target
# ---------------------------------------------------------------------------

def _tv_between(a: Dataset, b: Dataset, bins: int) -> float:
    d_eff = min(a.d, 3)
    pa, pb = a.points[:, :d_eff], b.points[:, :d_eff]
    lo = np.minimum(pa.min(axis=0), pb.min(axis=0))
    hi = np.maximum(pa.max(axis=0), pb.max(axis=0)) + 1e-9
    grid = HistogramGrid(bins=(bins,) * d_eff,
                         ranges=tuple((float(l), float(h)) for l, h in zip(lo, hi)))
    return tv_histogram(Dataset(pa), Dataset(pb), grid)


def run_bounded_target(cfg: ExperimentConfig) -> list:
    """Reweigh vs reweigh+diffusion vs oracle across the tilt grid."""
    t0 = time.time()
    out_dir = _prepare_out_dir(cfg)
    spec = _build_beta_spec(cfg)
    d = spec.d
    base_n = int(cfg.data.get("n", 10000))
    m = int(cfg.resample_size)
    metric_p = float(cfg.metric.get("p", 2.0))
    n_proj = int(cfg.metric.get("n_proj", 128))
    bins = int(cfg.metric.get("bins", 50))
    schedule = NoiseSchedule.from_json(cfg.schedule)
    csv_path = out_dir / "bounded_target.csv"
    writer = _CsvWriter(csv_path, ["theta", "seed", "method", "sw_p", "tv", "note"])
    try:
        for theta_idx, theta in enumerate(cfg.theta_grid):
            tilt = _build_tilt(cfg, d, theta_fill=float(theta))
            for seed in cfg.seeds:
                rng = _cell_rng(cfg.seed, theta_idx, int(seed))
                base = sample_beta_mix(spec, base_n, rng)
                measure = plugin_measure(base, tilt)
                reweigh = resample(measure, m, rng)
                oracle_ref = ground_truth_tilted(spec, tilt, m, rng)
                oracle_2 = ground_truth_tilted(spec, tilt, m, rng)
                train_cfg = TrainConfig.from_json(
                    {**cfg.train, "seed": int(1_000_003 * (theta_idx + 1) + seed)})
                note = ""
                diffusion_cloud = None
                try:
                    model, _trace = train(base, tilt, schedule, train_cfg)
                    diffusion_cloud = reverse_sample(model, schedule, m, rng)
                except TrainingDivergedError:
                    note = "training_diverged"
                for method, cloud in (("reweigh", reweigh),
                                      ("reweigh+diffusion", diffusion_cloud),
                                      ("oracle", oracle_2)):
                    if cloud is None:
                        writer.row([float(theta), int(seed), method, "", "", note])
                        continue
                    sw = sliced_wp(cloud, oracle_ref, metric_p, n_proj,
                                   _cell_rng(cfg.seed, theta_idx, int(seed), 0xD157))
                    tv = _tv_between(cloud, oracle_ref, bins)
                    writer.row([float(theta), int(seed), method, sw, tv,
                                note if method == "reweigh+diffusion" else ""])
    finally:
        writer.close()
    manifest = _write_manifest(out_dir, "bounded-target", cfg, [csv_path], t0)
    return [csv_path, manifest]


# ---------------------------------------------------------------------------
# bounds report
# ---------------------------------------------------------------------------

BOUNDS_REPORT_SCHEMA = {
    "type": "object",
    "required": ["tilt", "quantities", "bounds", "boxes", "constant"],
    "properties": {
        "tilt": {"type": "object"},
        "constant": {"type": "number"},
        "estimation_mode": {"type": "object"},
        "quantities": {
            "type": "object",
            "required": ["mass_theta", "mass_2theta", "mass_minus_2theta",
                         "weight_spread", "weight_l2_ratio"],
            "properties": {
                "mass_theta": {"type": "number"},
                "mass_2theta": {"type": "number"},
                "mass_minus_2theta": {"type": "number"},
                "weight_spread": {"type": "number"},
                "weight_l2_ratio": {"type": "number"},
                "bounded_tilt_factor": {"type": ["number", "null"]},
                "g_max": {"type": ["number", "null"]},
            },
        },
        "bounds": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["n", "tilted_unbounded", "tilted_bounded", "iid"],
                "properties": {
                    "n": {"type": "integer"},
                    "tilted_unbounded": {"type": "number"},
                    "tilted_bounded": {"type": ["number", "null"]},
                    "iid": {"type": "number"},
                },
            },
        },
        "boxes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["lo", "hi", "mass_theta", "mass_2theta",
                             "clt_variance", "discrepancy_bounds"],
                "properties": {
                    "lo": {"type": "array"},
                    "hi": {"type": "array"},
                    "mass_theta": {"type": "number"},
                    "mass_2theta": {"type": "number"},
                    "clt_variance": {"type": "number"},
                    "discrepancy_bounds": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["n", "value"],
                            "properties": {"n": {"type": "integer"},
                                           "value": {"type": "number"}},
                        },
                    },
                },
            },
        },
    },
}


def run_bounds_report(cfg: ExperimentConfig) -> list:
    """All tilt quantities, bound curves and per-box constants as one JSON report."""
    t0 = time.time()
    out_dir = _prepare_out_dir(cfg)
    kind = cfg.data.get("kind")
    if kind == "finite":
        source = _build_finite(cfg)
        d = source.d
    elif kind == "beta_mix":
        spec = _build_beta_spec(cfg)
        d = spec.d
        source = sample_beta_mix(spec, int(cfg.data.get("n", 10000)),
                                 _cell_rng(cfg.seed, 0xB0))
    else:
        source = load_csv(cfg.data["path"])
        d = source.d
    tilt = _build_tilt(cfg, d)
    p_b, q_b = float(cfg.bound["p"]), float(cfg.bound["q"])
    constant = float(cfg.bound.get("constant", 1.0))
    _check_regime(p_b, q_b, d)
    quants = tilt_quantities(source, tilt)
    mq_2t = moment_q_tilted(source, tilt, q_b, theta_scale=2.0)
    mq_1t = moment_q_tilted(source, tilt, q_b, theta_scale=1.0)

    bounds_rows = []
    for n in cfg.n_grid:
        n = int(n)
        try:
            iid_val = bound_iid(n, p_b, q_b, d, mq_1t, constant)
        except RegimeError:
            raise
        try:
            bounded_val = bound_tilted_bounded(n, p_b, q_b, d, quants, mq_1t, constant)
        except MissingBoundError:
            bounded_val = None
        bounds_rows.append({
            "n": n,
            "tilted_unbounded": bound_tilted_unbounded(n, p_b, q_b, d, quants, mq_2t, constant),
            "tilted_bounded": bounded_val,
            "iid": iid_val,
        })

    box_rows = []
    exact_source = source if isinstance(source, FiniteMeasure) else FiniteMeasure(
        atoms=source.points, masses=np.full(source.n, 1.0 / source.n))
    for box_obj in cfg.boxes:
        box = Box(lo=np.asarray(box_obj["lo"], dtype=float),
                  hi=np.asarray(box_obj["hi"], dtype=float))
        l1 = log_mgf(source, tilt, 1.0)
        l2 = log_mgf(source, tilt, 2.0)
        mass_t = float(np.exp(log_mgf(source, tilt, 1.0, box) - l1))
        mass_2t = float(np.exp(log_mgf(source, tilt, 2.0, box) - l2))
        box_rows.append({
            "lo": box.lo.tolist(),
            "hi": box.hi.tolist(),
            "mass_theta": mass_t,
            "mass_2theta": mass_2t,
            "clt_variance": plugin_clt_variance(exact_source, tilt, box),
            "discrepancy_bounds": [
                {"n": int(n), "value": set_discrepancy_bound(int(n), quants, mass_2t, mass_t)}
                for n in cfg.n_grid
            ],
        })

    report = {
        "tilt": tilt.to_json(),
        "constant": constant,
        "estimation_mode": {"kind": quants.estimation_mode.kind,
                            "n": quants.estimation_mode.n},
        "quantities": {
            "mass_theta": quants.mass_theta,
            "mass_2theta": quants.mass_2theta,
            "mass_minus_2theta": quants.mass_minus_2theta,
            "weight_spread": quants.weight_spread,
            "weight_l2_ratio": quants.weight_l2_ratio,
            "bounded_tilt_factor": quants.bounded_tilt_factor,
            "g_max": quants.g_max,
        },
        "bounds": bounds_rows,
        "boxes": box_rows,
    }
    jsonschema.validate(report, BOUNDS_REPORT_SCHEMA)
    path = out_dir / "bounds_report.json"
    with open(path, "w") as fh:
        json.dump(report, fh, indent=1)
    manifest = _write_manifest(out_dir, "bounds", cfg, [path], t0)
    return [path, manifest]


# ---------------------------------------------------------------------------
# scoregap battery
# ---------------------------------------------------------------------------

def run_scoregap(cfg: ExperimentConfig) -> list:
    """Run the randomized inequality battery; any violation is a hard failure."""
    t0 = time.time()
    out_dir = _prepare_out_dir(cfg)
    schedule = NoiseSchedule.from_json(cfg.schedule)
    rng = _cell_rng(cfg.seed, 0x5C0)
    rows = inequality_battery(int(cfg.scoregap.get("instances", 50)), schedule, rng,
                              n_mc=int(cfg.scoregap.get("n_mc", 400)))
    csv_path = out_dir / "scoregap.csv"
    writer = _CsvWriter(csv_path, ["instance", "label", "dim", "variant", "gap",
                                   "gap_stderr", "eps_sq", "wasserstein",
                                   "bound", "margin", "holds"])
    try:
        for r in rows:
            writer.row([r.instance, r.label, r.dim, r.variant, r.gap, r.gap_stderr,
                        r.eps_sq, r.wasserstein, r.bound, r.margin,
                        "true" if r.holds else "false"])
    finally:
        writer.close()
    manifest = _write_manifest(out_dir, "scoregap", cfg, [csv_path], t0)
    violations = [r for r in rows if not r.holds]
    if violations:
        raise InequalityViolationError(
            f"{len(violations)} battery rows violated their bound beyond the "
            f"Monte Carlo margin; see {csv_path}")
    return [csv_path, manifest]


# ---------------------------------------------------------------------------
# train / sample / eval
# ---------------------------------------------------------------------------

def _load_dataset(cfg: ExperimentConfig, rng: np.random.Generator) -> Dataset:
    kind = cfg.data.get("kind")
    if kind == "csv":
        return load_csv(cfg.data["path"])
    if kind == "beta_mix":
        return sample_beta_mix(_build_beta_spec(cfg), int(cfg.data.get("n", 10000)), rng)
    raise ConfigError(f"data kind {kind!r} cannot back this command")


def run_train(cfg: ExperimentConfig) -> list:
    t0 = time.time()
    out_dir = _prepare_out_dir(cfg)
    dataset = _load_dataset(cfg, _cell_rng(cfg.seed, 0xDA7A))
    tilt = _build_tilt(cfg, dataset.d)
    schedule = NoiseSchedule.from_json(cfg.schedule)
    train_cfg = TrainConfig.from_json({"seed": cfg.seed, **cfg.train})
    model, trace = train(dataset, tilt, schedule, train_cfg)
    ckpt = out_dir / "checkpoint.json"
    save_checkpoint(ckpt, model, schedule, train_cfg)
    trace_path = out_dir / "loss_trace.csv"
    trace.write_csv(trace_path)
    manifest = _write_manifest(out_dir, "train", cfg, [ckpt, trace_path], t0)
    return [ckpt, trace_path, manifest]


def run_sample(cfg: ExperimentConfig) -> list:
    t0 = time.time()
    out_dir = _prepare_out_dir(cfg)
    if not cfg.checkpoint:
        raise ConfigError("sample needs a checkpoint path in the config")
    try:
        model, schedule, _train_cfg = load_checkpoint(cfg.checkpoint)
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"malformed checkpoint: {exc}") from exc
    if cfg.schedule.get("steps"):
        schedule = NoiseSchedule(eta=schedule.eta, sigma=schedule.sigma,
                                 horizon=schedule.horizon,
                                 steps=int(cfg.schedule["steps"]))
    samples = reverse_sample(model, schedule, int(cfg.sample_size),
                             _cell_rng(cfg.seed, 0x5A3))
    path = out_dir / "samples.csv"
    save_csv(samples, path)
    manifest = _write_manifest(out_dir, "sample", cfg, [path], t0)
    return [path, manifest]


def run_eval(cfg: ExperimentConfig) -> list:
    t0 = time.time()
    out_dir = _prepare_out_dir(cfg)
    if len(cfg.inputs) != 2:
        raise ConfigError("eval needs exactly two input CSV paths")
    x = load_csv(cfg.inputs[0])
    y = load_csv(cfg.inputs[1])
    metric_p = float(cfg.metric.get("p", 2.0))
    n_proj = int(cfg.metric.get("n_proj", 128))
    bins = int(cfg.metric.get("bins", 50))
    metrics = {
        "sliced_wp": sliced_wp(x, y, metric_p, n_proj, _cell_rng(cfg.seed, 0xE7A1)),
        "p": metric_p,
        "n_proj": n_proj,
    }
    if x.d <= 3:
        metrics["tv_histogram"] = _tv_between(x, y, bins)
        metrics["bins"] = bins
    path = out_dir / "eval_metrics.json"
    with open(path, "w") as fh:
        json.dump(metrics, fh, indent=1)
    manifest = _write_manifest(out_dir, "eval", cfg, [path], t0)
    return [path, manifest]


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "convergence": run_convergence,
    "bounded-target": run_bounded_target,
    "bounds": run_bounds_report,
    "scoregap": run_scoregap,
    "train": run_train,
    "sample": run_sample,
    "eval": run_eval,
}


def _build_parser() -> argparse.ArgumentParser:
    # SUPPRESS keeps a subparser from clobbering flags given before the command
    shared = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    shared.add_argument("--config", help="JSON config path")
    shared.add_argument("--seed", type=int)
    shared.add_argument("--out-dir", dest="out_dir")
    shared.add_argument("--threads", type=int,
                        help="accepted for interface stability; execution is "
                             "sequential and deterministic")
    parser = argparse.ArgumentParser(prog="tiltdiff", parents=[shared])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cmd = sub.add_parser(name, parents=[shared])
        if name == "eval":
            cmd.add_argument("inputs", nargs="*", default=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = {"seed": getattr(args, "seed", None),
                 "out_dir": getattr(args, "out_dir", None),
                 "threads": getattr(args, "threads", None)}
    if getattr(args, "inputs", None):
        overrides["inputs"] = args.inputs
    try:
        cfg = load_config(getattr(args, "config", None), overrides)
        _COMMANDS[args.command](cfg)
        return 0
    except (ConfigError, RegimeError, MissingBoundError, ParseError,
            jsonschema.ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericsError, TrainingDivergedError, DegenerateMeasureError,
            WeightOverflowError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 4
    except InequalityViolationError as exc:
        print(f"inequality violation: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    raise SystemExit(main())
