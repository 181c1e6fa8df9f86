"""Experiment configuration and the reconstruct / sweep pipelines."""

import copy
import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .basis import BasisSpec
from .estimator import CSReconstructor
from .exceptions import ConfigError, IngestionError, NumericError, ParameterError, UndefinedMetricError
from .reconstructor import TrainingSchedule, reconstruct
from .sampling import effective_ratio, generate_mask
from .signals import (
    BENCHMARK_SINUSOIDS,
    SinusoidSpec,
    amplitude_spectrum,
    concatenate,
    generate_sinusoids,
    reconstruction_error,
    slice_signal,
    spectrum_frequencies,
    symmetry_mismatch,
)
from .validation import check_schedule

LOG = logging.getLogger(__name__)

OUTPUT_ENV = "CSRECON_OUTPUT_DIR"
DEFAULT_RATIOS = tuple(round(0.10 + 0.05 * i, 2) for i in range(9))
SWEEP_COLUMNS = (
    "slice",
    "ratio",
    "seed",
    "channel",
    "xi",
    "data_loss_real",
    "data_loss_imag",
    "l1_penalty",
    "total",
    "effective_ratio",
    "wall_time_s",
    "error",
)
TIMING_COLUMNS = ("wall_time_s",)


def default_output_dir():
    return os.environ.get(OUTPUT_ENV, "csrecon_out")


@dataclass
class ExperimentConfig:
    """Everything needed to rerun an experiment.

    ``input`` is either ``{"synthetic": {...}}`` or ``{"csv": path}``; see
    :func:`load_input`.
    """

    input: dict = field(default_factory=lambda: {"synthetic": {"sinusoids": "benchmark"}})
    slice_len: int = 2048
    ratios: list = field(default_factory=lambda: list(DEFAULT_RATIOS))
    seeds: list = field(default_factory=lambda: [0])
    schedule: object = "default"
    mu: float = 1e-3
    basis: str = "fourier"
    shared_mask: bool = False
    noise: float = 0.0
    channels: list = None
    slices: list = None
    snapshot_epochs: list = field(default_factory=list)
    output_dir: str = field(default_factory=default_output_dir)
    max_workers: int = 1
    svg: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        try:
            ratios = [float(r) for r in self.ratios]
        except (TypeError, ValueError):
            raise ConfigError("must be a list of numbers", "ratios") from None
        if not ratios or any(not 0.0 < r <= 1.0 for r in ratios):
            raise ConfigError("every ratio must lie in (0, 1]", "ratios")
        self.ratios = ratios
        if not isinstance(self.slice_len, int) or self.slice_len < 2:
            raise ConfigError("must be an integer >= 2", "slice_len")
        if not self.seeds:
            raise ConfigError("at least one seed is required", "seeds")
        self.seeds = [int(s) for s in self.seeds]
        try:
            sched = check_schedule(self.schedule)
        except ParameterError as exc:
            raise ConfigError(str(exc), "schedule") from None
        if not isinstance(self.schedule, str):
            self.schedule = sched.to_list()
        if self.mu < 0:
            raise ConfigError("must be >= 0", "mu")
        if self.basis not in ("fourier", "identity"):
            raise ConfigError("must be 'fourier' or 'identity'", "basis")
        if self.noise < 0:
            raise ConfigError("must be >= 0", "noise")
        if self.max_workers < 1:
            raise ConfigError("must be >= 1", "max_workers")
        if not isinstance(self.input, dict) or len(set(self.input) & {"synthetic", "csv"}) != 1:
            raise ConfigError("needs exactly one of 'synthetic' or 'csv'", "input")

    @property
    def training_schedule(self):
        return check_schedule(self.schedule)

    def to_dict(self):
        return asdict(self)


def _merge(base, over, atomic=("input",)):
    out = copy.deepcopy(base)
    for key, val in over.items():
        if key not in atomic and isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def load_config(path=None, overrides=None):
    """Build a config from built-in defaults, a JSON file and overrides.

    Precedence, lowest first: built-ins, the file's ``defaults`` section, the
    file's other top-level keys, then ``overrides`` (typically CLI flags).
    """
    data = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {p} not found", "config")
        try:
            raw = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}", "config") from None
        if not isinstance(raw, dict):
            raise ConfigError("top level must be an object", "config")
        data = _merge(raw.get("defaults", {}), {k: v for k, v in raw.items() if k != "defaults"})
    data = _merge(data, {k: v for k, v in (overrides or {}).items() if v is not None})
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", "config")
    try:
        return ExperimentConfig(**data)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), "config") from None


def _sinusoid_specs(spec):
    if spec == "benchmark":
        return list(BENCHMARK_SINUSOIDS)
    if not isinstance(spec, list) or not spec:
        raise ConfigError("must be 'benchmark' or a non-empty list", "input.synthetic.sinusoids")
    out = []
    for i, item in enumerate(spec):
        try:
            if isinstance(item, dict):
                out.append(SinusoidSpec(float(item["amplitude"]), float(item["frequency"]), float(item.get("phase", 0.0))))
            else:
                out.append(SinusoidSpec(*map(float, item)))
        except (KeyError, TypeError, ValueError):
            raise ConfigError(f"entry {i} is not a valid sinusoid", "input.synthetic.sinusoids") from None
    return out


def synthetic_signal(syn):
    specs = _sinusoid_specs(syn.get("sinusoids", "benchmark"))
    try:
        return generate_sinusoids(
            specs,
            float(syn.get("sample_rate", 400.0)),
            float(syn.get("duration", 20.48)),
            bool(syn.get("include_superposition", True)),
        )
    except ParameterError as exc:
        raise ConfigError(str(exc), "input.synthetic") from None


def load_input(config):
    """Signal described by ``config.input``, channel-selected and noised."""
    if "csv" in config.input:
        sig = io.read_signal(config.input["csv"], config.input.get("sample_rate"))
    else:
        sig = synthetic_signal(config.input["synthetic"])
    if config.channels is not None:
        try:
            sig = sig.select(config.channels)
        except IndexError:
            raise ConfigError(f"channel index out of range for {sig.k} channels", "channels") from None
    return sig


def add_noise(signal, level, seed):
    """White Gaussian noise with std ``level`` times each channel's RMS."""
    if level == 0:
        return signal
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0x6E6F697365])))
    rms = np.sqrt(np.mean(signal.data**2, axis=0))
    return signal.with_data(signal.data + rng.standard_normal(signal.data.shape) * level * rms)


def cell_seed(seed, slice_index):
    """Seed for the mask and training of one (seed, slice) cell.

    Independent of the ratio, so masks at higher ratios keep every sample
    kept at lower ratios.
    """
    return int(np.random.SeedSequence([int(seed), int(slice_index)]).generate_state(1, np.uint32)[0])


@dataclass
class CellResult:
    slice_index: int
    ratio: float
    seed: int
    mask_seed: int
    signal: object
    estimator: object
    mask: object
    xi: np.ndarray
    wall_time: float
    snapshots: dict


def run_cell(sl, slice_index, ratio, seed, config):
    """Mask one slice, train, and reconstruct."""
    t_start = time.perf_counter()
    ms = cell_seed(seed, slice_index)
    mask = generate_mask(sl.n, sl.k, ratio, ms, shared=config.shared_mask)
    observed = np.where(mask.bits == 1.0, sl.data, np.nan)
    snaps = {}
    wanted = {int(e) for e in config.snapshot_epochs}
    basis = BasisSpec(sl.n, config.basis)

    def grab(epoch, state, rec):
        if epoch + 1 in wanted:
            snaps[epoch + 1] = reconstruct(state, basis)[0]

    est = CSReconstructor(mu=config.mu, schedule=config.training_schedule, basis=config.basis, random_state=ms)
    est.fit(observed, mask=mask, callback=grab if wanted else None)
    with np.errstate(all="ignore"):
        xi = reconstruction_error(sl.data, est.reconstruction_)
    return CellResult(slice_index, ratio, seed, ms, sl, est, mask, xi, time.perf_counter() - t_start, snaps)


def _prepared_slices(config, seed):
    sig = add_noise(load_input(config), config.noise, seed)
    if sig.n < config.slice_len:
        raise ConfigError(f"signal has {sig.n} samples, fewer than slice_len", "slice_len")
    slices = slice_signal(sig, config.slice_len)
    idx = range(len(slices)) if config.slices is None else config.slices
    try:
        return sig, [(i, slices[i]) for i in idx]
    except IndexError:
        raise ConfigError(f"slice index out of range for {len(slices)} slices", "slices") from None


def _final(history):
    return history[-1] if history else None


def run_reconstruct(config, ratio=None, seed=None, write=True):
    """Reconstruct every slice at one ratio and one seed.

    Writes, under ``config.output_dir``: ``reconstruction.csv``, per-slice
    ``slice_<i>/`` folders (mask, loss history, coefficients checkpoint,
    optional snapshots) and ``report.json``. Returns the report dict.
    """
    ratio = config.ratios[0] if ratio is None else ratio
    seed = config.seeds[0] if seed is None else seed
    sig, slices = _prepared_slices(config, seed)
    out = Path(config.output_dir)
    results = [run_cell(sl, i, ratio, seed, config) for i, sl in slices]

    report = {
        "ratio": ratio,
        "seed": seed,
        "sample_rate": sig.sample_rate,
        "channels": list(sig.channel_names),
        "config": config.to_dict(),
        "slices": [],
    }
    for r in results:
        last = _final(r.estimator.loss_history_)
        report["slices"].append(
            {
                "index": r.slice_index,
                "t0": r.signal.t0,
                "mask_seed": r.mask_seed,
                "effective_ratio": effective_ratio(r.mask),
                "xi": {c: _num(v) for c, v in zip(sig.channel_names, r.xi)},
                "final_loss": None if last is None else asdict(last),
                "wall_time_s": r.wall_time,
            }
        )
    if write:
        out.mkdir(parents=True, exist_ok=True)
        rec = concatenate([r.signal.with_data(r.estimator.reconstruction_) for r in results])
        io.write_signal(out / "reconstruction.csv", rec)
        for r in results:
            d = out / f"slice_{r.slice_index}"
            d.mkdir(parents=True, exist_ok=True)
            io.write_mask(d / "mask.csv", r.mask)
            io.write_loss_history(d / "loss.csv", r.estimator.loss_history_)
            sched = config.training_schedule
            io.write_checkpoint(
                d / "coefficients",
                r.estimator.state_,
                {
                    "epoch": sched.total_epochs,
                    "schedule_position": len(sched.segments),
                    "seed": r.mask_seed,
                    "mu": config.mu,
                    "basis": config.basis,
                    "sample_rate": sig.sample_rate,
                    "channels": list(sig.channel_names),
                },
            )
            if r.snapshots:
                sd = d / "snapshots"
                sd.mkdir(exist_ok=True)
                for ep, data in sorted(r.snapshots.items()):
                    io.write_signal(sd / f"epoch_{ep}.csv", r.signal.with_data(data))
        (out / "report.json").write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
        if config.svg:
            from .svg import write_lines

            orig = concatenate([r.signal for r in results])
            for j, name in enumerate(sig.channel_names):
                write_lines(
                    out / f"reconstruction_{name}.svg",
                    orig.times,
                    {"original": orig.data[:, j], "reconstructed": rec.data[:, j]},
                    title=f"{name} (ratio {ratio})",
                )
    report["_results"] = results
    return report


def _num(v):
    v = float(v)
    return None if math.isnan(v) else v


def _sweep_task(args):
    config, seed, ratio, slice_index, sl = args
    try:
        r = run_cell(sl, slice_index, ratio, seed, config)
    except (NumericError, ValueError) as exc:
        return [
            {
                "slice": slice_index,
                "ratio": ratio,
                "seed": seed,
                "channel": name,
                "error": f"{type(exc).__name__}: {exc}".replace("\n", " "),
            }
            for name in sl.channel_names
        ]
    last = _final(r.estimator.loss_history_)
    eff = effective_ratio(r.mask)
    rows = []
    for j, name in enumerate(sl.channel_names):
        rows.append(
            {
                "slice": slice_index,
                "ratio": ratio,
                "seed": seed,
                "channel": name,
                "xi": _num(r.xi[j]),
                "data_loss_real": last.data_loss_real,
                "data_loss_imag": last.data_loss_imag,
                "l1_penalty": last.l1_penalty,
                "total": last.total,
                "effective_ratio": eff,
                "wall_time_s": r.wall_time,
                "error": "",
            }
        )
    return rows


def run_sweep(config, write=True):
    """Run every (slice, ratio, seed) cell; return the sorted report rows.

    Cell failures become rows with a non-empty ``error`` field; the sweep
    carries on.
    """
    tasks = []
    for seed in config.seeds:
        _, slices = _prepared_slices(config, seed)
        for ratio in config.ratios:
            for i, sl in slices:
                tasks.append((config, seed, ratio, i, sl))
    if config.max_workers > 1:
        with ProcessPoolExecutor(max_workers=config.max_workers) as pool:
            chunks = list(pool.map(_sweep_task, tasks))
    else:
        chunks = [_sweep_task(t) for t in tasks]
    order = {}
    rows = []
    for chunk in chunks:
        for row in chunk:
            order.setdefault(row["channel"], len(order))
            rows.append(row)
    rows.sort(key=lambda r: (r["slice"], r["ratio"], order[r["channel"]], r["seed"]))
    if write:
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_sweep_report(out / "sweep_report.csv", rows)
        if config.svg:
            from .svg import write_lines

            summary = sweep_medians(rows)
            series = {
                ch: np.array([summary[(ch, r)] for r in config.ratios]) for ch in dict.fromkeys(r["channel"] for r in rows)
            }
            write_lines(out / "sweep_xi.svg", np.array(config.ratios), series, title="median xi vs ratio")
    return rows


def write_sweep_report(path, rows):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for row in rows:
            w.writerow([_cell(row.get(c)) for c in SWEEP_COLUMNS])


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return io.FLOAT_FMT % v
    return str(v)


def read_sweep_report(path):
    path = Path(path)
    if not path.is_file():
        raise IngestionError(f"{path}: no such file")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SWEEP_COLUMNS:
            raise IngestionError(f"{path}: unexpected columns {reader.fieldnames}")
        rows = []
        for line, rec in enumerate(reader, start=2):
            try:
                row = {
                    "slice": int(rec["slice"]),
                    "ratio": float(rec["ratio"]),
                    "seed": int(rec["seed"]),
                    "channel": rec["channel"],
                    "error": rec["error"],
                }
                for c in SWEEP_COLUMNS[4:11]:
                    row[c] = float(rec[c]) if rec[c] != "" else None
            except ValueError as exc:
                raise IngestionError(f"{path}: row {line}: {exc}") from None
            rows.append(row)
    return rows


def sweep_medians(rows):
    """Median xi over seeds and slices per ``(channel, ratio)``; errors skipped."""
    groups = {}
    for r in rows:
        if r.get("error") or r.get("xi") is None:
            continue
        groups.setdefault((r["channel"], r["ratio"]), []).append(r["xi"])
    return {key: float(np.median(v)) for key, v in groups.items()}


def spectrum_report(coef_dir, sample_rate=None):
    """Amplitude spectrum and symmetry metrics for a saved coefficient set."""
    state, head = io.read_checkpoint(coef_dir)
    fs = sample_rate if sample_rate is not None else head.get("sample_rate")
    if fs is None:
        raise ConfigError("sample rate not recorded in checkpoint; pass --sample-rate", "sample_rate")
    spec = amplitude_spectrum(state.x_real, state.x_imag)
    freqs = spectrum_frequencies(state.shape[0], float(fs))
    names = head.get("channels") or [f"ch{i + 1}" for i in range(state.shape[1])]
    sym = {}
    for j, name in enumerate(names):
        try:
            rm, im = symmetry_mismatch(state.x_real[:, [j]], state.x_imag[:, [j]])
        except UndefinedMetricError:
            rm = im = None
        sym[name] = {"real_mismatch": rm, "imag_mismatch": im}
    return freqs, spec, names, sym
