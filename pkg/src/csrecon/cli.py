"""``csrecon`` command line.

Subcommands: generate, mask, reconstruct, sweep, spectrum, verify.
Exit codes: 0 ok, 1 sweep finished with failed cells, 2 configuration
error, 3 ingestion error, 4 numeric divergence.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io
from .exceptions import ConfigError, IngestionError, NumericError, ParameterError
from .experiment import (
    OUTPUT_ENV,
    load_config,
    load_input,
    run_reconstruct,
    run_sweep,
    spectrum_report,
)
from .sampling import generate_mask

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG, EXIT_INGEST, EXIT_DIVERGED = 0, 1, 2, 3, 4

LOG = logging.getLogger("csrecon")


def _ratios(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _add_experiment_args(p):
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--input", dest="input_csv", help="signal CSV (overrides config input)")
    p.add_argument("--sample-rate", type=float, help="sample rate for --input when no side-car")
    p.add_argument("--output-dir", help=f"output directory (default ${OUTPUT_ENV} or ./csrecon_out)")
    p.add_argument("--slice-len", type=int)
    p.add_argument("--mu", type=float)
    p.add_argument("--basis", choices=("fourier", "identity"))
    p.add_argument("--noise", type=float, help="white noise std as a fraction of channel RMS")
    p.add_argument("--channels", type=_ints, help="comma-separated channel indices")
    p.add_argument("--slices", type=_ints, help="comma-separated slice indices")
    p.add_argument("--shared-mask", action="store_true", default=None)
    p.add_argument("--svg", action="store_true", default=None, help="also write SVG line plots")


def _overrides(args, **extra):
    over = {
        "output_dir": args.output_dir,
        "slice_len": args.slice_len,
        "mu": args.mu,
        "basis": args.basis,
        "noise": args.noise,
        "channels": args.channels,
        "slices": args.slices,
        "shared_mask": args.shared_mask,
        "svg": args.svg,
    }
    if args.input_csv:
        inp = {"csv": args.input_csv}
        if args.sample_rate:
            inp["sample_rate"] = args.sample_rate
        over["input"] = inp
    over.update(extra)
    return over


def _config(args, **extra):
    return load_config(args.config, _overrides(args, **extra))


def cmd_generate(args):
    cfg = load_config(args.config, {"output_dir": args.output_dir})
    if "synthetic" not in cfg.input:
        raise ConfigError("generate needs a synthetic input spec", "input")
    sig = load_input(cfg)
    out = Path(args.out) if args.out else Path(cfg.output_dir) / "signal.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    io.write_signal(out, sig)
    print(f"wrote {out} ({sig.n} x {sig.k})")
    return EXIT_OK


def cmd_mask(args):
    if args.like:
        sig = io.read_signal(args.like, args.sample_rate)
        n, k = sig.n, sig.k
    elif args.n and args.k:
        n, k = args.n, args.k
    else:
        raise ConfigError("give --n and --k, or --like SIGNAL.csv", "mask")
    try:
        mask = generate_mask(n, k, args.ratio, args.seed, shared=args.shared)
    except ParameterError as exc:
        raise ConfigError(str(exc), "ratio") from None
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    io.write_mask(out, mask)
    print(f"wrote {out} ({n} x {k}, ratio {args.ratio}, seed {args.seed})")
    return EXIT_OK


def cmd_reconstruct(args):
    extra = {}
    if args.ratio is not None:
        extra["ratios"] = [args.ratio]
    if args.seed is not None:
        extra["seeds"] = [args.seed]
    if args.snapshots:
        extra["snapshot_epochs"] = args.snapshots
    cfg = _config(args, **extra)
    report = run_reconstruct(cfg)
    for s in report["slices"]:
        xi = ", ".join(f"{c}={v:.4f}" if v is not None else f"{c}=nan" for c, v in s["xi"].items())
        print(f"slice {s['index']}: effective ratio {s['effective_ratio']:.3f}; xi {xi}")
    print(f"wrote {Path(cfg.output_dir) / 'report.json'}")
    return EXIT_OK


def cmd_sweep(args):
    extra = {}
    if args.ratios:
        extra["ratios"] = args.ratios
    if args.seeds:
        extra["seeds"] = args.seeds
    if args.workers:
        extra["max_workers"] = args.workers
    cfg = _config(args, **extra)
    rows = run_sweep(cfg)
    failed = sum(1 for r in rows if r.get("error"))
    print(f"wrote {Path(cfg.output_dir) / 'sweep_report.csv'} ({len(rows)} rows, {failed} failed)")
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_spectrum(args):
    freqs, spec, names, sym = spectrum_report(args.coefficients, args.sample_rate)
    out = Path(args.out) if args.out else Path(args.coefficients) / "spectrum.csv"
    io.write_matrix(out, [[f, *row] for f, row in zip(freqs, spec)], header=["freq_hz", *names])
    sym_path = out.with_name(out.stem + "_symmetry.json")
    sym_path.write_text(json.dumps(sym, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {out} and {sym_path}")
    return EXIT_OK


def cmd_verify(args):
    from .verify import run_checks

    return EXIT_OK if run_checks() else EXIT_PARTIAL


def build_parser():
    parser = argparse.ArgumentParser(prog="csrecon", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic multi-sinusoid signal")
    p.add_argument("--config")
    p.add_argument("--output-dir")
    p.add_argument("--out", help="signal CSV path (default OUTPUT_DIR/signal.csv)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("mask", help="write a Bernoulli sampling mask")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--like", help="take N and K from a signal CSV")
    p.add_argument("--sample-rate", type=float)
    p.add_argument("--ratio", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shared", action="store_true", help="same mask for every channel")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("reconstruct", help="mask, train and reconstruct each slice")
    _add_experiment_args(p)
    p.add_argument("--ratio", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--snapshots", type=_ints, help="epochs at which to save reconstructions")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("sweep", help="reconstruct over ratios x seeds x slices")
    _add_experiment_args(p)
    p.add_argument("--ratios", type=_ratios)
    p.add_argument("--seeds", type=_ints)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spectrum", help="amplitude spectrum of saved coefficients")
    p.add_argument("coefficients", help="coefficient checkpoint directory")
    p.add_argument("--sample-rate", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify", help="run the numerical self-checks")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IngestionError as exc:
        print(f"ingestion error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except NumericError as exc:
        print(f"numeric divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
