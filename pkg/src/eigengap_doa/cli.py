"""Command line interface for maximal eigengap bearing estimation.

Subcommands::

    eigengap-doa synth    --config scenario.json --out DIR [--seed N]
    eigengap-doa estimate RECORDING.wav [--method M] [--norm l1|l2] [--scheme S] [--band LO:HI]
    eigengap-doa evaluate MANIFEST.csv [--config methods.json] [--out DIR]
    eigengap-doa sweep    --config scenario.json --out DIR [--kind snr|range]
                          [--values 0,10,20] [--seeds K] [--seed N]

Exit status is 0 on success, 1 on a usage error and 2 on a data error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .evaluation import (DEFAULT_METHODS, MethodConfig, evaluate, load_methods,
                         read_manifest, run_method)
from .exceptions import EigengapError
from .scenarios import Scenario, sweep, sweep_to_csv, synth_manifest
from .signal_model import load_record

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _band(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    return lo, hi


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="eigengap-doa",
                description="Maximal eigengap bearing estimation for two-channel recordings.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("synth", help="generate labeled recordings and a manifest")
    s.add_argument("--config", required=True, help="scenario JSON")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--seed", type=int, default=0)

    e = sub.add_parser("estimate", help="estimate the azimuth of one recording")
    e.add_argument("recording")
    e.add_argument("--config", help="methods JSON; its first method is used")
    e.add_argument("--method", choices=["eigengap", "covariance", "uniform"], default="eigengap")
    e.add_argument("--norm", choices=["l1", "l2"], default="l2")
    e.add_argument("--scheme", choices=["trace", "mineig", "none"], default="none")
    e.add_argument("--band", type=_band, default=None, help="analysis band LO:HI in Hz")

    v = sub.add_parser("evaluate", help="score methods against a manifest")
    v.add_argument("manifest")
    v.add_argument("--config", help="methods JSON")
    v.add_argument("--out", default=".", help="directory for report.json and report.csv")
    v.add_argument("--band", type=_band, default=None)

    w = sub.add_parser("sweep", help="long-format CSV over an SNR or range grid")
    w.add_argument("--config", required=True, help="scenario JSON (may hold a 'sweep' block)")
    w.add_argument("--out", required=True)
    w.add_argument("--seed", type=int, default=0, help="first seed")
    w.add_argument("--seeds", type=int, default=None, help="number of seeds")
    w.add_argument("--kind", choices=["snr", "range"], default=None)
    w.add_argument("--values", type=_floats, default=None)
    w.add_argument("--method", choices=["eigengap", "covariance", "uniform"], default=None,
                   help="restrict to one method (default: the benchmark methods plus uniform)")
    w.add_argument("--norm", choices=["l1", "l2"], default="l2")
    w.add_argument("--scheme", choices=["trace", "mineig", "none"], default="none")
    w.add_argument("--band", type=_band, default=None)
    return p


def _single_method(args) -> MethodConfig:
    band = args.band or (75.0, 300.0)
    if args.method == "covariance":
        return MethodConfig("covariance", band=band)
    if args.method == "uniform":
        return MethodConfig("uniform", scheme=args.scheme, band=band)
    return MethodConfig("eigengap", args.norm, args.scheme, band=band)


def _cmd_synth(args) -> int:
    scenario = Scenario.from_dict(_read_json(args.config))
    path = synth_manifest(scenario, args.out, args.seed)
    print(path)
    return EXIT_OK


def _cmd_estimate(args) -> int:
    if args.config:
        method = load_methods(_read_json(args.config))[0]
        if args.band:
            method = MethodConfig(method.method, method.norm, method.scheme, args.band,
                                  method.spectral)
    else:
        method = _single_method(args)
    est = run_method(load_record(args.recording), method)
    print(est.to_json())
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    methods = load_methods(_read_json(args.config)) if args.config else list(DEFAULT_METHODS)
    if args.band:
        methods = [MethodConfig(m.method, m.norm, m.scheme, args.band, m.spectral)
                   for m in methods]
    report = evaluate(read_manifest(args.manifest), methods)
    jpath, _ = report.write(args.out)
    print(jpath)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _read_json(args.config)
    block = cfg.get("sweep", {})
    scenario = Scenario.from_dict(cfg)
    kind = args.kind or block.get("kind", "snr")
    values = args.values if args.values is not None else block.get("values")
    if not values:
        raise UsageError("sweep needs --values or a 'sweep.values' entry in the config")
    n_seeds = args.seeds if args.seeds is not None else int(block.get("seeds", 10))
    if args.method:
        methods = [_single_method(args)]
    else:
        methods = load_methods(block.get("methods_config"))
        if args.band:
            methods = [MethodConfig(m.method, m.norm, m.scheme, args.band, m.spectral)
                       for m in methods]
    rows = sweep(scenario, kind, values, range(args.seed, args.seed + n_seeds), methods)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.csv"
    path.write_text(sweep_to_csv(rows))
    print(path)
    return EXIT_OK


_COMMANDS = {"synth": _cmd_synth, "estimate": _cmd_estimate,
             "evaluate": _cmd_evaluate, "sweep": _cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (EigengapError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"eigengap-doa: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
