"""Command-line interface: fit / eval / sweep / plot.

Exit codes: 0 on success, 2 on configuration or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench
from .discrete import fit_discrete
from .empirical import read_samples
from .merging import MergeConfig, PiecewiseHypothesis


class ConfigError(Exception):
    pass


def _load_config(path: Path) -> dict:
    text = path.read_bytes()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib  # py >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(text.decode())
    if path.suffix.lower() == ".json":
        return json.loads(text)
    raise ConfigError(f"config must be .toml or .json, got {path.suffix!r}")


def _density_from_arg(arg: str):
    if arg in bench.PRESETS:
        return bench.make_density(arg)
    p = Path(arg)
    if p.exists():
        return bench.make_density(json.loads(p.read_text()))
    raise ConfigError(f"unknown density preset or missing spec file: {arg}")


def cmd_fit(args) -> int:
    samples = read_samples(args.samples)
    if args.discrete is not None:
        t = bench.pieces_to_t(args.pieces, args.alpha)
        eps = args.epsilon or bench.auto_epsilon(samples.size, t, args.degree, args.alpha, args.delta)
        cfg = MergeConfig(t=t, epsilon=min(max(eps, 1e-9), 0.999), delta=args.delta,
                          alpha=args.alpha, degree=args.degree)
        h = fit_discrete(samples, args.discrete, cfg)
    else:
        if args.domain is not None:
            lo, hi = args.domain
            if samples.min() < lo or samples.max() > hi:
                raise ConfigError("samples fall outside the given domain")
        h, _ = bench.fit_once(
            samples,
            pieces=args.pieces,
            degree=args.degree,
            alpha=args.alpha,
            delta=args.delta,
            epsilon=args.epsilon,
            method=args.solver,
        )
    text = h.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def cmd_eval(args) -> int:
    h = PiecewiseHypothesis.from_json(Path(args.hypothesis).read_text())
    density = _density_from_arg(args.density)
    print(f"{bench.l1_error(h, density):.8e}")
    return 0


def cmd_sweep(args) -> int:
    config = _load_config(Path(args.config))
    if args.out:
        config["out"] = args.out
    if "n_grid" not in config:
        raise ConfigError("sweep config needs an n_grid list")
    result = bench.run_sweep(config)
    out = config.get("out")
    csv_text = result.to_csv()
    if out:
        Path(out).write_text(csv_text)
    else:
        sys.stdout.write(csv_text)
    figdir = args.figures or config.get("figures")
    if figdir:
        paths = bench.render_figures(result, figdir, label=str(config.get("label", "sweep")))
        for p in paths:
            print(f"wrote {p}", file=sys.stderr)
    return 0


def cmd_plot(args) -> int:
    import csv as _csv

    rows = []
    with open(args.csv) as fh:
        for r in _csv.DictReader(fh):
            rows.append(
                {
                    "n": int(r["n"]),
                    "seed": int(r["seed"]),
                    "pieces": int(r["pieces"]),
                    "degree": int(r["degree"]),
                    "fit_ms": float(r["fit_ms"]),
                    "l1_error": float(r["l1_error"]),
                }
            )
    if not rows:
        raise ConfigError(f"{args.csv}: no data rows")
    paths = bench.render_figures(bench.SweepResult(rows), args.outdir, label=Path(args.csv).stem)
    for p in paths:
        print(f"wrote {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pwdensity", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a piecewise hypothesis to a samples file")
    p.add_argument("samples", help="text file, one decimal per line")
    p.add_argument("--pieces", type=int, default=80, help="output piece budget (= 2*alpha*t)")
    p.add_argument("--degree", type=int, default=0)
    p.add_argument("--alpha", type=float, default=4.0)
    p.add_argument("--epsilon", type=float, default=None, help="accuracy; default derived from n")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--domain", type=float, nargs=2, metavar=("LO", "HI"), default=None)
    p.add_argument("--discrete", type=int, metavar="N", default=None, help="fit over the integers 1..N")
    p.add_argument("--solver", choices=("auto", "fast", "cutting-plane"), default="auto")
    p.add_argument("--out", default=None, help="write hypothesis JSON here (default stdout)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="L1 error of a hypothesis against a known density")
    p.add_argument("hypothesis", help="hypothesis JSON file")
    p.add_argument("--density", required=True, help="preset name or density spec JSON file")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="run an (n, seed) sweep from a TOML/JSON config")
    p.add_argument("config")
    p.add_argument("--out", default=None, help="CSV output path (overrides config)")
    p.add_argument("--figures", default=None, help="also render figures into this directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot", help="render figures from a sweep CSV")
    p.add_argument("csv")
    p.add_argument("--outdir", default="figures")
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
