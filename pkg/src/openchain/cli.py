"""Command-line entry point: ``openchain <subcommand> --config cfg.json --out DIR``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .errors import ConfigError, InvalidArgumentError, NumericalError
from .experiments import ScenarioConfig, ScenarioResult, emit, load_config, run

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

_SUBCOMMANDS = {
    "steady-sweep": "steady-fidelity-vs-g",
    "timeseries": "exact-timeseries",
    "gc": "gc-vs-Tr",
    "gc-scan": "gc-vs-Tr",
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="openchain", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "steady-sweep": "fidelity of the local and global steady states versus g",
        "timeseries": "fidelity of each steady state with its exact evolution versus t",
        "gc": "critical coupling for a single (T_left, T_right)",
        "gc-scan": "critical coupling over every (T_left, T_right) pair",
    }
    for name, text in helps.items():
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", help="scenario JSON, or a .meta.json sidecar to re-run")
        s.add_argument("--out", help="output directory (overrides output.dir)")
        s.add_argument("--format", choices=("csv", "json"), help="data file format")
        s.add_argument("--svg", action="store_true", default=None, help="also write an SVG plot")
        s.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
        if name == "timeseries":
            s.add_argument("--which", choices=("local", "global", "both"))
    sub.add_parser("selftest", help="quick numerical consistency checks")
    return p


def _resolve(args) -> tuple[ScenarioConfig, str]:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    updates = {}
    if args.format:
        updates["output_format"] = args.format
    if args.svg:
        updates["svg"] = True
    if getattr(args, "which", None):
        updates["which"] = args.which
    if updates:
        cfg = replace(cfg, **updates)
    out = args.out or cfg.output_dir
    if not out:
        raise ConfigError("no output directory: pass --out or set output.dir")
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    return cfg, out


def _selftest() -> int:
    from .gaussian import fidelity, vacuum_state
    from .markov import global_generator, global_steady_analytic, lyapunov_residual, steady_state
    from .bath import SpectralDensity
    from .params import ChainParams

    j = SpectralDensity()
    checks = []
    chain = ChainParams(1.0, 0.3, 0.1)
    gen = global_generator(chain, j, j, 10.0, 1.0)
    c0 = steady_state(gen)
    ca = global_steady_analytic(chain, j, j, 10.0, 1.0)
    checks.append(("global steady state: Lyapunov vs closed form", np.max(np.abs(gen.to_site_basis(c0).cov - ca.cov)) < 1e-10))
    checks.append(("Lyapunov residual", lyapunov_residual(gen, c0.c1) < 1e-10))
    checks.append(("vacuum self-fidelity", abs(fidelity(vacuum_state(3), vacuum_state(3)) - 1) < 1e-12))
    ok = True
    for name, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'}  {name}")
        ok &= bool(passed)
    return EXIT_OK if ok else EXIT_NUMERICAL


def _report(result: ScenarioResult) -> None:
    if result.kind == "gc-vs-Tr":
        status = result.metadata["diagnostics"]["status"]
        for tl, tr, gc, st in zip(result.columns["T_l"], result.columns["T_r"], result.columns["g_c"], status):
            line = f"T_l={tl:g} T_r={tr:g} g_c={gc:.4f} ({st})"
            if st == "above-interval":
                line += " -- local approach better on the whole bracket; g_c is a lower bound"
            print(line, file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "selftest":
        try:
            return _selftest()
        except NumericalError as exc:
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
    try:
        cfg, out = _resolve(args)
        if args.command == "gc":
            if len(cfg.t_left) != 1 or len(cfg.t_right) != 1:
                raise ConfigError("gc needs a single T_left and T_right; use gc-scan for sweeps")
        result = run(_SUBCOMMANDS[args.command], cfg, jobs=args.jobs)
        _report(result)
        for path in emit(result, out, cfg.output_format, cfg.svg):
            print(path)
    except (ConfigError, InvalidArgumentError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
