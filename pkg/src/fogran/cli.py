"""Command-line entry point.

Subcommands: ``eval`` (one operating point), ``sweep`` (one parameter over a
grid or a figure preset), ``region-map`` (C-RAN vs F-RAN over d_c and v),
``validate`` (simulate every analytic value and apply 3-sigma checks) and
``cache`` (capacity-cache management).  Results go to stdout or ``--out`` as
CSV; ``--plot`` also renders a figure next to it.

Exit codes: 0 success, 2 configuration error, 3 validation failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .capacity import CapacityOracle
from .config import ConfigError, NetworkConfig, load_config
from .experiments import (PRESETS, REGION_PRESET, SWEEP_FIELDS, SweepResult, OraclePool, evaluate,
                          region_csv, region_map, run_sweep, validate)
from .fsmc import FsmcError

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION = 0, 2, 3
log = logging.getLogger("fogran")


def _floats(text: str) -> list[float]:
    """``"0,1,2"`` or ``"0:8"`` (inclusive integer range) or ``"10:200:10"``."""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1.0
        if step <= 0:
            raise argparse.ArgumentTypeError("range step must be positive")
        out, x = [], start
        while x <= stop + 1e-9 * abs(step):
            out.append(round(x, 12))
            x += step
        return out
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value list {text!r}") from None


def _add_config_args(p: argparse.ArgumentParser, seed_required: bool = False) -> None:
    p.add_argument("-c", "--config", help="INI file with [network] and [evaluation] sections")
    g = p.add_argument_group("overrides")
    g.add_argument("--k", type=int)
    g.add_argument("--d-e", dest="d_e", type=int)
    g.add_argument("--d-c", dest="d_c", type=int)
    g.add_argument("--eps", type=float)
    g.add_argument("--gamma-s", dest="gamma_s_db", type=float, help="direct SNR [dB]")
    g.add_argument("--gamma-i", dest="gamma_i_db", type=float, help="cross SNR [dB]")
    g.add_argument("--velocity", dest="velocity_kmh", type=float, help="km/h")
    g.add_argument("--carrier", dest="carrier_hz", type=float, help="Hz")
    g.add_argument("--slot", dest="slot_s", type=float, help="slot duration [s]")
    g.add_argument("--n-s", dest="n_s", type=int)
    g.add_argument("--n-i", dest="n_i", type=int)
    g.add_argument("--splits", type=lambda s: tuple(x.strip() for x in s.split(",") if x.strip()))
    g.add_argument("--antenna-mode", choices=["restricted", "full"])
    g.add_argument("--samples", dest="mc_samples", type=int, help="Monte Carlo phase draws")
    g.add_argument("--seed", type=int, required=seed_required)
    g.add_argument("--fran-exponent", choices=["1/K", "1/K^2"])
    g.add_argument("--horizon", type=int, help="simulated slots per point (0 = analytic only)")
    g.add_argument("--cache", help="capacity cache file (JSON lines)")


_OVERRIDES = ("k", "d_e", "d_c", "eps", "gamma_s_db", "gamma_i_db", "velocity_kmh", "carrier_hz",
              "slot_s", "n_s", "n_i", "splits", "antenna_mode", "mc_samples", "seed", "fran_exponent",
              "horizon", "cache")


def _config(args, preset: dict | None = None) -> NetworkConfig:
    cfg = load_config(args.config)
    if preset:
        cfg = cfg.replace(**preset)
    given = {k: getattr(args, k, None) for k in _OVERRIDES}
    return cfg.replace(**{k: v for k, v in given.items() if v is not None})


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def _plot_path(args) -> Path | None:
    if args.plot:
        return Path(args.plot)
    if args.out:
        return Path(args.out).with_suffix(".png")
    return None


def cmd_eval(args) -> int:
    cfg = _config(args)
    pool = OraclePool(cfg.cache)
    result = SweepResult("point", evaluate(cfg, pool, param=0.0))
    pool.save()
    _emit(result.to_csv(), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    preset = None
    if args.preset:
        preset, param, values = PRESETS[args.preset]
    else:
        if not args.param or args.values is None:
            raise ConfigError("sweep needs --preset or both --param and --values")
        param, values = args.param, args.values
    if args.param and args.preset:
        param = args.param
    if args.values is not None:
        values = args.values
    cfg = _config(args, preset)
    pool = OraclePool(cfg.cache)
    result = run_sweep(cfg, param, values, pool, progress=lambda m: log.info("evaluating %s", m))
    pool.save()
    _emit(result.to_csv(), args.out)
    plot = _plot_path(args)
    if plot is not None and not args.no_plot:
        from .plotting import plot_sweep
        plot_sweep(result, plot, title=args.preset)
        log.info("wrote %s", plot)
    return EXIT_OK


def cmd_region_map(args) -> int:
    preset, dcs, vs = REGION_PRESET
    cfg = _config(args, preset if args.preset else None)
    dcs = [int(x) for x in args.dc] if args.dc is not None else dcs
    vs = args.v if args.v is not None else vs
    pool = OraclePool(cfg.cache)
    cells = region_map(cfg, dcs, vs, pool)
    pool.save()
    _emit(region_csv(cells), args.out)
    plot = _plot_path(args)
    if plot is not None and not args.no_plot:
        from .plotting import plot_region_map
        plot_region_map(cells, plot)
        log.info("wrote %s", plot)
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _config(args)
    pool = OraclePool(cfg.cache)
    checks = validate(cfg, pool)
    pool.save()
    text = "".join(c.line() + "\n" for c in checks)
    _emit(text, args.out)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VALIDATION


def cmd_cache(args) -> int:
    cfg = _config(args)
    path = cfg.cache
    if not path:
        raise ConfigError("cache subcommand needs --cache or [evaluation] cache")
    oracle: CapacityOracle = cfg.make_oracle()
    if args.action == "clear":
        Path(path).unlink(missing_ok=True)
        print(f"removed {path}")
        return EXIT_OK
    loaded = oracle.load(path)
    if args.action == "build":
        cfg.scenario(oracle).bounds
        n = oracle.save(path)
        print(f"{path}: {n} entries ({loaded} loaded, {n - loaded} computed)")
    else:
        total = sum(1 for line in open(path) if line.strip()) if Path(path).exists() else 0
        print(f"{path}: {total} records, {loaded} matching seed={cfg.seed} samples={cfg.mc_samples}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fogran", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate one operating point")
    _add_config_args(p)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="sweep one parameter")
    _add_config_args(p)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--param", choices=sorted(SWEEP_FIELDS))
    p.add_argument("--values", type=_floats, help="comma list or start:stop[:step]")
    p.add_argument("-o", "--out")
    p.add_argument("--plot", help="figure path (defaults to the CSV path with .png)")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("region-map", help="C-RAN vs F-RAN winner over (d_c, v)")
    _add_config_args(p)
    p.add_argument("--preset", action="store_true", help="use the d_e=3, N=12, eps=0.01 setup")
    p.add_argument("--dc", type=_floats)
    p.add_argument("--v", type=_floats, help="velocities in km/h")
    p.add_argument("-o", "--out")
    p.add_argument("--plot")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_region_map)

    p = sub.add_parser("validate", help="check analytic values against simulation")
    _add_config_args(p, seed_required=True)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("cache", help="inspect, build or clear the capacity cache")
    _add_config_args(p)
    p.add_argument("action", choices=["stats", "build", "clear"])
    p.set_defaults(func=cmd_cache)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, FsmcError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
