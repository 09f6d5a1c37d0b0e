"""Command-line front end: measures | test | simulate | power-surface | accuracy.

Every run writes its outputs plus a `manifest.json` into the output
directory recording the command line, a digest of the resolved
configuration, the master seed, the thread count and the package version;
reruns with the same manifest fields reproduce byte-identical outputs.

Exit codes: 0 success, 1 usage error, 2 data/configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from . import jumptests as jt
from . import measures as ms_mod
from .evaluate import (accuracy_experiment, day_battery, panel_eta, power_surface,
                       thread_count)
from .jumptests import METHODS, TuningConfig
from .panel import IngestionError, Panel, load_intraday_csv
from .simulate import (ConstantIntensity, DgpConfig, HawkesIntensity, MirrorPrice,
                       NoiseConfig, PriceJumpLaw, SCENARIOS, StateDependentIntensity,
                       VolJumpLaw, scenario_config, simulate_sequence)

USAGE_ERROR = 1
DATA_ERROR = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with exit code 1."""

    def error(self, message):
        raise UsageError(message)


def _fmt(x) -> str:
    """Stable, compact cell formatting ('' for undefined values)."""
    if x is None:
        return ""
    if isinstance(x, float):
        if np.isnan(x):
            return ""
        return format(x, ".12g")
    return str(x)


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(c) for c in row) + "\n")


# --------------------------------------------------------------------------
# Configuration file handling
# --------------------------------------------------------------------------

def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as e:
        raise IngestionError(f"{path}: malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}")
    except OSError as e:
        raise IngestionError(f"cannot read config {path}: {e}")
    if not isinstance(cfg, dict):
        raise IngestionError(f"{path}: top-level JSON must be an object")
    return cfg


def _intensity_from_json(spec) -> object:
    if spec is None:
        return None
    kind = spec.get("kind")
    if kind in (None, "none"):
        return None
    if kind == "constant":
        return ConstantIntensity(delta0=spec["delta0"])
    if kind == "hawkes":
        return HawkesIntensity(alpha=spec["alpha"], beta=spec["beta"],
                               delta_inf=spec["delta_inf"],
                               beta_cross=spec.get("beta_cross", 0.0))
    if kind in ("state", "state-dependent"):
        return StateDependentIntensity(beta0=spec["beta0"], beta1=spec["beta1"])
    if kind == "mirror":
        return MirrorPrice()
    raise IngestionError(f"unknown intensity kind {kind!r}")


def _tuning_from_config(section: dict, args) -> TuningConfig:
    kw = dict(section)
    for sub, cls in (("asj", jt.AsjTuning), ("pz", jt.PzTuning), ("lm", jt.LmTuning),
                     ("abd", jt.AbdTuning), ("cpr", jt.CprTuning)):
        if sub in kw:
            kw[sub] = cls(**kw[sub])
    if getattr(args, "alpha", None) is not None:
        kw["alpha"] = args.alpha
    if getattr(args, "c_theta", None) is not None:
        kw["c_theta"] = args.c_theta
    return TuningConfig(**kw)


def _dgp_from_config(section: dict) -> DgpConfig:
    kw = dict(section)
    for key in ("p_intensity", "v_intensity"):
        if key in kw:
            kw[key] = _intensity_from_json(kw[key])
    if "p_jump" in kw:
        kw["p_jump"] = PriceJumpLaw(**kw["p_jump"])
    if "v_jump" in kw:
        kw["v_jump"] = VolJumpLaw(**kw["v_jump"])
    if kw.get("noise") is not None:
        kw["noise"] = NoiseConfig(**kw["noise"])
    return DgpConfig(**kw)


def _scenario_dgp(args, config: dict) -> DgpConfig:
    section = dict(config.get("dgp", {}))
    if getattr(args, "scenario", None):
        conv = section.pop("unit_convention", None)
        base = scenario_config(args.scenario, unit_convention=conv)
        if section:
            for key in ("p_intensity", "v_intensity"):
                if key in section:
                    section[key] = _intensity_from_json(section[key])
            if "p_jump" in section:
                section["p_jump"] = PriceJumpLaw(**section["p_jump"])
            if "v_jump" in section:
                section["v_jump"] = VolJumpLaw(**section["v_jump"])
            if section.get("noise") is not None:
                section["noise"] = NoiseConfig(**section["noise"])
            from dataclasses import replace
            base = replace(base, **section)
        return base
    return _dgp_from_config(section)


# --------------------------------------------------------------------------
# Manifest
# --------------------------------------------------------------------------

@dataclass
class RunManifest:
    command_line: str
    config_digest: str
    master_seed: Optional[int]
    threads: int
    version: str
    runtime_seconds: float
    outputs: list
    error: Optional[str] = None


def _digest(payload) -> str:
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def _write_manifest(out_dir: Path, manifest: RunManifest) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(asdict(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------

def _parse_methods(raw: Optional[str]) -> tuple[str, ...]:
    if not raw:
        return METHODS
    picked = tuple(m.strip().lower() for m in raw.split(",") if m.strip())
    bad = [m for m in picked if m not in METHODS]
    if bad:
        raise UsageError(f"unknown methods {','.join(bad)}; valid methods: {','.join(METHODS)}")
    return picked


def _day_labels(panel: Panel):
    return [d.label if d.label is not None else d.day_index for d in panel.days]


def _cmd_measures(args, config) -> list:
    tuning = _tuning_from_config(config.get("tuning", {}), args)
    panel = load_intraday_csv(args.input, grid=args.grid, pad_forward=args.pad_forward)
    r = panel.returns_matrix()
    spec = jt.cpr_threshold_spec(r, tuning)
    ms = ms_mod.measure_set(r, spec)
    header = ["day"] + list(ms_mod.MeasureSet.FIELDS) + ["m"]
    rows = []
    for i, label in enumerate(_day_labels(panel)):
        rows.append([label] + [float(getattr(ms, f)[i]) for f in ms_mod.MeasureSet.FIELDS] + [ms.m])
    out = Path(args.out)
    _write_csv(out, header, rows)
    return [str(out)]


def _cmd_test(args, config) -> list:
    tuning = _tuning_from_config(config.get("tuning", {}), args)
    methods = _parse_methods(args.methods)
    panel = load_intraday_csv(args.input, grid=args.grid, pad_forward=args.pad_forward)
    r = panel.returns_matrix()
    eta = None
    if any(m in ("pz2", "pz4") for m in methods):
        eta = panel_eta(panel.m, panel.t, tuning.pz.tau, args.seed)
    battery = day_battery(r, tuning, eta=eta, methods=methods)
    header = ["day", "method", "statistic", "tail", "indicator", "z", "log_magnitude", "sign"]
    rows = []
    labels = _day_labels(panel)
    for i, label in enumerate(labels):
        for m in methods:
            res = battery[m]
            rows.append([label, m.upper(), float(res.statistic[i]), jt.METHOD_TAIL[m],
                         int(res.indicator[i]), float(res.z[i]), float(res.log_magnitude[i]),
                         float(res.sign[i])])
    out = Path(args.out)
    _write_csv(out, header, rows)
    return [str(out)]


def _cmd_simulate(args, config) -> list:
    cfg = _scenario_dgp(args, config)
    panel = simulate_sequence(cfg, args.days, seed=args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    returns_path = out_dir / "returns.csv"
    rows = []
    for day in panel.days:
        for i, r in enumerate(day.returns, start=1):
            rows.append([day.day_index, i, float(r)])
    _write_csv(returns_path, ["day", "interval", "log_return"], rows)
    truth_path = out_dir / "truth.csv"
    trows = []
    for day in panel.days:
        g = day.truth
        trows.append([g.day_index, g.dn_p, g.z_p, g.dn_v, g.z_v, g.v_open, g.v_close,
                      g.delta_p, g.delta_v, g.jump_step if g.jump_step is not None else None])
    _write_csv(truth_path, ["day", "dn_p", "z_p", "dn_v", "z_v", "v_open", "v_close",
                            "delta_p", "delta_v", "jump_step"], trows)
    return [str(returns_path), str(truth_path)]


def _cmd_power_surface(args, config) -> list:
    tuning = _tuning_from_config(config.get("tuning", {}), args)
    cfg = _scenario_dgp(args, config)
    methods = _parse_methods(args.methods)
    section = config.get("power_surface", {})
    points = args.grid_points or section.get("grid_points", 11)
    reps = args.reps or section.get("reps", 200)
    zp = np.linspace(-10.0 * np.sqrt(cfg.theta), 10.0 * np.sqrt(cfg.theta), points)
    zv = np.linspace(0.0, 20.0 * cfg.theta, points)
    surface = power_surface(cfg, zp, zv, reps=reps, methods=methods, tuning=tuning,
                            seed=args.seed, threads=args.threads)
    out = Path(args.out)
    rows = []
    for m in methods:
        for i, p in enumerate(surface.zp_grid):
            for j, v in enumerate(surface.zv_grid):
                rows.append([m.upper(), float(p), float(v), float(surface.rates[m][i, j]), reps])
    _write_csv(out, ["method", "zp", "zv", "rate", "reps"], rows)
    outputs = [str(out)]
    if args.plot_data:
        for m in methods:
            mat_path = out.with_name(out.stem + f"_{m}.matrix")
            with open(mat_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(_fmt(len(surface.zv_grid)) + " "
                         + " ".join(_fmt(float(v)) for v in surface.zv_grid) + "\n")
                for i, p in enumerate(surface.zp_grid):
                    fh.write(_fmt(float(p)) + " "
                             + " ".join(_fmt(float(x)) for x in surface.rates[m][i]) + "\n")
            outputs.append(str(mat_path))
    return outputs


def _cmd_accuracy(args, config) -> list:
    tuning = _tuning_from_config(config.get("tuning", {}), args)
    methods = _parse_methods(args.methods)
    section = config.get("accuracy", {})
    reps = args.reps or section.get("reps", 200)
    days = args.days or section.get("days", 2000)
    cfg = _scenario_dgp(args, config) if (args.scenario or config.get("dgp")) else None
    report = accuracy_experiment(args.scenario or "H1", reps=reps, t_days=days,
                                 methods=methods, tuning=tuning, seed=args.seed,
                                 threads=args.threads, config=cfg)
    out = Path(args.out)
    rows = []
    for m in methods:
        acc = report.methods[m]
        rows.append([report.scenario, m.upper(), acc.dj_bar, acc.ndj_bar, acc.sde,
                     acc.mse, acc.mse_ge2, acc.mse_ge3, acc.scd_bar, report.reps])
    _write_csv(out, ["scenario", "method", "dj", "ndj", "sde", "mse", "mse_ge2",
                     "mse_ge3", "scd", "reps"], rows)
    return [str(out)]


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(prog="jumplab",
                     description="High-frequency price-jump tests, measures and Monte Carlo harness")
    parser.add_argument("--version", action="version", version=f"jumplab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=False, needs_out=True):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        p.add_argument("--threads", type=int, default=None,
                       help="worker count (default: JUMPLAB_THREADS or CPU count)")
        if needs_input:
            p.add_argument("--input", required=True, help="price CSV (date,time,price)")
            p.add_argument("--grid", type=int, required=True,
                           help="expected prices per day in the input file")
            p.add_argument("--pad-forward", action="store_true",
                           help="forward-fill days with missing interior prices")
        if needs_out:
            p.add_argument("--out", required=True, help="output path")

    p = sub.add_parser("measures", help="daily realized measures from a price CSV")
    common(p, needs_input=True)
    p.add_argument("--c-theta", type=float, default=None, help="CPR truncation multiple")
    p.set_defaults(func=_cmd_measures)

    p = sub.add_parser("test", help="daily jump tests from a price CSV")
    common(p, needs_input=True)
    p.add_argument("--methods", default=None, help=f"comma list from: {','.join(METHODS)}")
    p.add_argument("--alpha", type=float, default=None, help="daily significance level")
    p.add_argument("--c-theta", type=float, default=None, help="CPR truncation multiple")
    p.set_defaults(func=_cmd_test)

    p = sub.add_parser("simulate", help="simulate a scenario panel with ground truth")
    common(p)
    p.add_argument("--scenario", choices=list(SCENARIOS), help="stock scenario")
    p.add_argument("--days", type=int, default=2000, help="number of days")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("power-surface", help="single-day rejection rates over a jump-size grid")
    common(p)
    p.add_argument("--scenario", choices=list(SCENARIOS), help="base scenario for the diffusion")
    p.add_argument("--methods", default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--c-theta", type=float, default=None)
    p.add_argument("--grid-points", type=int, default=None, help="points per axis (default 11)")
    p.add_argument("--reps", type=int, default=None, help="replications per cell (default 200)")
    p.add_argument("--plot-data", action="store_true",
                   help="also write one gnuplot matrix file per method")
    p.set_defaults(func=_cmd_power_surface)

    p = sub.add_parser("accuracy", help="sequence-accuracy battery for a scenario")
    common(p)
    p.add_argument("--scenario", choices=list(SCENARIOS), default="H1")
    p.add_argument("--methods", default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--c-theta", type=float, default=None)
    p.add_argument("--reps", type=int, default=None, help="Monte Carlo replications (default 200)")
    p.add_argument("--days", type=int, default=None, help="days per replication (default 2000)")
    p.set_defaults(func=_cmd_accuracy)

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    start = time.time()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return USAGE_ERROR

    out_attr = getattr(args, "out", None)
    out_dir = Path(out_attr) if out_attr and not Path(out_attr).suffix else (
        Path(out_attr).parent if out_attr else Path("."))
    config_payload: dict = {}
    try:
        config = _load_config(args.config)
        config_payload = config
        outputs = args.func(args, config)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return USAGE_ERROR
    except (IngestionError, ValueError) as e:
        manifest = RunManifest(
            command_line="jumplab " + " ".join(argv),
            config_digest=_digest(config_payload),
            master_seed=getattr(args, "seed", None),
            threads=thread_count(getattr(args, "threads", None)),
            version=__version__,
            runtime_seconds=round(time.time() - start, 3),
            outputs=[],
            error=str(e),
        )
        try:
            _write_manifest(out_dir, manifest)
        except OSError:
            pass
        print(f"error: {e}", file=sys.stderr)
        return DATA_ERROR

    manifest = RunManifest(
        command_line="jumplab " + " ".join(argv),
        config_digest=_digest(config_payload),
        master_seed=getattr(args, "seed", None),
        threads=thread_count(getattr(args, "threads", None)),
        version=__version__,
        runtime_seconds=round(time.time() - start, 3),
        outputs=outputs,
    )
    _write_manifest(out_dir, manifest)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
