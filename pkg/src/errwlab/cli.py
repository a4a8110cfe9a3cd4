"""Command-line front end.

Subcommands: simulate, sweep, urn, diagnose, oracle, calibrate.  Options
may come from flags or from an INI config file (flags win); unknown
config keys are rejected.  Exit codes: 0 success, 1 configuration error,
2 runtime failure.  All outputs are byte-deterministic given the same
master seed; figures are opt-in via --figures.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__, schemes
from .diagnostics import proof_series
from .experiments import (CalibrationConfig, CalibrationError,
                          DEFAULT_THRESHOLDS, Thresholds,
                          calibrate_best_effort, calibrate_thresholds,
                          phase_for, simulate_batch, sweep)
from .reporting import (BSTAR_COLUMNS, BSTAR_SUMMARY_COLUMNS, SWEEP_COLUMNS,
                        format_number, json_object, summary_record,
                        sweep_row, write_csv, write_jsonl)
from .schemes import table1_phase
from .urn import lemma_bound, sample_bstar
from .walk import StopRules, run as walk_run

OUTDIR_ENV = "ERRWLAB_OUTDIR"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


class ConfigError(Exception):
    """Bad flags, bad config file, or impossible parameters."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse usage errors to exit code 1
        raise ConfigError(message)


# Known config file layout: section -> {key: parser}.
_CONFIG_SCHEMA = {
    "scheme": {"name": str, "alpha": float, "rho": float, "epsilon": float},
    "run": {"horizon": int, "runs": int, "seed": int, "stop": str},
    "sweep": {"alphas": str, "rhos": str},
    "urn": {"gammas": str, "rhos": str, "ns": str, "samples": int,
            "method": str},
    "thresholds": {"window_fraction": float, "escape_fraction": float,
                   "min_drift": int},
    "output": {"dir": str},
}


def _load_config(path: Optional[str]) -> dict[str, dict[str, object]]:
    if path is None:
        return {}
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file {path!r} not found")
    out: dict[str, dict[str, object]] = {}
    for section in parser.sections():
        if section not in _CONFIG_SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        out[section] = {}
        for key, raw in parser.items(section):
            if key not in _CONFIG_SCHEMA[section]:
                raise ConfigError(f"unknown config key {key!r} in "
                                  f"section [{section}]")
            caster = _CONFIG_SCHEMA[section][key]
            try:
                out[section][key] = caster(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {section}.{key}: {exc}")
    return out


def _pick(flag, config: dict, section: str, key: str, default):
    """Flag beats config file beats default."""
    if flag is not None:
        return flag
    if section in config and key in config[section]:
        return config[section][key]
    return default


def _parse_float_list(text: str) -> list[float]:
    """Comma list or start:stop:step range (inclusive of the endpoint)."""
    text = text.strip()
    if ":" in text and "," not in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range {text!r} must be start:stop:step")
        start, stop, step_ = (float(p) for p in parts)
        if step_ <= 0:
            raise ConfigError("range step must be positive")
        count = int(round((stop - start) / step_)) + 1
        vals = [round(start + i * step_, 10) for i in range(count)]
        return [v for v in vals if v <= stop + 1e-9]
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}: {exc}")


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}: {exc}")


def _parse_stop(text: Optional[str]) -> Optional[StopRules]:
    """Stop spec: comma-joined 'escape:L', 'visits:N[@V]', 'return'."""
    if not text:
        return None
    escape = None
    vv = None
    vc = None
    on_return = False
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if token == "return":
            on_return = True
        elif token.startswith("escape:"):
            escape = int(token.split(":", 1)[1])
        elif token.startswith("visits:"):
            spec = token.split(":", 1)[1]
            if "@" in spec:
                count, vertex = spec.split("@", 1)
                vv, vc = int(vertex), int(count)
            else:
                vv, vc = 1, int(spec)
        else:
            raise ConfigError(f"unknown stop rule {token!r}")
    try:
        return StopRules(escape_level=escape, visits_vertex=vv,
                         visits_count=vc, stop_on_return=on_return)
    except ValueError as exc:
        raise ConfigError(str(exc))


def _resolve_scheme(args, config) -> schemes.Scheme:
    name = _pick(args.scheme, config, "scheme", "name", "power-dt")
    alpha = _pick(args.alpha, config, "scheme", "alpha", None)
    rho = _pick(args.rho, config, "scheme", "rho", None)
    epsilon = _pick(getattr(args, "epsilon", None), config, "scheme",
                    "epsilon", None)
    try:
        return schemes.preset(name, alpha=alpha, rho=rho, epsilon=epsilon)
    except schemes.SchemeError as exc:
        raise ConfigError(str(exc))


def _outdir(args, config) -> Path:
    out = _pick(getattr(args, "out_dir", None), config, "output", "dir",
                os.environ.get(OUTDIR_ENV, "."))
    return Path(out)


def _resolve_thresholds(args, config) -> Thresholds:
    if getattr(args, "thresholds", None):
        import json
        try:
            payload = json.loads(Path(args.thresholds).read_text())
            data = payload.get("thresholds", payload)
            return Thresholds(window_fraction=data["window_fraction"],
                              escape_fraction=data["escape_fraction"],
                              min_drift=int(data["min_drift"]))
        except (OSError, KeyError, ValueError) as exc:
            raise ConfigError(f"bad thresholds file: {exc}")
    wf = _pick(getattr(args, "window_fraction", None), config, "thresholds",
               "window_fraction", DEFAULT_THRESHOLDS.window_fraction)
    ef = _pick(getattr(args, "escape_fraction", None), config, "thresholds",
               "escape_fraction", DEFAULT_THRESHOLDS.escape_fraction)
    md = _pick(getattr(args, "min_drift", None), config, "thresholds",
               "min_drift", DEFAULT_THRESHOLDS.min_drift)
    try:
        return Thresholds(window_fraction=wf, escape_fraction=ef,
                          min_drift=int(md))
    except ValueError as exc:
        raise ConfigError(str(exc))


def _scheme_config(scheme: schemes.Scheme) -> dict:
    cfg: dict[str, object] = {"scheme": scheme.name}
    if isinstance(scheme, schemes.PowerLawDT):
        cfg["alpha"] = scheme.alpha
        cfg["rho"] = scheme.rho
    elif isinstance(scheme, schemes.PerturbedDT):
        cfg["alpha"] = scheme.base.alpha
        cfg["rho"] = scheme.base.rho
        cfg["epsilon"] = scheme.epsilon
    return cfg


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_simulate(args, config) -> int:
    scheme = _resolve_scheme(args, config)
    horizon = _pick(args.horizon, config, "run", "horizon", 1_000_000)
    runs = _pick(args.runs, config, "run", "runs", 1)
    seed = _pick(args.seed, config, "run", "seed", 0)
    stop = _parse_stop(_pick(args.stop, config, "run", "stop", None))
    thresholds = _resolve_thresholds(args, config)
    if horizon < 1:
        raise ConfigError(f"horizon must be at least 1, got {horizon}")
    if runs < 1:
        raise ConfigError(f"runs must be at least 1, got {runs}")
    outdir = _outdir(args, config)
    out = Path(args.out) if args.out else outdir / "simulate.jsonl"

    summaries = simulate_batch(scheme, horizon, runs, seed, stop_rules=stop,
                               window_fraction=thresholds.window_fraction)
    cfg = {**_scheme_config(scheme), "horizon": horizon, "runs": runs,
           "master_seed": seed, "stop": args.stop or "", "command": "simulate"}
    records = [summary_record(s) for s in summaries]
    counts = {"horizon": 0, "escape": 0, "visits": 0, "return": 0}
    for s in summaries:
        counts[s.stop_reason] += 1
    records.append([
        ("aggregate", True), ("runs", runs),
        ("stopped_horizon", counts["horizon"]),
        ("stopped_escape", counts["escape"]),
        ("stopped_visits", counts["visits"]),
        ("stopped_return", counts["return"]),
        ("visits_fraction", counts["visits"] / runs),
    ])
    write_jsonl(out, records, cfg)
    print(f"wrote {out} ({runs} runs)")
    print("stop reasons: "
          + " ".join(f"{k}={v}" for k, v in counts.items())
          + f"  visits_fraction={format_number(counts['visits'] / runs)}")

    if args.trajectory or args.diagnostics:
        stride = max(1, args.stride or 1)
        series_stride = max(1, args.stride or max(1, horizon // 65536))
        traj, feats = walk_run(scheme, horizon, stop, seed=seed,
                               run_index=args.dump_run,
                               pos_stride=stride if args.trajectory else 0,
                               series_stride=(series_stride
                                              if args.diagnostics else 0))
        dump_cfg = {**cfg, "run_index": args.dump_run, "stride": stride}
        if args.trajectory:
            rows = [(i * stride, int(p))
                    for i, p in enumerate(traj.positions)]
            write_csv(args.trajectory, ("step", "position"), rows, dump_cfg)
            print(f"wrote {args.trajectory}")
        if args.diagnostics:
            ser = feats.series
            rows = [(int(n), m, t, s) for n, m, t, s in
                    zip(ser.n, ser.M, ser.Theta, ser.S2)]
            write_csv(args.diagnostics, ("n", "M", "Theta", "S2"), rows,
                      {**dump_cfg, "stride": series_stride})
            print(f"wrote {args.diagnostics}")
    return EXIT_OK


def _cmd_sweep(args, config) -> int:
    alphas = _parse_float_list(_pick(args.alphas, config, "sweep", "alphas",
                                     "0.9"))
    rhos = _parse_float_list(_pick(args.rhos, config, "sweep", "rhos",
                                   "0.05,0.45,0.6,1.5"))
    runs = _pick(args.runs, config, "run", "runs", 100)
    horizon = _pick(args.horizon, config, "run", "horizon", 1_000_000)
    seed = _pick(args.seed, config, "run", "seed", 0)
    thresholds = _resolve_thresholds(args, config)
    for a in alphas:
        if not (0.5 < a <= 1.0):
            raise ConfigError(f"sweep alphas must lie in (1/2, 1], got {a}")
    if horizon < 1 or runs < 1:
        raise ConfigError("horizon and runs must be at least 1")
    outdir = _outdir(args, config)
    out = Path(args.out) if args.out else outdir / "sweep.csv"

    cells = sweep(alphas, rhos, runs, horizon, seed, thresholds)
    cfg = {"alphas": ",".join(map(format_number, alphas)),
           "rhos": ",".join(map(format_number, rhos)),
           "runs_per_cell": runs, "horizon": horizon, "master_seed": seed,
           "window_fraction": thresholds.window_fraction,
           "escape_fraction": thresholds.escape_fraction,
           "min_drift": thresholds.min_drift, "command": "sweep"}
    write_csv(out, SWEEP_COLUMNS, [sweep_row(c) for c in cells], cfg)
    print(f"wrote {out} ({len(cells)} cells)")
    for c in cells:
        print(f"  alpha={c.alpha} rho={c.rho}: R={c.frac_recurrent_like:.2f} "
              f"T={c.frac_transient_like:.2f} L={c.frac_localized_like:.2f} "
              f"theory={c.theory_label}")
    if args.figures:
        from . import plots
        fig_path = out.with_name(out.stem + "_phase.png")
        plots.phase_diagram(cells, fig_path)
        print(f"wrote {fig_path}")
    return EXIT_OK


def _cmd_urn(args, config) -> int:
    gammas = _parse_float_list(_pick(args.gammas, config, "urn", "gammas",
                                     "1.1,1.5"))
    rhos = _parse_float_list(_pick(args.rhos, config, "urn", "rhos",
                                   "0.3,0.5"))
    ns = _parse_int_list(_pick(args.ns, config, "urn", "ns", "10,100,1000"))
    samples = _pick(args.samples, config, "urn", "samples", 10_000)
    method = _pick(args.method, config, "urn", "method", "both")
    seed = _pick(args.seed, config, "run", "seed", 0)
    if method not in ("direct", "rubin", "both"):
        raise ConfigError(f"method must be direct, rubin or both, "
                          f"got {method!r}")
    if samples < 1:
        raise ConfigError("samples must be at least 1")
    for g in gammas:
        if g < 1.0:
            raise ConfigError(f"gamma must be at least 1, got {g}")
    for r in rhos:
        if r >= 1.0:
            raise ConfigError(f"the mean bound needs rho < 1, got {r}")
    outdir = _outdir(args, config)
    out = Path(args.out) if args.out else outdir / "bstar.csv"
    summary_out = (Path(args.summary_out) if args.summary_out
                   else out.with_name(out.stem + "_summary.csv"))

    methods = ("direct", "rubin") if method == "both" else (method,)
    cfg = {"gammas": ",".join(map(format_number, gammas)),
           "rhos": ",".join(map(format_number, rhos)),
           "ns": ",".join(map(str, ns)), "samples": samples,
           "method": method, "master_seed": seed, "command": "urn"}
    rows = []
    summary_rows = []
    cell_idx = 0
    for gamma in gammas:
        for rho in rhos:
            for n in ns:
                for mi, meth in enumerate(methods):
                    base = (cell_idx * 2 + mi) * samples
                    b, h, cens = sample_bstar(gamma, rho, n, samples, seed,
                                              method=meth, base_index=base)
                    if args.dump_samples:
                        for j in range(samples):
                            rows.append((gamma, rho, n, int(b[j]), int(h[j]),
                                         bool(cens[j])))
                    ok = ~cens
                    mean = float(b[ok].mean()) if ok.any() else math.nan
                    bound = lemma_bound(gamma, rho, n, 10.0)
                    summary_rows.append((gamma, rho, n, meth, samples, mean,
                                         bound, bool(mean <= bound),
                                         int(cens.sum())))
                cell_idx += 1
    if args.dump_samples:
        write_csv(out, BSTAR_COLUMNS, rows, cfg)
        print(f"wrote {out} ({len(rows)} samples)")
    write_csv(summary_out, BSTAR_SUMMARY_COLUMNS, summary_rows, cfg)
    print(f"wrote {summary_out}")
    for row in summary_rows:
        print(f"  gamma={row[0]} rho={row[1]} n={row[2]} [{row[3]}]: "
              f"mean={format_number(row[5])} bound={format_number(row[6])} "
              f"within={row[7]}")
    if args.figures:
        from . import plots
        fig_path = summary_out.with_name(summary_out.stem + ".png")
        plots.urn_bound_figure(summary_rows, fig_path)
        print(f"wrote {fig_path}")
    return EXIT_OK


def _cmd_diagnose(args, config) -> int:
    scheme = _resolve_scheme(args, config)
    horizon = _pick(args.horizon, config, "run", "horizon", 100_000)
    seed = _pick(args.seed, config, "run", "seed", 0)
    if horizon < 1:
        raise ConfigError("horizon must be at least 1")
    stride = args.series_stride or max(1, horizon // 65536)
    outdir = _outdir(args, config)
    outdir.mkdir(parents=True, exist_ok=True)

    traj, feats = walk_run(scheme, horizon, None, seed=seed,
                           run_index=args.run_index, series_stride=stride,
                           pos_stride=stride,
                           s2_tail_start=max(1, horizon // 10))
    cfg = {**_scheme_config(scheme), "horizon": horizon, "master_seed": seed,
           "run_index": args.run_index, "stride": stride,
           "command": "diagnose"}
    ser = feats.series
    diag_path = outdir / "diagnostics.csv"
    write_csv(diag_path, ("n", "M", "Theta", "S2"),
              [(int(n), m, t, s) for n, m, t, s in
               zip(ser.n, ser.M, ser.Theta, ser.S2)], cfg)
    n_path = outdir / "downcrossings.csv"
    write_csv(n_path, ("x", "N"),
              list(enumerate(int(v) for v in feats.N_pre_tau)), cfg)
    nu_path = outdir / "downcrossings_unconditional.csv"
    write_csv(nu_path, ("x", "N"),
              list(enumerate(int(v) for v in feats.N_all)), cfg)
    print(f"wrote {diag_path}, {n_path}, {nu_path}")
    print(f"steps={feats.steps} tau={feats.tau} M={format_number(feats.M)} "
          f"Theta={format_number(feats.Theta)} S2={format_number(feats.S2)} "
          f"S2_tail_fraction={format_number(feats.S2_tail_fraction)}")
    if isinstance(scheme, schemes.PowerLawDT):
        s1, s2 = proof_series(feats.N_pre_tau, scheme.alpha, scheme.rho)
        print(f"proof series over explored range: first={format_number(s1)} "
              f"second={format_number(s2)}")
    if args.figures:
        from . import plots
        fig_path = outdir / "traces.png"
        plots.diagnostics_figure(ser, fig_path, title=scheme.name)
        print(f"wrote {fig_path}")
    return EXIT_OK


def _cmd_oracle(args, config) -> int:
    did_something = False
    scheme = None
    if args.scheme or args.enumerate or args.stick:
        scheme = _resolve_scheme(args, config)
    if args.alpha is not None and args.rho is not None and not args.scheme:
        try:
            label = phase_for(args.alpha, args.rho)
        except (ValueError, schemes.SchemeError) as exc:
            raise ConfigError(str(exc))
        print(f"{label.phase.value} [{label.provenance}]")
        did_something = True
    elif args.scheme:
        label = table1_phase(scheme)
        print(f"{label.phase.value} [{label.provenance}]")
        did_something = True
    if args.enumerate:
        from .walk import enumerate_paths
        depth = args.enumerate
        if depth < 1 or depth > 20:
            raise ConfigError("enumeration depth must lie in 1..20")
        paths = enumerate_paths(scheme, depth)
        print("path,probability")
        for path, prob in paths:
            print("-".join(map(str, path)) + "," + format_number(prob))
        print(f"# total mass {format_number(sum(p for _, p in paths))}")
        if args.check_urn:
            if not isinstance(scheme, schemes.PowerLawDT):
                raise ConfigError("--check-urn needs a power-dt scheme")
            from .urn import enumerate_urn_paths
            urn_paths = dict(enumerate_urn_paths(scheme, depth))
            worst = max(abs(urn_paths[p] - pr) for p, pr in paths)
            print(f"# urn-generator max probability difference "
                  f"{format_number(worst)}")
        did_something = True
    if args.stick:
        parts = args.stick.split(":")
        if len(parts) != 2:
            raise ConfigError("--stick takes VERTEX:TERMS")
        x, terms = int(parts[0]), int(parts[1])
        value = schemes.stick_probability_lower_bound(scheme, x, terms)
        print(f"stick probability lower bound at x={x} with {terms} terms: "
              f"{format_number(value)}")
        did_something = True
    if not did_something:
        raise ConfigError("oracle needs --alpha/--rho, --scheme, "
                          "--enumerate or --stick")
    return EXIT_OK


def _cmd_calibrate(args, config) -> int:
    points = []
    spec = _pick(args.pilot, config, None, None, "0.9:0.05,0.9:0.6,0.9:1.5")
    for token in spec.split(","):
        token = token.strip()
        if not token:
            continue
        parts = token.split(":")
        if len(parts) != 2:
            raise ConfigError(f"pilot point {token!r} must be alpha:rho")
        points.append((float(parts[0]), float(parts[1])))
    if not points:
        raise ConfigError("the pilot set must not be empty")
    runs = _pick(args.runs, config, "run", "runs", 100)
    horizon = _pick(args.horizon, config, "run", "horizon", 1_000_000)
    seed = _pick(args.seed, config, "run", "seed", 20260809)
    try:
        cal_config = CalibrationConfig(points=tuple(points),
                                       runs_per_point=runs, horizon=horizon,
                                       master_seed=seed)
    except ValueError as exc:
        raise ConfigError(str(exc))
    outdir = _outdir(args, config)
    out = Path(args.out) if args.out else outdir / "thresholds.json"

    try:
        if args.best_effort:
            report = calibrate_best_effort(cal_config)
        else:
            report = calibrate_thresholds(cal_config)
    except CalibrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    payload = json_object([
        ("errwlab_version", __version__),
        ("thresholds", {
            "window_fraction": report.thresholds.window_fraction,
            "escape_fraction": report.thresholds.escape_fraction,
            "min_drift": report.thresholds.min_drift,
        }),
        ("min_agreement", report.min_agreement),
        ("mean_agreement", report.mean_agreement),
        ("passed", report.passed),
        ("per_point", {f"{a}:{r}": v
                       for (a, r), v in report.per_point.items()}),
        ("pilot", {"points": spec, "runs_per_point": runs,
                   "horizon": horizon, "master_seed": seed}),
    ])
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(payload + "\n", encoding="utf-8", newline="\n")
    print(f"wrote {out}")
    print(f"thresholds: window_fraction={report.thresholds.window_fraction} "
          f"escape_fraction={report.thresholds.escape_fraction} "
          f"min_drift={report.thresholds.min_drift}")
    print(f"pilot agreement: min={report.min_agreement:.3f} "
          f"mean={report.mean_agreement:.3f} passed={report.passed}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------

def _add_scheme_flags(p):
    p.add_argument("--scheme", help="preset name: power-dt, perturbed-dt, "
                   "davis-example, no-reinforcement (default power-dt)")
    p.add_argument("--alpha", type=float,
                   help="initial weight exponent (default 0.9; "
                        "1.2 for no-reinforcement)")
    p.add_argument("--rho", type=float,
                   help="reinforcement exponent (default 0.4)")
    p.add_argument("--epsilon", type=float,
                   help="perturbation size (default 0.1)")


def _add_threshold_flags(p):
    p.add_argument("--thresholds", help="thresholds JSON from calibrate")
    p.add_argument("--window-fraction", type=float, dest="window_fraction",
                   help=f"localization window as a fraction of the horizon "
                        f"(default {DEFAULT_THRESHOLDS.window_fraction})")
    p.add_argument("--escape-fraction", type=float, dest="escape_fraction",
                   help=f"no-return fraction for the transient rule "
                        f"(default {DEFAULT_THRESHOLDS.escape_fraction})")
    p.add_argument("--min-drift", type=int, dest="min_drift",
                   help=f"minimum final position for the transient rule "
                        f"(default {DEFAULT_THRESHOLDS.min_drift})")


def build_parser() -> _Parser:
    parser = _Parser(prog="errwlab",
                     description="simulation lab for edge-reinforced "
                                 "random walks on the half-line")
    parser.add_argument("--version", action="version",
                        version=f"errwlab {__version__}")
    parser.add_argument("--config", help="INI config file; flags override it")
    parser.add_argument("--out-dir", dest="out_dir",
                        help=f"output directory (default: ${OUTDIR_ENV} "
                             f"or the working directory)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="batch walk runs to JSON lines")
    _add_scheme_flags(p)
    _add_threshold_flags(p)
    p.add_argument("--horizon", type=int, help="steps per run (default 10^6)")
    p.add_argument("--runs", type=int, help="independent runs (default 1)")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--stop", help="e.g. escape:2,visits:10000 or "
                                  "visits:500@3,return (default none)")
    p.add_argument("--out", help="JSONL output path "
                                 "(default <outdir>/simulate.jsonl)")
    p.add_argument("--trajectory", help="CSV step,position dump of one run")
    p.add_argument("--diagnostics", help="CSV n,M,Theta,S2 dump of one run")
    p.add_argument("--dump-run", type=int, default=0, dest="dump_run",
                   help="run index for the dumps")
    p.add_argument("--stride", type=int, help="dump stride")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="(alpha, rho) phase-diagram sweep")
    _add_threshold_flags(p)
    p.add_argument("--alphas", help="comma list or start:stop:step "
                                    "(default 0.9)")
    p.add_argument("--rhos", help="comma list or start:stop:step "
                                  "(default 0.05,0.45,0.6,1.5)")
    p.add_argument("--runs", type=int,
                   help="runs per cell (default 100)")
    p.add_argument("--horizon", type=int, help="steps per run (default 10^6)")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--out", help="CSV output path "
                                 "(default <outdir>/sweep.csv)")
    p.add_argument("--figures", action="store_true",
                   help="render the phase diagram PNG next to the CSV")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("urn", help="urn hitting statistics and mean bound")
    p.add_argument("--gammas", help="black-side biases (default 1.1,1.5)")
    p.add_argument("--rhos", help="reinforcement exponents, each < 1 "
                                  "(default 0.3,0.5)")
    p.add_argument("--ns", help="target white counts (default 10,100,1000)")
    p.add_argument("--samples", type=int,
                   help="samples per cell (default 10000)")
    p.add_argument("--method", choices=("direct", "rubin", "both"),
                   help="sampling route (default both)")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--out", help="per-sample CSV path")
    p.add_argument("--summary-out", dest="summary_out",
                   help="summary CSV path")
    p.add_argument("--dump-samples", action="store_true", dest="dump_samples",
                   help="write every sample, not only the summary")
    p.add_argument("--figures", action="store_true")
    p.set_defaults(func=_cmd_urn)

    p = sub.add_parser("diagnose", help="single-run martingale diagnostics")
    _add_scheme_flags(p)
    p.add_argument("--horizon", type=int, help="steps (default 10^5)")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--run-index", type=int, default=0, dest="run_index",
                   help="run index within the seed (default 0)")
    p.add_argument("--series-stride", type=int, dest="series_stride",
                   help="series sampling stride "
                        "(default max(1, horizon/65536))")
    p.add_argument("--figures", action="store_true")
    p.set_defaults(func=_cmd_diagnose)

    p = sub.add_parser("oracle", help="phase oracles and exact enumeration")
    _add_scheme_flags(p)
    p.add_argument("--enumerate", type=int,
                   help="print the exact path table to this depth")
    p.add_argument("--check-urn", action="store_true", dest="check_urn",
                   help="cross-check the urn generator on the enumeration")
    p.add_argument("--stick", help="VERTEX:TERMS sticking-product bound")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("calibrate", help="grid-search classifier thresholds")
    p.add_argument("--pilot", help="comma list of alpha:rho pilot points "
                                   "(default 0.9:0.05,0.9:0.6,0.9:1.5)")
    p.add_argument("--runs", type=int,
                   help="runs per pilot point (default 100)")
    p.add_argument("--horizon", type=int, help="steps per run (default 10^6)")
    p.add_argument("--seed", type=int, help="master seed (default 20260809)")
    p.add_argument("--out", help="thresholds JSON path "
                                 "(default <outdir>/thresholds.json)")
    p.add_argument("--best-effort", action="store_true", dest="best_effort",
                   help="write the best thresholds even below the gate")
    p.set_defaults(func=_cmd_calibrate)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        config = _load_config(args.config)
        return args.func(args, config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # pragma: no cover - defensive
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
