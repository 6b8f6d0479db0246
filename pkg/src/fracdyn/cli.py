"""Command-line front end: reproducible, manifest-logged experiment runs.

Subcommands: integrate, stability, divergence, bifurcation, basin, hdelay.
Parameter precedence is flags > config file > built-in defaults; the config
file is a flat JSON object of named parameters.  A manifest written by a
previous run can itself be passed as the config file, which replays that
run and reproduces its data files byte for byte.

Exit codes: 0 success, 1 numerical or I/O failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__, output
from .solver import FractionalIVP, SolverConfig, abm_integrate, IntegrationError
from .hopfield import HnnParams, HnnField, find_equilibria
from .hopfield import hnn_jacobian
from .stability import eigenvalues_3x3, stability_index, fractional_divergence
from .analysis import (SweepSpec, PlaneSpec, bifurcation_sweep, basin_scan,
                       h_delay_study, classify_trajectory)

__all__ = ["main", "UsageError"]

SUBCOMMANDS = ("integrate", "stability", "divergence", "bifurcation",
               "basin", "hdelay")

_DEFAULT_W = HnnParams().W


class UsageError(Exception):
    """Invalid invocation: bad flag value, missing parameter, bad range."""


# ---------------------------------------------------------------------------
# parameter parsing

def parse_triple(text):
    parts = str(text).split(",")
    if len(parts) != 3:
        raise UsageError(f"expected three comma-separated numbers, got {text!r}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise UsageError(f"malformed number in {text!r}") from None


def parse_grid(text):
    """lo:hi:count -> (lo, hi, count)."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise UsageError(f"expected lo:hi:count, got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"malformed grid {text!r}") from None
    if count < 1:
        raise UsageError(f"grid needs at least one point, got {count}")
    if lo > hi:
        raise UsageError(f"grid range is empty: {lo} > {hi}")
    return lo, hi, count


def parse_float_list(text):
    try:
        return [float(p) for p in str(text).split(",") if p != ""]
    except ValueError:
        raise UsageError(f"malformed number list {text!r}") from None


def parse_ic_list(text):
    """Semicolon-separated comma triples -> [(ic_id, state), ...]."""
    groups = [g for g in str(text).split(";") if g != ""]
    if not groups:
        raise UsageError("empty initial-condition list")
    return [(f"ic{k}", parse_triple(g)) for k, g in enumerate(groups)]


def _to_float(raw):
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise UsageError(f"malformed number {raw!r}") from None


def _to_int(raw):
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise UsageError(f"malformed integer {raw!r}") from None


def _canonical(kind, raw):
    """Validate a raw flag/config value and normalize it for the manifest."""
    if kind == "float":
        return _to_float(raw)
    if kind == "int":
        return _to_int(raw)
    if kind == "str":
        return str(raw)
    if kind == "triple":
        if isinstance(raw, (list, tuple)):
            raw = ",".join(str(v) for v in raw)
        parse_triple(raw)
        return str(raw)
    if kind == "grid":
        parse_grid(raw)
        return str(raw)
    if kind == "floats":
        if isinstance(raw, (list, tuple)):
            raw = ",".join(str(v) for v in raw)
        parse_float_list(raw)
        return str(raw)
    if kind == "ics":
        parse_ic_list(raw)
        return str(raw)
    raise ValueError(f"unknown parameter kind {kind}")


_W_PARAMS = [(f"w{i}{j}", "float", float(_DEFAULT_W[i - 1, j - 1]))
             for i in (1, 2, 3) for j in (1, 2, 3)]

_COMMON = [("seed", "int", 0), ("jobs", "int", None)]

# name, kind, default (None marks an optional parameter)
PARAM_TABLE = {
    "integrate": [
        ("ic", "triple", "0.493,0.366,-3.267"),
        ("q", "float", 0.99975),
        ("h", "float", 0.01),
        ("T", "float", 1000.0),
        ("corrector_iterations", "int", 1),
    ] + _W_PARAMS + _COMMON,
    "stability": [
        ("q", "float", 0.99975),
    ] + _W_PARAMS + _COMMON,
    "divergence": [
        ("point", "triple", "0.1,0.1,0.1"),
        ("qgrid", "grid", "0.05:0.95:19"),
        ("taylor_order", "int", 5),
    ] + _W_PARAMS + _COMMON,
    "bifurcation": [
        ("param", "str", "q"),
        ("lo", "float", 0.997),
        ("hi", "float", 1.0),
        ("count", "int", 60),
        ("grid", "grid", None),
        ("q", "float", 0.99925),
        ("h", "float", 0.01),
        ("T", "float", 500.0),
        ("ics", "ics", "0.493,0.366,-3.267;0.001,0.001,0.001"),
        ("corrector_iterations", "int", 1),
    ] + _W_PARAMS + _COMMON,
    "basin": [
        ("q", "float", 0.99975),
        ("h", "float", 0.01),
        ("T", "float", 200.0),
        ("ugrid", "grid", "-5:5:40"),
        ("vgrid", "grid", "-5:5:40"),
    ] + _W_PARAMS + _COMMON,
    "hdelay": [
        ("hlist", "floats", "0.05,0.025,0.01"),
        ("lo", "float", 0.997),
        ("hi", "float", 1.0),
        ("count", "int", 60),
        ("grid", "grid", None),
        ("q", "float", 0.99925),
        ("T", "float", 500.0),
        ("ref_ics", "ics", "0.493,0.366,-3.267;0.001,0.001,0.001"),
        ("out_ics", "ics", "2,2,2;-2,-2,-2"),
    ] + _W_PARAMS + _COMMON,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fracdyn",
        description="Fractional-order Hopfield network experiments")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="subcommand")
    for name, params in PARAM_TABLE.items():
        sp = subs.add_parser(name)
        sp.add_argument("--config", default=None,
                        help="JSON parameter file or a manifest from a previous run")
        sp.add_argument("--out", default=None, help="output directory")
        for pname, _, _ in params:
            sp.add_argument("--" + pname.replace("_", "-"),
                            dest=pname, default=None)
    return parser


def load_config(path, subcommand):
    try:
        with open(path) as f:
            doc = json.load(f)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    if "parameters" in doc and isinstance(doc["parameters"], dict):
        # a manifest from a previous run; replay its resolved parameters
        if doc.get("subcommand") not in (None, subcommand):
            raise UsageError(f"manifest {path} was written by subcommand "
                             f"{doc.get('subcommand')!r}, not {subcommand!r}")
        return doc["parameters"]
    return doc


def resolve_parameters(subcommand, args, config):
    resolved = {}
    for name, kind, default in PARAM_TABLE[subcommand]:
        raw = getattr(args, name, None)
        if raw is None:
            raw = config.get(name, default)
        if raw is None:
            if name == "jobs":
                raw = os.cpu_count() or 1
            else:
                resolved[name] = None
                continue
        resolved[name] = _canonical(kind, raw)
    unknown = set(config) - {n for n, _, _ in PARAM_TABLE[subcommand]} - {"out"}
    if unknown:
        raise UsageError(f"unknown config parameters: {', '.join(sorted(unknown))}")
    return resolved


def _params_from(p):
    W = np.array([[p["w11"], p["w12"], p["w13"]],
                  [p["w21"], p["w22"], p["w23"]],
                  [p["w31"], p["w32"], p["w33"]]])
    return HnnParams(W=W)


def _sweep_from(p):
    if p.get("grid") is not None:
        lo, hi, count = parse_grid(p["grid"])
    else:
        lo, hi, count = p["lo"], p["hi"], p["count"]
    try:
        return SweepSpec(name=p.get("param", "q"), lo=lo, hi=hi, count=count)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------
# subcommand bodies; each returns the list of files written

def run_integrate(p, outdir):
    params = _params_from(p)
    try:
        ivp = FractionalIVP(3, p["q"], HnnField(params), parse_triple(p["ic"]))
        cfg = SolverConfig(h=p["h"], T=p["T"],
                           corrector_iterations=p["corrector_iterations"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    traj = abm_integrate(ivp, cfg)
    if not traj.completed:
        print(f"trajectory unbounded at step {traj.blowup_step}; "
              "writing the bounded prefix", file=sys.stderr)
    else:
        cls = classify_trajectory(traj)
        tag = f"NPT({cls.period_count})" if cls.kind == "npt" else cls.kind
        print(f"classification: {tag}, attractor sign {cls.attractor_sign}, "
              f"closing error {cls.closing_error:.3g}")
    path = os.path.join(outdir, "trajectory.csv")
    output.write_trajectory_csv(path, traj)
    return [path]


def run_stability(p, outdir):
    params = _params_from(p)
    q = p["q"]
    if not 0 < q < 1:
        raise UsageError(f"stability analysis needs q in (0,1), got {q}")
    rows = []
    for eq in find_equilibria(params):
        spec = eigenvalues_3x3(hnn_jacobian(eq.point, params))
        rep = stability_index(spec, q)
        alpha_min = float(np.min(np.abs(spec.arguments)))
        rows.append((eq.label, spec.eigenvalues, alpha_min,
                     rep.critical_order, rep.iota, rep.verdict))
    header = f"{'equilibrium':<12} {'eigenvalues':<44} {'alpha_min':>10} {'q*':>9} {'iota':>9}  verdict"
    print(header)
    for label, eigs, alpha_min, q_star, iota, verdict in rows:
        etxt = ", ".join(f"{ev.real:.4g}{ev.imag:+.4g}i" for ev in eigs)
        print(f"{label:<12} {etxt:<44} {alpha_min:>10.5f} {q_star:>9.5f} "
              f"{iota:>9.5f}  {verdict}")
    path = os.path.join(outdir, "stability.csv")
    output.write_stability_csv(path, rows)
    return [path]


def run_divergence(p, outdir):
    params = _params_from(p)
    lo, hi, count = parse_grid(p["qgrid"])
    qs = np.linspace(lo, hi, count)
    point = parse_triple(p["point"])
    try:
        values = [fractional_divergence(params, point, q=float(q),
                                        taylor_order=p["taylor_order"])
                  for q in qs]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    path = os.path.join(outdir, "divergence.csv")
    output.write_divergence_csv(path, qs, values)
    return [path]


def run_bifurcation(p, outdir):
    params = _params_from(p)
    sweep = _sweep_from(p)
    try:
        cfg = SolverConfig(h=p["h"], T=p["T"],
                           corrector_iterations=p["corrector_iterations"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    bd = bifurcation_sweep(params, sweep, parse_ic_list(p["ics"]), cfg,
                           q=p["q"], jobs=p["jobs"])
    path = os.path.join(outdir, "bifurcation.csv")
    output.write_bifurcation_csv(path, bd)
    return [path]


def run_basin(p, outdir):
    u_lo, u_hi, n_u = parse_grid(p["ugrid"])
    v_lo, v_hi, n_v = parse_grid(p["vgrid"])
    try:
        plane = PlaneSpec(u_lo=u_lo, u_hi=u_hi, v_lo=v_lo, v_hi=v_hi,
                          n_u=n_u, n_v=n_v)
        cfg = SolverConfig(h=p["h"], T=p["T"])
        if not 0 < p["q"] <= 1:
            raise ValueError(f"order must lie in (0, 1], got {p['q']}")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    bg = basin_scan(plane, cfg, p["q"], jobs=p["jobs"])
    csv_path = os.path.join(outdir, "basin.csv")
    pgm_path = os.path.join(outdir, "basin.pgm")
    output.write_basin_csv(csv_path, bg)
    output.write_basin_pgm(pgm_path, bg)
    return [csv_path, pgm_path]


def run_hdelay(p, outdir):
    params = _params_from(p)
    sweep = _sweep_from(p)
    hs = parse_float_list(p["hlist"])
    refs = [("ref" + chr(ord("a") + k), ic)
            for k, (_, ic) in enumerate(parse_ic_list(p["ref_ics"]))]
    outs = [("out" + chr(ord("a") + k), ic)
            for k, (_, ic) in enumerate(parse_ic_list(p["out_ics"]))]
    try:
        table = h_delay_study(params, sweep, hs, p["T"], reference_ics=refs,
                              outside_ics=outs, q=p["q"], jobs=p["jobs"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    path = os.path.join(outdir, "shift.csv")
    output.write_shift_csv(path, table)
    return [path]


RUNNERS = {
    "integrate": run_integrate,
    "stability": run_stability,
    "divergence": run_divergence,
    "bifurcation": run_bifurcation,
    "basin": run_basin,
    "hdelay": run_hdelay,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        return 2
    started = time.time()
    try:
        config = (load_config(args.config, args.subcommand)
                  if args.config else {})
        outdir = args.out or config.get("out") or "."
        p = resolve_parameters(args.subcommand, args, config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        os.makedirs(outdir, exist_ok=True)
        files = RUNNERS[args.subcommand](p, outdir)
        manifest_path = os.path.join(outdir, f"{args.subcommand}.manifest.json")
        output.write_manifest(manifest_path, args.subcommand,
                              dict(p, out=outdir), files,
                              time.time() - started, __version__)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
