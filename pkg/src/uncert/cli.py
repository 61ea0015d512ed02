"""Command-line harness: scenario configs in, CSV/JSON width reports out.

Subcommands:
  verify <config.json>   joint uncertainty-relation checks per generator
  widths --state <spec>  overall widths of a single state
  scan <config.json>     parameter-lattice sweep of width products

Exit codes: 0 all checks pass, 1 a relation check failed, 2 bad config/IO.
Reports are byte-stable: fixed column order, 6 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from itertools import product as iproduct
from pathlib import Path

from .grids import GridSpec, gaussian_measure, overall_width, point_mass, uniform_measure
from .metrology import (
    CalibrationConfig,
    ConfidencePair,
    bound_simple,
    bound_uffink,
    verify_joint_ur,
)
from .observables import PiecewiseLinearMap, WarpMap, WarpedMarginal
from .states import MixedState, box_state, gaussian_state, momentum_distribution, \
    position_distribution

REPORT_VERSION = "# uncert-report v1"
SCAN_CAP_DEFAULT = 10_000

REPORT_COLUMNS = [
    "scenario_id", "eps1", "eps2",
    "overall_q", "overall_p", "resolution_q", "resolution_p",
    "errorbar_q", "errorbar_q_spread", "errorbar_p", "errorbar_p_spread",
    "werner_q", "werner_p",
    "product_errorbar", "product_resolution",
    "bound_simple", "bound_uffink", "margin_simple", "margin_uffink",
    "passed",
]


class ConfigError(ValueError):
    pass


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isinf(x):
            return "inf"
        return f"{x:.5e}"
    return str(x)


# ---------------------------------------------------------------------------
# Config parsing (strict: unknown keys are errors)
# ---------------------------------------------------------------------------

def _require_keys(obj: dict, where: str, required: dict, optional: dict = {}):
    allowed = set(required) | set(optional)
    for k in obj:
        if k not in allowed:
            raise ConfigError(f"{where}: unknown key {k!r}")
    for k in required:
        if k not in obj:
            raise ConfigError(f"{where}: missing key {k!r}")
    out = dict(optional)
    out.update(obj)
    return out


def _parse_grid(obj, where="grid") -> GridSpec:
    g = _require_keys(obj, where, {"n": None, "x_min": None, "x_max": None})
    n = g["n"]
    if not isinstance(n, int) or n < 2 or (n & (n - 1)) != 0:
        raise ConfigError(f"{where}.n: must be a power of two >= 2, got {n!r}")
    if not g["x_max"] > g["x_min"]:
        raise ConfigError(f"{where}: x_max must exceed x_min")
    dx = (g["x_max"] - g["x_min"]) / n
    return GridSpec(float(g["x_min"]), dx, n)


def _parse_confidence(pairs, where="confidence"):
    out = []
    for i, pr in enumerate(pairs):
        if not (isinstance(pr, (list, tuple)) and len(pr) == 2):
            raise ConfigError(f"{where}[{i}]: expected a pair [eps1, eps2]")
        e1, e2 = float(pr[0]), float(pr[1])
        if not (0 < e1 < 1 and 0 < e2 < 1):
            raise ConfigError(f"{where}[{i}]: eps values must lie in (0, 1)")
        out.append(ConfidencePair(e1, e2))
    if not out:
        raise ConfigError(f"{where}: at least one pair required")
    return out


def _build_gaussian(spec, grid, hbar, where):
    s = _require_keys(spec, where, {"sigma": None}, {"x0": 0.0, "p0": 0.0})
    return gaussian_state(float(s["x0"]), float(s["p0"]), float(s["sigma"]), grid, hbar)


def _parse_generator(spec, grid, hbar, where) -> MixedState:
    if "kind" not in spec:
        raise ConfigError(f"{where}: missing key 'kind'")
    kind = spec["kind"]
    body = {k: v for k, v in spec.items() if k != "kind"}
    if kind == "gaussian":
        return MixedState.pure(_build_gaussian(body, grid, hbar, where))
    if kind == "mixture":
        m = _require_keys(body, where, {"components": None})
        comps = []
        for i, c in enumerate(m["components"]):
            cw = _require_keys(c, f"{where}.components[{i}]",
                               {"weight": None, "sigma": None}, {"x0": 0.0, "p0": 0.0})
            psi = gaussian_state(float(cw["x0"]), float(cw["p0"]),
                                 float(cw["sigma"]), grid, hbar)
            comps.append((float(cw["weight"]), psi))
        return MixedState(comps)
    raise ConfigError(f"{where}.kind: unknown generator kind {kind!r}")


def _parse_smearing(spec, grid, where):
    if "kind" not in spec:
        raise ConfigError(f"{where}: missing key 'kind'")
    kind = spec["kind"]
    body = {k: v for k, v in spec.items() if k != "kind"}
    if kind == "delta":
        s = _require_keys(body, where, {"c": None})
        return point_mass(float(s["c"]), grid)
    if kind == "gaussian":
        s = _require_keys(body, where, {"sigma": None}, {"mean": 0.0})
        return gaussian_measure(float(s["mean"]), float(s["sigma"]), grid)
    if kind == "uniform":
        s = _require_keys(body, where, {"a": None, "b": None})
        return uniform_measure(float(s["a"]), float(s["b"]), grid)
    raise ConfigError(f"{where}.kind: unknown smearing kind {kind!r}")


def _parse_warp(spec, grid, where) -> WarpMap:
    w = _require_keys(spec, where, {}, {"name": "warp", "q_knots": None, "p_knots": None})
    lo, hi = grid.x_min, grid.x_max

    def plm(knots, label):
        if knots is None:
            return PiecewiseLinearMap.identity(lo, hi)
        try:
            xs = [float(k[0]) for k in knots]
            ys = [float(k[1]) for k in knots]
            return PiecewiseLinearMap(tuple(xs), tuple(ys))
        except (TypeError, IndexError, ValueError) as exc:
            raise ConfigError(f"{where}.{label}: {exc}") from exc

    return WarpMap(plm(w["q_knots"], "q_knots"), plm(w["p_knots"], "p_knots"))


def _parse_calibration(obj, grid, hbar, where="calibration") -> CalibrationConfig:
    c = _require_keys(obj, where, {"delta_ladder": None},
                      {"probe_centers": [0.0], "probe_kind": "box"})
    ladder = tuple(float(d) for d in c["delta_ladder"])
    if any(d < 2 * grid.dx for d in ladder):
        raise ConfigError(f"{where}.delta_ladder: entries must be >= 2*dx = {2 * grid.dx}")
    try:
        return CalibrationConfig(ladder, tuple(float(x) for x in c["probe_centers"]),
                                 grid, hbar, c["probe_kind"])
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _report_row(rep) -> dict:
    return {
        "scenario_id": rep.scenario_id,
        "eps1": rep.eps.eps1, "eps2": rep.eps.eps2,
        "overall_q": rep.axis_q.overall, "overall_p": rep.axis_p.overall,
        "resolution_q": rep.axis_q.resolution, "resolution_p": rep.axis_p.resolution,
        "errorbar_q": rep.axis_q.error_bar, "errorbar_q_spread": rep.axis_q.error_bar_spread,
        "errorbar_p": rep.axis_p.error_bar, "errorbar_p_spread": rep.axis_p.error_bar_spread,
        "werner_q": rep.axis_q.werner, "werner_p": rep.axis_p.werner,
        "product_errorbar": rep.product_error_bar,
        "product_resolution": rep.product_resolution,
        "bound_simple": rep.bound_simple, "bound_uffink": rep.bound_uffink,
        "margin_simple": rep.margin_simple, "margin_uffink": rep.margin_uffink,
        "passed": rep.passed,
    }


def _write_reports(rows, out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "report.csv"
    with open(csv_path, "w", newline="") as fh:
        fh.write(REPORT_VERSION + "\n")
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in REPORT_COLUMNS])
    json_path = out_dir / "report.json"
    payload = [{c: (_fmt(row[c]) if isinstance(row[c], float) else row[c])
                for c in REPORT_COLUMNS} for row in rows]
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=False)
        fh.write("\n")
    return csv_path, json_path


def cmd_verify(args) -> int:
    cfg = json.loads(Path(args.config).read_text())
    top = _require_keys(cfg, "config",
                        {"grid": None, "confidence": None, "generators": None,
                         "calibration": None},
                        {"hbar": 1.0, "smearings": [], "warps": []})
    hbar = float(top["hbar"])
    if hbar <= 0:
        raise ConfigError("hbar: must be positive")
    grid = _parse_grid(top["grid"])
    eps_pairs = _parse_confidence(top["confidence"])
    calib = _parse_calibration(top["calibration"], grid, hbar)
    for i, sp in enumerate(top["smearings"]):  # validated; consumed by scan/widths flows
        _parse_smearing(sp, grid, f"smearings[{i}]")
    warps = [( _require_keys(w, f"warps[{i}]", {}, {"name": f"warp{i}",
                                                    "q_knots": None, "p_knots": None})["name"],
               _parse_warp(w, grid, f"warps[{i}]"))
             for i, w in enumerate(top["warps"])]

    rows = []
    for gi, gspec in enumerate(top["generators"]):
        gen = _parse_generator(gspec, grid, hbar, f"generators[{gi}]")
        for ei, eps in enumerate(eps_pairs):
            rep = verify_joint_ur(gen, eps, calib, scenario_id=f"gen{gi}-eps{ei}")
            if rep.note:
                rep_row = _report_row(rep)
                rep_row["scenario_id"] += f"({rep.note})"
                rows.append(rep_row)
            else:
                rows.append(_report_row(rep))
            for wname, wmap in warps:
                kq = WarpedMarginal(gen, "q", wmap)
                kp = WarpedMarginal(gen, "p", wmap)
                wrep = verify_joint_ur(gen, eps, calib,
                                       scenario_id=f"gen{gi}-{wname}-eps{ei}",
                                       kernels=(kq, kp))
                rows.append(_report_row(wrep))
    csv_path, json_path = _write_reports(rows, Path(args.out))
    all_pass = all(row["passed"] for row in rows)
    print(f"{len(rows)} scenario rows -> {csv_path}, {json_path}; "
          f"{'all passed' if all_pass else 'FAILURES present'}")
    return 0 if all_pass else 1


# ---------------------------------------------------------------------------
# widths
# ---------------------------------------------------------------------------

def _parse_state_spec(spec: str, grid: GridSpec, hbar: float) -> MixedState:
    head, _, rest = spec.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            k, _, v = item.partition("=")
            if not v:
                raise ConfigError(f"state spec: malformed parameter {item!r}")
            params[k.strip()] = float(v)
    known = {"gaussian": {"x0", "p0", "sigma"}, "box": {"center", "width"}}
    if head not in known:
        raise ConfigError(f"state spec: unknown state kind {head!r}")
    extra = set(params) - known[head]
    if extra:
        raise ConfigError(f"state spec: unknown parameters {sorted(extra)}")
    if head == "gaussian":
        return MixedState.pure(gaussian_state(
            params.get("x0", 0.0), params.get("p0", 0.0),
            params.get("sigma", 1.0), grid, hbar))
    return MixedState.pure(box_state(
        params.get("center", 0.0), params.get("width", 1.0), grid, hbar))


def cmd_widths(args) -> int:
    n = args.grid_n
    if n < 2 or (n & (n - 1)) != 0:
        raise ConfigError(f"--grid-n must be a power of two, got {n}")
    grid = GridSpec.symmetric(args.window, n)
    rho = _parse_state_spec(args.state, grid, args.hbar)
    parts = args.eps.split(",")
    e1 = float(parts[0])
    e2 = float(parts[1]) if len(parts) > 1 else e1
    eps = ConfidencePair(e1, e2)
    wq = overall_width(position_distribution(rho), eps.eps1)
    wp = overall_width(momentum_distribution(rho), eps.eps2)
    prod = wq * wp
    bs = bound_simple(eps, args.hbar)
    bu = bound_uffink(eps, args.hbar)
    slack = 4.0 * grid.dx * max(wq, wp)
    passed = prod >= bu - slack
    for label, val in [("width_q", wq), ("width_p", wp), ("product", prod),
                       ("bound_simple", bs), ("bound_uffink", bu),
                       ("ratio_uffink", prod / bu if bu > 0 else float("inf"))]:
        print(f"{label:14s} {_fmt(float(val))}")
    print(f"{'passed':14s} {_fmt(passed)}")
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# scan
# ---------------------------------------------------------------------------

def cmd_scan(args) -> int:
    cfg = json.loads(Path(args.config).read_text())
    top = _require_keys(cfg, "config",
                        {"grid": None, "eps": None, "family": None, "lattice": None},
                        {"hbar": 1.0, "cap": SCAN_CAP_DEFAULT})
    hbar = float(top["hbar"])
    grid = _parse_grid(top["grid"])
    if not (isinstance(top["eps"], (list, tuple)) and len(top["eps"]) == 2):
        raise ConfigError("eps: expected a pair [eps1, eps2]")
    eps = ConfidencePair(float(top["eps"][0]), float(top["eps"][1]))
    if top["family"] != "gaussian":
        raise ConfigError(f"family: unknown family {top['family']!r}")
    lattice = top["lattice"]
    if not isinstance(lattice, dict) or not lattice:
        raise ConfigError("lattice: expected a nonempty object of parameter lists")
    names = sorted(lattice)
    allowed = {"sigma", "x0", "p0"}
    for name in names:
        if name not in allowed:
            raise ConfigError(f"lattice.{name}: unknown parameter")
    if len(names) > 2:
        raise ConfigError("lattice: at most 2 parameters supported")
    values = [list(map(float, lattice[n])) for n in names]
    n_points = math.prod(len(v) for v in values)
    if n_points > int(top["cap"]):
        raise ConfigError(
            f"lattice has {n_points} points, above the cap {top['cap']}; coarsen it")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "scan.csv"
    cols = names + ["width_q", "width_p", "product", "bound_simple", "bound_uffink",
                    "ratio_uffink"]
    bs, bu = bound_simple(eps, hbar), bound_uffink(eps, hbar)
    with open(path, "w", newline="") as fh:
        fh.write(REPORT_VERSION + "\n")
        writer = csv.writer(fh)
        writer.writerow(cols)
        for combo in iproduct(*values):
            params = dict(zip(names, combo))
            rho = MixedState.pure(gaussian_state(
                params.get("x0", 0.0), params.get("p0", 0.0),
                params.get("sigma", 1.0), grid, hbar))
            wq = overall_width(position_distribution(rho), eps.eps1)
            wp = overall_width(momentum_distribution(rho), eps.eps2)
            prod = wq * wp
            writer.writerow([_fmt(float(v)) for v in combo] +
                            [_fmt(v) for v in (wq, wp, prod, bs, bu,
                                               prod / bu if bu > 0 else float("inf"))])
    print(f"{n_points} lattice rows -> {path}")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uncert",
                                 description="Joint-measurement uncertainty checks")
    ap.add_argument("--hbar", type=float, default=1.0)
    ap.add_argument("--out", default="./reports")
    ap.add_argument("--grid-n", type=int, default=4096)
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run joint-UR checks from a JSON config")
    v.add_argument("config")
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("widths", help="overall widths of one state")
    w.add_argument("--state", required=True,
                   help="e.g. gaussian:sigma=1 or box:width=1,center=0")
    w.add_argument("--eps", required=True, help="eps or eps1,eps2")
    w.add_argument("--window", type=float, default=40.0,
                   help="half-length of the symmetric grid window")
    w.set_defaults(func=cmd_widths)

    s = sub.add_parser("scan", help="parameter-lattice width sweep")
    s.add_argument("config")
    s.set_defaults(func=cmd_scan)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
