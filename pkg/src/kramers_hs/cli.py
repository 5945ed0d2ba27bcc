"""Command-line interface: slip | profile | sweep | verify | oracle."""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .dispersion import ModelParameters
from .errors import DomainError, KramersError

DIGITS = 12
DEFAULTS = {
    "gv": 1.0,
    "mu_max": 8.0,
    "x_max": 20.0,
    "nodes": 200,
    "tol": 1e-6,
    "jobs": 1,
    "format": None,
    "out": None,
    "ordinates": None,
}
PHYSICAL = ("pr", "d", "nu_star")
DIRECT = ("gamma", "omega")


def fmt(v):
    return f"{v:.{DIGITS}g}"


def _round(obj):
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(fmt(float(obj)))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def to_json(obj):
    return json.dumps(_round(obj), indent=2)


def to_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="kramers-hs", description=__doc__)
    sub = ap.add_subparsers(dest="mode", required=True)
    for mode in ("slip", "profile", "sweep", "verify", "oracle"):
        sp = sub.add_parser(mode)
        many = "+" if mode == "sweep" else None
        sp.add_argument("--gamma", type=float, nargs=many)
        sp.add_argument("--omega", type=float, nargs=many)
        sp.add_argument("--pr", type=float)
        sp.add_argument("--d", type=float)
        sp.add_argument("--nu-star", dest="nu_star", type=float)
        sp.add_argument("--gv", type=float)
        sp.add_argument("--mu-max", dest="mu_max", type=float)
        sp.add_argument("--x-max", dest="x_max", type=float)
        sp.add_argument("--nodes", type=int, help="number of x points in a profile")
        sp.add_argument("--ordinates", type=int, help="fixed discrete-ordinates order (oracle)")
        sp.add_argument("--tol", type=float)
        sp.add_argument("--jobs", type=int)
        sp.add_argument("--config", help="JSON file with the same keys; flags override it")
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--format", choices=("json", "csv"))
    return ap


def resolve_config(args) -> dict:
    cfg = dict(DEFAULTS)
    file_cfg = {}
    if args.config:
        with open(args.config) as fh:
            file_cfg = {k.replace("-", "_").lower(): v for k, v in json.load(fh).items()}
    flags = {k: v for k, v in vars(args).items() if v is not None and k not in ("config", "mode")}
    # a parameter form given on the command line replaces the file's form
    if any(k in flags for k in DIRECT + PHYSICAL):
        for k in DIRECT + PHYSICAL:
            file_cfg.pop(k, None)
    cfg.update(file_cfg)
    cfg.update(flags)
    cfg["mode"] = args.mode
    has_direct = any(cfg.get(k) is not None for k in DIRECT)
    has_phys = any(cfg.get(k) is not None for k in PHYSICAL)
    if has_direct and has_phys:
        raise DomainError("give either --gamma/--omega or --pr/--d/--nu-star, not both")
    if has_phys and not all(cfg.get(k) is not None for k in PHYSICAL):
        raise DomainError("--pr, --d and --nu-star must be given together")
    if not (has_direct or has_phys) and args.mode != "verify":
        raise DomainError("no parameters: give --gamma/--omega or --pr/--d/--nu-star")
    for key in ("tol", "mu_max", "x_max"):
        if not cfg[key] > 0:
            raise DomainError(f"{key} > 0 violated ({cfg[key]!r})")
    if cfg["nodes"] < 2 or cfg["jobs"] < 1:
        raise DomainError("nodes >= 2 and jobs >= 1 required")
    return cfg


def params_from(cfg) -> ModelParameters:
    if cfg.get("pr") is not None:
        return ModelParameters.from_physical(cfg["pr"], cfg["d"], cfg["nu_star"])
    gamma = cfg.get("gamma")
    omega = cfg.get("omega")
    if gamma is None:
        raise DomainError("--gamma is required")
    return ModelParameters(float(gamma), 0.0 if omega is None else float(omega))


# ---------------------------------------------------------------------------
# modes
# ---------------------------------------------------------------------------

def slip_record(p: ModelParameters, G_v=1.0, mu_max=8.0):
    from .slip import KramersProblem, KramersSolution, normalized_zeta

    sol = KramersSolution(KramersProblem(p, G_v, mu_max=mu_max))
    s, f = sol.slip, sol.factor
    m = f.moments
    return {
        "gamma": p.gamma,
        "omega": p.omega,
        "G_v": G_v,
        "mu0": f.mu0,
        "zeta": s.zeta,
        "zeta_normalized": normalized_zeta(s.zeta, p),
        "U_sl": s.U_sl,
        "moments": {
            "A": list(m.A), "B": list(m.B), "R": list(m.R),
            "p0": m.p0, "q0": m.q0, "p_m1": m.p_m1, "q_m1": m.q_m1,
        },
        "residues": {"alpha1": s.alpha1, "alpha0": s.alpha0, "alpha_m1": s.alpha_m1,
                     "beta_m1": s.beta_m1, "delta": s.delta},
    }


def _sweep_entry(args):
    gamma, omega, G_v, mu_max = args
    try:
        rec = slip_record(ModelParameters(gamma, omega), G_v, mu_max)
        rec["error"] = ""
    except KramersError as exc:
        rec = {"gamma": gamma, "omega": omega, "G_v": G_v, "mu0": float("nan"),
               "zeta": float("nan"), "zeta_normalized": float("nan"), "U_sl": float("nan"),
               "error": f"{type(exc).__name__}: {exc}"}
    return rec


def run_slip(cfg):
    rec = slip_record(params_from(cfg), cfg["gv"], cfg["mu_max"])
    if cfg["format"] == "csv":
        keys = ("gamma", "omega", "mu0", "zeta", "zeta_normalized", "U_sl")
        return to_csv(keys, [[rec[k] for k in keys]]), 0
    return to_json(rec) + "\n", 0


def run_profile(cfg):
    from .slip import KramersProblem, KramersSolution

    p = params_from(cfg)
    sol = KramersSolution(KramersProblem(p, cfg["gv"], mu_max=cfg["mu_max"]))
    x = np.linspace(0.0, cfg["x_max"], cfg["nodes"])
    prof = sol.field_profile(x)
    if cfg["format"] == "json":
        return to_json({"x": prof.x_nodes.tolist(), "U_y": prof.U_y.tolist(),
                        "Q_y": prof.Q_y.tolist(), "P_xy": prof.P_xy.tolist(),
                        "U_sl": sol.slip.U_sl, "wall_residual": prof.wall_residual}) + "\n", 0
    return to_csv(("x", "U_y", "Q_y", "P_xy"), prof.rows()), 0


def run_sweep(cfg):
    gammas = np.atleast_1d(cfg.get("gamma") if cfg.get("gamma") is not None else [])
    omegas = np.atleast_1d(cfg.get("omega") if cfg.get("omega") is not None else [0.0])
    if cfg.get("pr") is not None:
        p = params_from(cfg)
        gammas, omegas = [p.gamma], [p.omega]
    tasks = [(float(g), float(o), cfg["gv"], cfg["mu_max"]) for g, o in itertools.product(gammas, omegas)]
    if cfg["jobs"] > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg["jobs"]) as ex:
            recs = list(ex.map(_sweep_entry, tasks))
    else:
        recs = [_sweep_entry(t) for t in tasks]
    status = 0 if all(not r["error"] for r in recs) else 3
    if cfg["format"] == "json":
        return to_json(recs) + "\n", status
    keys = ("gamma", "omega", "mu0", "zeta", "zeta_normalized", "U_sl", "error")
    return to_csv(keys, [[r[k] for k in keys] for r in recs]), status


def run_verify(cfg):
    from .checks import run_all

    has_params = cfg.get("gamma") is not None or cfg.get("pr") is not None
    p = params_from(cfg) if has_params else ModelParameters(4 / 15, 0.0)
    results = run_all(p, cfg["gv"])
    if cfg["format"] == "json":
        out = to_json([{"check": r.name, "value": r.value, "tolerance": r.tolerance,
                        "passed": r.passed} for r in results]) + "\n"
    else:
        width = max(len(r.name) for r in results)
        lines = [f"{'check':<{width}}  {'value':>12}  {'tolerance':>9}  result"]
        for r in results:
            lines.append(f"{r.name:<{width}}  {r.value:12.4e}  {r.tolerance:9.1e}  "
                         f"{'PASS' if r.passed else 'FAIL'}")
        out = "\n".join(lines) + "\n"
    return out, 0 if all(r.passed for r in results) else 1


def run_oracle(cfg):
    from .oracle import OrdinateGrid, solve_halfspace
    from .slip import KramersProblem, KramersSolution

    p = params_from(cfg)
    grid = OrdinateGrid.build(cfg["ordinates"]) if cfg["ordinates"] else None
    orc = solve_halfspace(p, cfg["gv"], grid=grid, tol=cfg["tol"])
    ana = KramersSolution(KramersProblem(p, cfg["gv"], mu_max=cfg["mu_max"]))
    x = np.linspace(0.0, min(cfg["x_max"], 10.0), 41)
    Ua = ana.fields(x)[0]
    Uo = orc.modes.fields(x)[0]
    scale = np.abs(Ua).max()
    report = {
        "gamma": p.gamma,
        "omega": p.omega,
        "zeta_analytic": ana.slip.zeta,
        "zeta_oracle": orc.zeta_num,
        "relative_gap": abs(ana.slip.zeta - orc.zeta_num) / abs(ana.slip.zeta),
        "profile_sup_gap": float(np.abs(Ua - Uo).max() / scale) if scale else 0.0,
        "oracle_order": orc.history[-1][0],
        "oracle_history": [[n, u] for n, u in orc.history],
        "oracle_residual": orc.residual,
    }
    if cfg["format"] == "csv":
        keys = ("gamma", "omega", "zeta_analytic", "zeta_oracle", "relative_gap", "profile_sup_gap")
        return to_csv(keys, [[report[k] for k in keys]]), 0
    return to_json(report) + "\n", 0


MODES = {"slip": run_slip, "profile": run_profile, "sweep": run_sweep,
         "verify": run_verify, "oracle": run_oracle}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        text, status = MODES[args.mode](cfg)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KramersError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    if cfg["out"]:
        with open(cfg["out"], "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
