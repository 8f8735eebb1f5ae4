"""Command-line front end: sweeps, figure datasets, and reproducibility plumbing.

Every run writes a dataset (CSV or JSON) plus a manifest.json echoing the
fully resolved configuration into a run directory named by a hash of that
configuration, so a dataset can always be regenerated byte-identically.

Usage examples:

    plaqgate spectrum --dJ 0.2
    plaqgate prepare-plus --mode two_step
    plaqgate pert-coeffs --dJ 0.3
    plaqgate pert-fidelity --dJ-min 0.05 --dJ-max 0.95 --Jp 0.1 --n 1
    plaqgate pert-allowed --n 1 --m 1
    plaqgate pert-validate --dJ 0.3 --Jp 0.05
    plaqgate optctrl-liedim
    plaqgate optctrl-gradcheck --points 5
    plaqgate optctrl-optimize --seed 6 --restarts 1
    plaqgate optctrl-robustness --result runs/optctrl-optimize-issued/result.json
    plaqgate geophase-table --statistics both
    plaqgate geophase-dynamics --statistics boson --sector all
    plaqgate schwinger-check
    plaqgate hubbard-check --t-over-u 0.02 --statistics fermion
    plaqgate report --figure pertfid

Exit codes: 0 success, 2 bad flags or values, 3 numerical non-convergence.
The default output directory is $PLAQGATE_OUTPUT_DIR or ./runs.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import geophase, optctrl, pertgate, plaquette

ARTIFACT_VERSION = "1"
OUTPUT_ENV = "PLAQGATE_OUTPUT_DIR"

COMMAND_PARAMS = {
    "spectrum": {"j", "dJ"},
    "prepare-plus": {"mode", "angle_scale"},
    "pert-coeffs": {"dJ"},
    "pert-fidelity": {"dJ_min", "dJ_max", "dJ_step", "jp", "n", "m", "target"},
    "pert-allowed": {"n", "m"},
    "pert-validate": {"dJ", "jp", "horizon_tc"},
    "optctrl-optimize": {"l", "t_horizon", "restarts", "max_iter", "target_eps", "steps"},
    "optctrl-gradcheck": {"points", "steps", "fd_step"},
    "optctrl-robustness": {"result", "deltas"},
    "optctrl-liedim": set(),
    "geophase-table": {"statistics", "u_l_aa", "u_r_ab", "bias_surplus"},
    "geophase-dynamics": {"statistics", "sector", "u", "u_l_aa"},
    "schwinger-check": set(),
    "hubbard-check": {"t_over_u", "statistics"},
    "report": {"figure"},
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run description; unknown parameter keys are rejected."""

    command: str
    params: dict
    seed: int = 0
    output_dir: str = ""
    format: str = "csv"

    def __post_init__(self) -> None:
        if self.command not in COMMAND_PARAMS:
            raise ValueError(f"unknown command {self.command!r}")
        extra = set(self.params) - COMMAND_PARAMS[self.command]
        if extra:
            raise ValueError(f"unknown parameter keys for {self.command}: {sorted(extra)}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")

    def config_hash(self) -> str:
        payload = json.dumps(
            {
                "artifact_version": ARTIFACT_VERSION,
                "command": self.command,
                "params": {k: _jsonable(v) for k, v in sorted(self.params.items())},
                "seed": self.seed,
                "format": self.format,
            },
            sort_keys=True,
        )
        return hashlib.sha1(payload.encode()).hexdigest()[:8]

    def run_dir(self) -> str:
        return os.path.join(self.output_dir, f"{self.command}-{self.config_hash()}")


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


def _fmt_cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return str(v)


def sweep(point_fn, grid, workers: int = 1) -> list[dict]:
    """Evaluate point_fn over grid points; failures become flagged rows.

    Row order follows the grid regardless of worker count; each row merges
    the grid point with the function's result dict, or carries
    status="error: ..." when the point raised.
    """
    if not grid:
        raise ValueError("grid must be nonempty")

    def one(point: dict) -> dict:
        row = dict(point)
        try:
            row.update(point_fn(**point))
            row["status"] = "ok"
        except Exception as exc:  # flagged, run continues
            row["status"] = f"error: {type(exc).__name__}: {exc}"
        return row

    if workers <= 1:
        return [one(p) for p in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, grid))


def write_dataset(config: RunConfig, fieldnames, rows, extra=None) -> str:
    """Write dataset + manifest into the config's run directory; returns the dir."""
    run_dir = config.run_dir()
    os.makedirs(run_dir, exist_ok=True)
    if config.format == "csv":
        data_path = os.path.join(run_dir, "data.csv")
        with open(data_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(fieldnames)
            for row in rows:
                writer.writerow([_fmt_cell(row.get(k, "")) for k in fieldnames])
    else:
        data_path = os.path.join(run_dir, "data.json")
        payload = [{k: _jsonable(row.get(k)) for k in fieldnames} for row in rows]
        with open(data_path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    manifest = {
        "artifact_version": ARTIFACT_VERSION,
        "command": config.command,
        "params": {k: _jsonable(v) for k, v in sorted(config.params.items())},
        "seed": config.seed,
        "format": config.format,
        "config_hash": config.config_hash(),
        "dataset": os.path.basename(data_path),
        "fields": list(fieldnames),
        "rows": len(rows),
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(run_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return run_dir


def _is_complete(config: RunConfig) -> bool:
    path = os.path.join(config.run_dir(), "manifest.json")
    if not os.path.exists(path):
        return False
    try:
        with open(path) as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError):
        return False
    return (
        manifest.get("config_hash") == config.config_hash()
        and os.path.exists(os.path.join(config.run_dir(), manifest.get("dataset", "")))
    )


# ---------------------------------------------------------------------------
# Command handlers: each returns (fieldnames, rows, extra_manifest or None)
# ---------------------------------------------------------------------------

def _cmd_spectrum(config: RunConfig, args):
    j = config.params["j"]
    spec = plaquette.plaquette_spectrum(j, config.params["dJ"] * j)
    rows = [
        {"label": "singlet_low", "energy": spec.singlets[0], "multiplicity": 1},
        {"label": "triplet_diag", "energy": spec.triplets[0], "multiplicity": 3},
        {"label": "triplet_edge_a", "energy": spec.triplets[1], "multiplicity": 3},
        {"label": "triplet_edge_b", "energy": spec.triplets[2], "multiplicity": 3},
        {"label": "singlet_high", "energy": spec.singlets[1], "multiplicity": 1},
        {"label": "quintet", "energy": spec.quintet, "multiplicity": 5},
    ]
    return ["label", "energy", "multiplicity"], rows, None


def _cmd_prepare_plus(config: RunConfig, args):
    mode = config.params["mode"]
    state = plaquette.prepare_plus(mode=mode, angle_scale=config.params["angle_scale"])
    basis = plaquette.logical_basis()
    target = (basis.ket0 + basis.ket1) / np.sqrt(2.0)
    fid = float(abs(np.vdot(target, state)) ** 2)
    rows = [{"mode": mode, "angle_scale": config.params["angle_scale"], "fidelity": fid}]
    return ["mode", "angle_scale", "fidelity"], rows, None


def _cmd_pert_coeffs(config: RunConfig, args):
    r = config.params["dJ"]
    coeffs = pertgate.effective_coeffs(1.0, r)
    rows = [
        {
            "d_over_J": r,
            "lambda_z": coeffs.lambda_z,
            "gamma_z": coeffs.gamma_z,
            "delta_e": coeffs.delta_e,
        }
    ]
    return ["d_over_J", "lambda_z", "gamma_z", "delta_e"], rows, None


def _cmd_pert_fidelity(config: RunConfig, args):
    p = config.params
    d_values = np.round(
        np.arange(p["dJ_min"], p["dJ_max"] + 1e-12, p["dJ_step"]), 10
    )
    rows = pertgate.sweep(d_values, [p["jp"]], n=p["n"], m=p["m"], target=p["target"])
    return list(pertgate.SWEEP_FIELDS), rows, None


def _cmd_pert_allowed(config: RunConfig, args):
    n, m = config.params["n"], config.params["m"]
    ratios = pertgate.allowed_ratios(n, m)
    level = 0.125 + (2 * n - 1) / (16.0 * m)
    rows = [
        {
            "n": n,
            "m": m,
            "ratio": r,
            "lambda_z": pertgate.effective_coeffs(1.0, r).lambda_z,
            "residual": abs(pertgate.effective_coeffs(1.0, r).lambda_z - level),
        }
        for r in ratios
    ]
    return ["n", "m", "ratio", "lambda_z", "residual"], rows, None


def _cmd_pert_validate(config: RunConfig, args):
    p = config.params
    params = pertgate.PertParams(j=1.0, d=p["dJ"], jp=p["jp"])
    horizon = p["horizon_tc"] * pertgate.gate_time(params)
    dev = pertgate.validate_effective(params, horizon)
    rows = [
        {
            "d_over_J": p["dJ"],
            "Jp_over_J": p["jp"],
            "horizon": horizon,
            "max_deviation": dev,
        }
    ]
    return ["d_over_J", "Jp_over_J", "horizon", "max_deviation"], rows, None


def _cmd_optctrl_optimize(config: RunConfig, args):
    p = config.params
    result = optctrl.optimize(
        config.seed,
        n_harmonics=p["l"],
        t_horizon=p["t_horizon"],
        restarts=p["restarts"],
        max_iter=p["max_iter"],
        target_eps=p["target_eps"],
        steps=p["steps"],
    )
    pulse = optctrl.PulseParams(result.x_final, p["t_horizon"])
    run_dir = config.run_dir()
    os.makedirs(run_dir, exist_ok=True)
    optctrl.export_result_json(result, p["t_horizon"], os.path.join(run_dir, "result.json"))
    optctrl.export_pulse_csv(pulse, os.path.join(run_dir, "pulse.csv"))
    max_amp = pulse.max_amplitudes()
    rows = [
        {
            "seed": config.seed,
            "infidelity": result.infidelity,
            "iterations": result.iterations,
            "restarts_used": result.restarts_used,
            "gradient_norm": result.gradient_norm,
            "max_amplitude": float(max_amp.max()),
        }
    ]
    fields = ["seed", "infidelity", "iterations", "restarts_used", "gradient_norm", "max_amplitude"]
    return fields, rows, {"artifacts": ["result.json", "pulse.csv"]}


def _cmd_optctrl_gradcheck(config: RunConfig, args):
    p = config.params
    rng = np.random.default_rng(config.seed)
    rows = []
    worst = 0.0
    for k in range(p["points"]):
        x = optctrl._draw_start(rng, 20)
        err = optctrl.gradient_check(
            optctrl.PulseParams(x, 1.0), steps=p["steps"], fd_step=p["fd_step"]
        )
        worst = max(worst, err)
        rows.append({"point": k, "max_rel_error": err})
    if worst > 1e-5:
        raise RuntimeError(f"gradient check failed: worst relative error {worst:.2e}")
    return ["point", "max_rel_error"], rows, None


def _cmd_optctrl_robustness(config: RunConfig, args):
    p = config.params
    pulse, infid, seed = optctrl.load_result_json(p["result"])
    deltas = [float(d) for d in p["deltas"].split(",")]
    infs = optctrl.robustness_sweep(pulse, deltas)
    rows = [{"delta": d, "infidelity": i} for d, i in zip(deltas, infs)]
    return ["delta", "infidelity"], rows, {"source_infidelity": infid, "source_seed": seed}


def _cmd_optctrl_liedim(config: RunConfig, args):
    dim = optctrl.lie_closure_dimension(optctrl.control_operators().operators)
    print(dim)
    return ["dimension"], [{"dimension": dim}], None


def _geophase_params(u_l_aa: float, u_r_ab: float, bias_surplus: float) -> geophase.OnsiteParams:
    omega = max(20.0 * u_r_ab, 1.0)
    return geophase.OnsiteParams(
        mu_l=omega + bias_surplus,
        mu_r=0.0,
        omega=omega,
        u_l_aa=u_l_aa,
        u_r_aa=u_r_ab,
        u_r_bb=u_r_ab,
        u_r_ab=u_r_ab,
        t=1.0,
    )


def _cmd_geophase_table(config: RunConfig, args):
    p = config.params
    stats = ("boson", "fermion") if p["statistics"] == "both" else (p["statistics"],)
    fields = ["statistics", "n_L", "n_R_a", "j_R", "c0", "c1", "c2", "resonant"]
    rows = []
    for stat in stats:
        surplus = p["bias_surplus"]
        if surplus is None:
            surplus = 0.0 if stat == "boson" else p["u_r_ab"]
        params = _geophase_params(p["u_l_aa"], p["u_r_ab"], surplus)
        for e in geophase.resonance_table(params, stat):
            rows.append(
                {
                    "statistics": stat,
                    "n_L": e.config.n_l,
                    "n_R_a": e.config.n_r_a,
                    "j_R": e.config.j_r,
                    "c0": e.c0,
                    "c1": e.c1,
                    "c2": e.c2,
                    "resonant": e.resonant_at_bias,
                }
            )
    return fields, rows, None


def _cmd_geophase_dynamics(config: RunConfig, args):
    p = config.params
    stats = ("boson", "fermion") if p["statistics"] == "both" else (p["statistics"],)
    sectors = list(geophase.SECTORS) if p["sector"] == "all" else [p["sector"]]
    u = p["u"]
    u_l_aa = p["u_l_aa"] if p["u_l_aa"] is not None else 1.546 * u
    grid = [{"statistics": s, "sector": sec} for s in stats for sec in sectors]

    def point(statistics: str, sector: str) -> dict:
        surplus = 0.0 if statistics == "boson" else u
        params = _geophase_params(u_l_aa, u, surplus)
        t_ret, phase, leak = geophase.tunneling_phase(sector, params, statistics)
        return {"return_time": t_ret, "phase": phase, "leakage": leak}

    rows = sweep(point, grid, workers=getattr(args, "workers", 1))
    fields = ["statistics", "sector", "return_time", "phase", "leakage", "status"]
    return fields, rows, None


def _cmd_schwinger_check(config: RunConfig, args):
    residual = geophase.schwinger_identity_check(geophase.TwoBandFockSpace("boson"))
    print(residual)
    return ["residual"], [{"residual": residual}], None


def _cmd_hubbard_check(config: RunConfig, args):
    p = config.params
    rows = []
    for stat in ("boson", "fermion") if p["statistics"] == "both" else (p["statistics"],):
        gap, ref = plaquette.superexchange_hubbard_check(p["t_over_u"], 1.0, stat)
        rows.append(
            {
                "statistics": stat,
                "t_over_u": p["t_over_u"],
                "gap": gap,
                "four_t2_over_u": ref,
                "rel_error": abs(gap - ref) / ref,
            }
        )
    return ["statistics", "t_over_u", "gap", "four_t2_over_u", "rel_error"], rows, None


REPORT_FIGURES = {
    "pertfid": "Gate fidelity vs d/J at J'/J in {0.05, 0.1, 0.2} (columns: "
    + ", ".join(pertgate.SWEEP_FIELDS)
    + ")",
    "coeffs": "Effective coupling coefficients vs d/J (columns: d_over_J, lambda_z, gamma_z)",
    "allowed": "Allowed d/J ratios for small (n, m) (columns: n, m, ratio, lambda_z)",
}


def _cmd_report(config: RunConfig, args):
    figure = config.params["figure"]
    if figure == "pertfid":
        d_values = pertgate.default_sweep_grid()
        rows = pertgate.sweep(d_values, [0.05, 0.1, 0.2])
        fields = list(pertgate.SWEEP_FIELDS)
        gnuplot = (
            'set xlabel "d/J"\nset ylabel "F"\nset key bottom\n'
            "plot for [jp in \"0.05 0.1 0.2\"] 'data.csv' "
            'using 1:($2 == jp + 0 ? $6 : 1/0) every ::1 with lines title "J\'/J = ".jp\n'
        )
    elif figure == "coeffs":
        rows = []
        for r in pertgate.default_sweep_grid():
            c = pertgate.effective_coeffs(1.0, float(r))
            rows.append({"d_over_J": float(r), "lambda_z": c.lambda_z, "gamma_z": c.gamma_z})
        fields = ["d_over_J", "lambda_z", "gamma_z"]
        gnuplot = (
            'set xlabel "d/J"\n'
            "plot 'data.csv' using 1:2 every ::1 with lines title \"lambda_z\", "
            "'data.csv' using 1:3 every ::1 with lines title \"gamma_z\"\n"
        )
    elif figure == "allowed":
        rows = []
        for n, m in ((1, 1), (1, 2), (2, 1), (3, 4)):
            for r in pertgate.allowed_ratios(n, m):
                rows.append(
                    {"n": n, "m": m, "ratio": r, "lambda_z": pertgate.effective_coeffs(1.0, r).lambda_z}
                )
        fields = ["n", "m", "ratio", "lambda_z"]
        gnuplot = "plot 'data.csv' using 3:4 every ::1 with points title \"allowed ratios\"\n"
    else:
        raise ValueError(f"unknown figure {figure!r}; choose from {sorted(REPORT_FIGURES)}")
    run_dir = config.run_dir()
    os.makedirs(run_dir, exist_ok=True)
    with open(os.path.join(run_dir, "plot.gp"), "w") as fh:
        fh.write(gnuplot)
    return fields, rows, {"figure": figure, "schema": REPORT_FIGURES[figure], "artifacts": ["plot.gp"]}


HANDLERS = {
    "spectrum": _cmd_spectrum,
    "prepare-plus": _cmd_prepare_plus,
    "pert-coeffs": _cmd_pert_coeffs,
    "pert-fidelity": _cmd_pert_fidelity,
    "pert-allowed": _cmd_pert_allowed,
    "pert-validate": _cmd_pert_validate,
    "optctrl-optimize": _cmd_optctrl_optimize,
    "optctrl-gradcheck": _cmd_optctrl_gradcheck,
    "optctrl-robustness": _cmd_optctrl_robustness,
    "optctrl-liedim": _cmd_optctrl_liedim,
    "geophase-table": _cmd_geophase_table,
    "geophase-dynamics": _cmd_geophase_dynamics,
    "schwinger-check": _cmd_schwinger_check,
    "hubbard-check": _cmd_hubbard_check,
    "report": _cmd_report,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plaqgate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, **kwargs):
        sp = sub.add_parser(name, **kwargs)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--output-dir", default=os.environ.get(OUTPUT_ENV, "runs"))
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--force", action="store_true", help="recompute even if complete")
        sp.add_argument("--workers", type=int, default=1)
        return sp

    sp = add("spectrum", help="plaquette energy levels")
    sp.add_argument("--j", type=float, default=1.0)
    sp.add_argument("--dJ", type=float, required=True, help="diagonal ratio d/J")

    sp = add("prepare-plus", help="logical |+> preparation fidelity")
    sp.add_argument("--mode", choices=("two_step", "one_step"), default="two_step")
    sp.add_argument("--angle-scale", type=float, default=1.0)

    sp = add("pert-coeffs", help="effective coupling coefficients at one d/J")
    sp.add_argument("--dJ", type=float, required=True)

    sp = add("pert-fidelity", help="echo-gate fidelity sweep over d/J")
    sp.add_argument("--dJ-min", type=float, default=0.05)
    sp.add_argument("--dJ-max", type=float, default=0.95)
    sp.add_argument("--dJ-step", type=float, default=0.01)
    sp.add_argument("--Jp", type=float, required=True, help="coupling ratio J'/J")
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--target", choices=("effective", "corrected_cphase", "cphase_literal"),
                    default="effective")

    sp = add("pert-allowed", help="allowed d/J ratios for phase matching")
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--m", type=int, default=1)

    sp = add("pert-validate", help="full vs effective dynamics deviation")
    sp.add_argument("--dJ", type=float, required=True)
    sp.add_argument("--Jp", type=float, required=True)
    sp.add_argument("--horizon-tc", type=float, default=0.1, help="horizon as a fraction of t_c")

    sp = add("optctrl-optimize", help="pulse optimization for the 4-site gate")
    sp.add_argument("--L", type=int, default=20)
    sp.add_argument("--t-horizon", type=float, default=1.0)
    sp.add_argument("--restarts", type=int, default=10)
    sp.add_argument("--max-iter", type=int, default=2000)
    sp.add_argument("--target-eps", type=float, default=1e-7)
    sp.add_argument("--steps", type=int, default=400)

    sp = add("optctrl-gradcheck", help="analytic vs finite-difference gradient")
    sp.add_argument("--points", type=int, default=20)
    sp.add_argument("--steps", type=int, default=250)
    sp.add_argument("--fd-step", type=float, default=1e-6)

    sp = add("optctrl-robustness", help="infidelity under scaled Hamiltonian")
    sp.add_argument("--result", required=True, help="result.json from optctrl-optimize")
    sp.add_argument("--deltas", default="0,1e-5,1e-4,1e-3,1e-2,3e-2,1e-1")

    add("optctrl-liedim", help="dimension of the control Lie closure")

    sp = add("geophase-table", help="tunneling energy ledger")
    sp.add_argument("--statistics", choices=("boson", "fermion", "both"), default="both")
    sp.add_argument("--u-l-aa", type=float, default=77.3, help="in units of t")
    sp.add_argument("--u-r-ab", type=float, default=50.0, help="in units of t")
    sp.add_argument("--bias-surplus", type=float, default=None,
                    help="Delta - omega in units of t (default: resonant per statistics)")

    sp = add("geophase-dynamics", help="sector return phases")
    sp.add_argument("--statistics", choices=("boson", "fermion", "both"), default="both")
    sp.add_argument("--sector", choices=("SS", "ST", "TS", "TT", "all"), default="all")
    sp.add_argument("--u", type=float, default=50.0, help="interaction scale in units of t")
    sp.add_argument("--u-l-aa", type=float, default=None,
                    help="left repulsion in units of t (default 1.546 u, off accidental zeros)")

    add("schwinger-check", help="two-band spin identity residual")

    sp = add("hubbard-check", help="superexchange gap vs 4t^2/U")
    sp.add_argument("--t-over-u", type=float, default=0.02)
    sp.add_argument("--statistics", choices=("boson", "fermion", "both"), default="both")

    sp = add("report", help="figure-ready datasets")
    sp.add_argument("--figure", required=True, choices=sorted(REPORT_FIGURES))

    return parser


_ARG_KEYS = {
    "spectrum": {"j": "j", "dJ": "dJ"},
    "prepare-plus": {"mode": "mode", "angle_scale": "angle_scale"},
    "pert-coeffs": {"dJ": "dJ"},
    "pert-fidelity": {
        "dJ_min": "dJ_min",
        "dJ_max": "dJ_max",
        "dJ_step": "dJ_step",
        "jp": "Jp",
        "n": "n",
        "m": "m",
        "target": "target",
    },
    "pert-allowed": {"n": "n", "m": "m"},
    "pert-validate": {"dJ": "dJ", "jp": "Jp", "horizon_tc": "horizon_tc"},
    "optctrl-optimize": {
        "l": "L",
        "t_horizon": "t_horizon",
        "restarts": "restarts",
        "max_iter": "max_iter",
        "target_eps": "target_eps",
        "steps": "steps",
    },
    "optctrl-gradcheck": {"points": "points", "steps": "steps", "fd_step": "fd_step"},
    "optctrl-robustness": {"result": "result", "deltas": "deltas"},
    "optctrl-liedim": {},
    "geophase-table": {
        "statistics": "statistics",
        "u_l_aa": "u_l_aa",
        "u_r_ab": "u_r_ab",
        "bias_surplus": "bias_surplus",
    },
    "geophase-dynamics": {
        "statistics": "statistics",
        "sector": "sector",
        "u": "u",
        "u_l_aa": "u_l_aa",
    },
    "schwinger-check": {},
    "hubbard-check": {"t_over_u": "t_over_u", "statistics": "statistics"},
    "report": {"figure": "figure"},
}


def run(argv) -> int:
    """Parse argv, execute the subcommand, write dataset + manifest."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    params = {
        key: getattr(args, attr)
        for key, attr in _ARG_KEYS[args.command].items()
    }
    try:
        config = RunConfig(
            command=args.command,
            params=params,
            seed=args.seed,
            output_dir=args.output_dir,
            format=args.format,
        )
        if _is_complete(config) and not args.force:
            print(f"{config.run_dir()} already complete; use --force to recompute")
            return 0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fields, rows, extra = HANDLERS[args.command](config, args)
        run_dir = write_dataset(config, fields, rows, extra)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, ArithmeticError) as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return 3
    print(run_dir)
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
