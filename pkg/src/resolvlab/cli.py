"""Batch front end: config in, JSON report and CSV/binary artifacts out.

    resolvlab <command> --config cfg [--out DIR] [--seed N] [--threads N]
                        [--tol-override KEY=VAL ...]

Commands: solve, verify-symbols, scan-nab, rbound, evolve, bent.
Every run writes report.json with {command, configHash, gitDescribe,
wallTime, verdicts, ...}; exit status is 0 when all verdicts pass,
2 on configuration errors, 3 on numerical failures, 4 on verdict
failures.  Identical config + seed reproduce report.json byte for byte
except for the wallTime field.
"""

from __future__ import annotations

import argparse
import math
import os
import subprocess
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import bent as bent_mod
from . import evolution, fieldio, scans, verification
from .config import ConfigError, RunConfig, canonical_json, config_hash, parse_config
from .grids import BoundaryField, HalfSpaceField
from .halfspace import ResolventData, SolverError, solve_full_resolvent
from .regions import DegenerateCaseError, RegionError
from .symbols import BranchError, NearSingularError, SingularSymbolError

NUMERICAL_ERRORS = (SolverError, RegionError, DegenerateCaseError, BranchError,
                    NearSingularError, SingularSymbolError, scans.ScanError,
                    evolution.ContourError, bent_mod.DivergenceError,
                    bent_mod.GeometryError, np.linalg.LinAlgError)


def ordered_map(fn, items, threads):
    """Index-ordered map over a worker pool; results independent of threads."""
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def git_describe():
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"],
                             capture_output=True, text=True, timeout=10,
                             cwd=os.path.dirname(os.path.abspath(__file__)))
        return out.stdout.strip() or "unknown"
    except Exception:
        return "unknown"


def _tol(cfg: RunConfig, key: str, default: float) -> float:
    return float(cfg.tolerances.get(key, default))


def _builtin_gaussian_data(tg, ng, block):
    amp = float(block.get("amplitude", 1.0))
    wx = float(block.get("width", 1.0))
    x = tg.x
    t = ng.nodes

    def bump(w_x, w_t, x0):
        return (amp * np.exp(-((x - x0) ** 2) / (2 * w_x**2))[:, None]
                * np.exp(-(t**2) / (2 * w_t**2))[None, :])

    d = HalfSpaceField((0.5 * bump(wx, 2.0, 0.5))[..., None].astype(complex), tg, ng)
    F = HalfSpaceField(np.stack([bump(wx, 1.5, -0.4), 0.7 * bump(0.9 * wx, 2.5, 0.4)],
                                axis=-1).astype(complex), tg, ng)
    gb = amp * np.exp(-(x**2) / (2 * wx**2))
    G = BoundaryField(np.stack([0.3 * gb, -0.6 * gb], axis=-1).astype(complex), tg)
    K = BoundaryField((0.8 * amp * np.exp(-((x - 0.3) ** 2) / (2 * wx**2)))
                      .astype(complex), tg)
    return ResolventData(d=d, F=F, G=G, K=K)


# ---------------------------------------------------------------------------
# command implementations: each returns (verdicts, payload, artifacts)
# ---------------------------------------------------------------------------

def cmd_solve(cfg: RunConfig, out_dir, threads):
    tg, ng = cfg.grids()
    block = cfg.raw.get("solve", {})
    lam = complex(float(block.get("lambda_re", 4.0)),
                  float(block.get("lambda_im", 0.0)))
    data = _builtin_gaussian_data(tg, ng, block)
    sol = solve_full_resolvent(data, cfg.fluid, lam, sector=cfg.sector)
    tol = _tol(cfg, "residual", 1e-6)
    rep = verification.pde_residual(sol, data, cfg.fluid, lam)
    verdicts = [{"name": f"residual.{k}", "passed": v <= tol, "value": v,
                 "tolerance": tol} for k, v in rep.relative.items()]
    artifacts = []
    for name, fld in (("u", sol.u), ("eta", sol.eta), ("h_ext", sol.h_ext)):
        base = os.path.join(out_dir, name)
        fieldio.field_to_csv(fld, base + ".csv")
        fieldio.field_to_binary(fld, base + ".bin")
        artifacts += [name + ".csv", name + ".bin", name + ".bin.json"]
    payload = {"lambda": lam, "residuals": rep.relative,
               "worstMode": rep.worst_mode}
    return verdicts, payload, artifacts


SYMBOL_CLASSES = {
    "A": (1.0, 1, 0.0), "B": (1.0, 1, 0.0),
    "L11": (1.0, 1, 0.0), "L12": (2.0, 1, 0.0), "L21": (0.0, 1, 0.0),
    "L22": (1.0, 1, 0.0), "detL": (2.0, 1, 0.0), "detL_inv": (-2.0, 1, 0.0),
    "Q": (0.0, 1, 0.0), "Qprime": (-2.0, 1, 0.0),
    "n11": (-2.0, 1, 0.0), "n12": (-2.0, 1, 0.0),
    "nN1": (-2.0, 1, 0.0), "nN2": (-2.0, 1, 0.0),
    "detL_over_N": (0.0, 1, -1.0), "N_inv": (-2.0, 1, -1.0),
    "exp_BxN": (0.0, 1, 0.0),
}


def cmd_verify_symbols(cfg: RunConfig, out_dir, threads):
    block = cfg.raw.get("scan", {})
    symbols = block.get("symbols", ["A", "B", "L11", "L12", "L21", "L22",
                                    "detL", "detL_inv", "Q", "Qprime",
                                    "n11", "n12", "nN1", "nN2", "detL_over_N"])
    n = int(block.get("samples", 10_000))
    seed = cfg.seed if cfg.seed is not None else int(block.get("seed", 0))
    growth_cap = _tol(cfg, "refinement_growth", 0.05)

    def one(sym):
        order, mtype, w = SYMBOL_CLASSES[sym]
        spec = scans.MultiplierClassSpec(order=order, mtype=mtype,
                                         region=cfg.sector, lam_xi_weight=w)
        r1 = scans.multiplier_class_scan(
            sym, spec, scans.SamplingPlan(n_samples=n, seed=seed), cfg.fluid)
        r2 = scans.multiplier_class_scan(
            sym, spec, scans.SamplingPlan(n_samples=2 * n, seed=seed), cfg.fluid)
        r1["refinedWorstRatio"] = r2["worstRatio"]
        r1["refinementGrowth"] = (r2["worstRatio"] / r1["worstRatio"] - 1.0
                                  if r1["worstRatio"] > 0 else 0.0)
        return r1

    reports = ordered_map(one, list(symbols), threads)
    verdicts = []
    for rep in reports:
        finite = all(np.isfinite(d["worstRatio"]) for d in rep["perDerivative"])
        verdicts.append({"name": f"scan.{rep['symbol']}.finite", "passed": finite,
                         "value": rep["worstRatio"], "tolerance": math.inf})
        verdicts.append({"name": f"scan.{rep['symbol']}.refinement",
                         "passed": rep["refinementGrowth"] < growth_cap,
                         "value": rep["refinementGrowth"],
                         "tolerance": growth_cap})
    with open(os.path.join(out_dir, "symbol_scans.json"), "w") as fh:
        fh.write(canonical_json(reports))
    return verdicts, {"symbols": list(symbols), "samples": n}, ["symbol_scans.json"]


def cmd_scan_nab(cfg: RunConfig, out_dir, threads):
    block = cfg.raw.get("nab", {})
    n = int(block.get("samples", 100_000))
    seed = cfg.seed if cfg.seed is not None else int(block.get("seed", 0))
    rep = scans.nab_lower_bound_scan(cfg.fluid, cfg.sector.epsilon, n, seed=seed,
                                     zeta_case=cfg.sector.zeta_case)
    lam0_max = _tol(cfg, "lambda0_max", 100.0)
    c_min = _tol(cfg, "c_min", 1e-6)
    verdicts = [
        {"name": "nab.lambda0", "passed": rep["lambda0Found"] <= lam0_max,
         "value": rep["lambda0Found"], "tolerance": lam0_max},
        {"name": "nab.constant", "passed": rep["cFound"] > c_min,
         "value": rep["cFound"], "tolerance": c_min},
        {"name": "nab.violations", "passed": len(rep["violations"]) == 0,
         "value": float(len(rep["violations"])), "tolerance": 0.0},
    ]
    with open(os.path.join(out_dir, "nab_scan.json"), "w") as fh:
        fh.write(canonical_json(rep))
    return verdicts, rep, ["nab_scan.json"]


def cmd_rbound(cfg: RunConfig, out_dir, threads):
    from .halfspace import solve_surface_homogeneous

    tg, ng = cfg.grids()
    block = cfg.raw.get("rbound", {})
    trials = int(block.get("trials", 200))
    seed = cfg.seed
    lam0 = cfg.sector.lambda0
    rng = np.random.default_rng(seed)
    vecs = [rng.standard_normal(tg.points) + 1j * rng.standard_normal(tg.points)
            for _ in range(int(block.get("test_vectors", 6)))]

    # scalar family lam_j^-1 Id over |lam_j| >= lam0
    lams = lam0 * np.array(block.get("lambda_factors",
                                     [1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 30.0, 100.0]))
    scalar_fam = [(l, (lambda ll: (lambda f: f / ll))(l)) for l in lams]
    rep_scalar = verification.rbound_estimate(scalar_fam, vecs, trials=trials,
                                              seed=seed, label="scalar_inverse")

    # solver family lam^{j/2} A(lam): boundary datum K -> weighted velocity
    j_weight = int(block.get("j_weight", 1))

    def solver_op(lam):
        def apply(khat):
            k = BoundaryField(np.asarray(khat, dtype=complex), tg, "spectral")
            u, _ = solve_surface_homogeneous(k, cfg.fluid, lam, ng)
            return lam ** (j_weight / 2.0) * u.values[..., :]
        return apply

    fam = [(l, solver_op(l)) for l in lams]
    rep_solver = verification.rbound_estimate(fam, vecs, trials=min(trials, 40),
                                              seed=seed, label="lam^j/2 A(lam)")

    c = complex(block.get("identity_scale", 0.5))
    rep_single = verification.rbound_estimate([(1.0, lambda f: c * f)], vecs,
                                              trials=50, seed=seed,
                                              label="singleton")
    verdicts = [
        {"name": "rbound.singleton", "passed":
            abs(rep_single.estimate - abs(c)) <= 1e-12,
         "value": rep_single.estimate, "tolerance": abs(c)},
        {"name": "rbound.scalar_bound", "passed":
            rep_scalar.estimate <= (1 / lam0) * (1 + 1e-9),
         "value": rep_scalar.estimate, "tolerance": 1 / lam0},
        {"name": "rbound.solver_finite", "passed":
            bool(np.isfinite(rep_solver.estimate)),
         "value": rep_solver.estimate, "tolerance": math.inf},
    ]
    payload = {name: {"estimate": r.estimate, "band": list(r.band),
                      "trials": r.trials, "operators": r.n_operators}
               for name, r in (("scalar", rep_scalar), ("solver", rep_solver),
                               ("singleton", rep_single))}
    with open(os.path.join(out_dir, "rbound.json"), "w") as fh:
        fh.write(canonical_json(payload))
    return verdicts, payload, ["rbound.json"]


def cmd_evolve(cfg: RunConfig, out_dir, threads):
    tg, ng = cfg.grids()
    cblock = cfg.raw.get("contour", {})
    eblock = cfg.raw.get("evolve", {})
    spec = evolution.ContourSpec(
        angle=float(cblock.get("angle", 0.7)),
        offset=float(cblock.get("offset", 1.0)),
        nodes=int(cblock.get("nodes", 48)))
    xi = [float(eblock.get("mode_xi", 0.5))]
    gen = evolution.build_generator(xi, cfg.fluid, ng)
    rng = np.random.default_rng(cfg.seed if cfg.seed is not None else 0)
    U0 = rng.standard_normal(gen.dim) + 1j * rng.standard_normal(gen.dim)
    times = [float(t) for t in eblock.get("times", [0.1, 0.5, 1.0, 2.0])]
    tol = _tol(cfg, "evolve_rel", 1e-6)

    def one(t):
        exact = evolution.matrix_exponential_oracle(gen, U0, t)
        approx = evolution.propagate_contour(gen, U0, t, spec)
        rel = float(np.linalg.norm(approx - exact) / np.linalg.norm(exact))
        return {"t": t, "rel_err": rel, "norm": float(np.linalg.norm(approx))}

    rows = ordered_map(one, times, threads)
    verdicts = [{"name": f"evolve.t={r['t']:g}", "passed": r["rel_err"] <= tol,
                 "value": r["rel_err"], "tolerance": tol} for r in rows]
    fieldio.write_csv_table(os.path.join(out_dir, "evolution.csv"),
                            ["t", "rel_err", "norm"],
                            [(r["t"], r["rel_err"], r["norm"]) for r in rows])
    return verdicts, {"dim": gen.dim, "rows": rows}, ["evolution.csv"]


def cmd_bent(cfg: RunConfig, out_dir, threads):
    tg, ng = cfg.grids()
    block = cfg.raw.get("bent", {})
    spec = bent_mod.DiffeoSpec(amplitude=float(block.get("amplitude", 0.05)),
                               width=float(block.get("width", 2.0)))
    lam = complex(float(block.get("lambda_re", 16.0)),
                  float(block.get("lambda_im", 0.0)))
    amp = float(block.get("data_amplitude", 1.0))

    def f(x1, x2):
        env = amp * np.exp(-(x1**2) / 2 - (x2**2) / 4)
        return np.stack([env, 0.5 * env], axis=-1)

    def g(x1, x2):
        env = amp * np.exp(-(x1**2) / 2)
        return np.stack([0.3 * env, -0.8 * env], axis=-1)

    def k(x1, x2):
        return 0.9 * amp * np.exp(-((x1 - 0.2) ** 2) / 2)

    v, h, state = bent_mod.neumann_solve(
        f, g, k, spec, cfg.fluid, lam, tg, ng,
        max_iter=int(block.get("max_iter", 40)),
        tol=float(block.get("tol", 1e-9)))
    ratio = max(state.ratios) if state.ratios else 0.0
    res_tol = _tol(cfg, "bent_residual", 1e-6)
    verdicts = [
        {"name": "bent.converged", "passed": state.converged,
         "value": float(state.iterations), "tolerance": float(block.get("max_iter", 40))},
        {"name": "bent.contraction", "passed": ratio < 0.5, "value": ratio,
         "tolerance": 0.5},
    ]
    for name, val in state.residuals.items():
        verdicts.append({"name": f"bent.residual.{name}",
                         "passed": val <= res_tol, "value": val,
                         "tolerance": res_tol})
    rows = []
    for i, upd in enumerate(state.update_norms):
        r = state.ratios[i - 1] if 0 < i <= len(state.ratios) else 0.0
        rows.append((i + 1, float(upd), float(r)))
    fieldio.write_csv_table(os.path.join(out_dir, "bent_history.csv"),
                            ["iter", "updateNorm", "ratio"], rows)
    payload = {"iterations": state.iterations, "ratios": state.ratios,
               "residuals": state.residuals}
    return verdicts, payload, ["bent_history.csv"]


COMMANDS = {
    "solve": cmd_solve,
    "verify-symbols": cmd_verify_symbols,
    "scan-nab": cmd_scan_nab,
    "rbound": cmd_rbound,
    "evolve": cmd_evolve,
    "bent": cmd_bent,
}


def write_report(out_dir, report):
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        fh.write(canonical_json(report) + "\n")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="resolvlab", description=__doc__)
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True)
    ap.add_argument("--out", default=".")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--tol-override", action="append", default=[],
                    metavar="KEY=VAL")
    args = ap.parse_args(argv)

    os.makedirs(args.out, exist_ok=True)
    started = time.time()
    report = {"command": args.command, "gitDescribe": git_describe(),
              "verdicts": [], "artifacts": []}

    try:
        overrides = {}
        for item in args.tol_override:
            if "=" not in item:
                raise ConfigError(f"--tol-override expects KEY=VAL, got {item!r}")
            key, val = item.split("=", 1)
            overrides[key.strip()] = float(val)
        with open(args.config) as fh:
            text = fh.read()
        cfg = RunConfig.load(text, args.command, seed=args.seed,
                             tol_overrides=overrides)
        report["configHash"] = config_hash(cfg.raw)
        if cfg.seed is not None:
            report["seed"] = cfg.seed
    except (OSError, ConfigError) as exc:
        report["error"] = {"type": "config", "message": str(exc)}
        report["wallTime"] = time.time() - started
        write_report(args.out, report)
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        verdicts, payload, artifacts = COMMANDS[args.command](cfg, args.out,
                                                              args.threads)
        report["verdicts"] = verdicts
        report["result"] = payload
        report["artifacts"] = artifacts
    except NUMERICAL_ERRORS as exc:
        report["error"] = {"type": "numerical", "class": type(exc).__name__,
                           "message": str(exc)}
        report["wallTime"] = time.time() - started
        write_report(args.out, report)
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3

    report["wallTime"] = time.time() - started
    write_report(args.out, report)
    failed = [v["name"] for v in report["verdicts"] if not v["passed"]]
    for v in report["verdicts"]:
        status = "PASS" if v["passed"] else "FAIL"
        print(f"{status} {v['name']}: {v['value']:.6g} (tol {v['tolerance']:.6g})")
    if failed:
        print(f"verdict failure: {failed}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
