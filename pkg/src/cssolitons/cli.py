"""Command-line entry point: scenario configs, batch runs, CSV export.

Configs are JSON documents with a "mode" and mode-specific blocks; see
README for the schema.  Trajectory exports are RFC-4180 CSV files with the
header  s,sigma,varsigma,C_1..C_n,T_1..T_n,lambda,mu,nu,curvature,V,
delta_total,delta_W,z  and 17-significant-digit decimals; mu and nu are
left empty where the drive vector vanishes.  Outputs are byte-identical for
identical configs and seeds; wall-clock metadata lives only in the manifest.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib.metadata import version as pkg_version
from pathlib import Path

import numpy as np

from . import asymptotics, catalog, diagnostics, helices, taxonomy
from .flow import IntegratorOptions, Trajectory, integrate, integrate_compactified
from .params import CompactState, PhaseState, SolitonParams, compactify
from .skewlin import skew_normal_form

MODES = (
    "classify",
    "helix",
    "integrate",
    "compact",
    "family-validate",
    "shoot",
    "catalog",
    "report",
)


class UsageError(Exception):
    """Configuration or invocation problem: exit code 2."""


class InvariantError(Exception):
    """Hard invariant failure during a run: exit code 1."""


def _fmt(x: float) -> str:
    if np.isnan(x):
        return ""
    return f"{x:.17g}"


def write_trajectory_csv(path: Path, traj: Trajectory) -> None:
    n = traj.params.n
    header = (
        ["s", "sigma", "varsigma"]
        + [f"C_{i + 1}" for i in range(n)]
        + [f"T_{i + 1}" for i in range(n)]
        + ["lambda", "mu", "nu", "curvature", "V", "delta_total", "delta_W", "z"]
    )
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(len(traj)):
            row = [traj.s[i], traj.sigma[i], traj.varsigma[i]]
            row += list(traj.C[i]) + list(traj.T[i])
            row += [
                traj.lam[i],
                traj.mu[i],
                traj.nu[i],
                traj.curvature[i],
                traj.V[i],
                traj.delta_total[i],
                traj.delta_W[i],
                traj.z[i],
            ]
            w.writerow([_fmt(float(x)) for x in row])


def read_trajectory_csv(path: Path, params: SolitonParams) -> Trajectory:
    """Rebuild a Trajectory from an exported CSV (diagnostics recomputed)."""
    from .flow import _finish_trajectory

    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = [[float(x) if x else np.nan for x in row] for row in r]
    arr = np.array(data)
    n = params.n
    expect = 3 + 2 * n + 8
    if len(header) != expect:
        raise UsageError(
            f"CSV has {len(header)} columns, expected {expect} for dimension {n}"
        )
    s = arr[:, 0]
    sigma = arr[:, 1]
    varsig = arr[:, 2]
    C = arr[:, 3 : 3 + n]
    T = arr[:, 3 + n : 3 + 2 * n]
    rows = list(zip(s, C, T))
    return _finish_trajectory(params, rows, sigma, varsig, {"status": "loaded"}, None)


def _matrix_from_config(block, n_hint: int | None = None) -> np.ndarray:
    if isinstance(block, list):
        return np.asarray(block, dtype=float)
    if isinstance(block, dict):
        planes = block.get("planes", [])
        n = block.get("n")
        if n is None:
            top = max((max(p["axis_pair"]) for p in planes), default=-1)
            n = top + 1 + block.get("null_dim", 0)
        A = np.zeros((n, n))
        for p in planes:
            i, j = p["axis_pair"]
            if not (0 <= i < n and 0 <= j < n and i != j):
                raise UsageError(f"invalid axis_pair {p['axis_pair']} for dimension {n}")
            w = float(p["omega"])
            A[j, i] = w
            A[i, j] = -w
        return A
    raise UsageError("matrix must be a dense list-of-lists or a {planes, null_dim} block")


def _params_from_config(cfg: dict) -> SolitonParams:
    block = cfg.get("params")
    if block is None:
        raise UsageError("config is missing the params block")
    alpha = float(block.get("alpha", 0.0))
    A = _matrix_from_config(block.get("A", []))
    v = np.asarray(block.get("v", np.zeros(len(A))), dtype=float)
    if A.size == 0:
        n = len(v)
        if n == 0:
            raise UsageError("params block needs A or v to fix the dimension")
        A = np.zeros((n, n))
    if v.shape != (len(A),):
        raise UsageError(f"v has dimension {v.shape[0]}, A has dimension {len(A)}")
    if np.linalg.norm(A @ v) > 1e-12 * max(np.linalg.norm(A), 1.0) * max(np.linalg.norm(v), 1.0):
        raise UsageError(
            "constraint A v = 0 violated: the translation velocity must lie "
            "in the rotation generator's null space"
        )
    try:
        return SolitonParams(alpha=alpha, spectrum=skew_normal_form(A), v=v)
    except ValueError as e:
        raise UsageError(str(e)) from e


def _opts_from_config(cfg: dict) -> tuple[IntegratorOptions, tuple[float, float]]:
    block = cfg.get("integrator", {})
    s_span = tuple(block.get("s_span", (0.0, 20.0)))
    kw = {}
    for key in ("tol", "rtol", "atol", "max_step", "fixed_step", "max_steps", "c_norm_cap"):
        if key in block:
            kw[key] = block[key]
    return IntegratorOptions(**kw), s_span


def _initial_states(cfg: dict, params: SolitonParams, seed: int) -> list[PhaseState]:
    block = cfg.get("initial")
    if block is None:
        raise UsageError("config is missing the initial block")
    if "C" in block:
        T = np.asarray(block["T"], dtype=float)
        return [PhaseState(C=np.asarray(block["C"], dtype=float), T=T / np.linalg.norm(T))]
    if "fixture" in block:
        fx = catalog.make(block["fixture"], **block.get("options", {}))
        return [fx.initial_state]
    if "grid" in block:
        g = block["grid"]
        count = int(g.get("count", 0))
        scale = float(g.get("c_scale", 1.0))
        rng = np.random.default_rng(seed)
        states = []
        for _ in range(count):
            C = scale * rng.standard_normal(params.n)
            T = rng.standard_normal(params.n)
            states.append(PhaseState(C=C, T=T / np.linalg.norm(T)))
        return states
    raise UsageError("initial block needs explicit C/T, a fixture label, or a grid")


def _check_trajectory(traj: Trajectory, strict: bool) -> dict:
    """Lemma checks with measured margins; hard failures raise."""
    status = traj.stats.get("status", "completed")
    if status in ("nan_detected", "step_underflow"):
        raise InvariantError(f"integration failed: {status}")
    checks = {}
    rotating = len(traj.params.spectrum.planes) > 0
    if rotating and len(traj) > 2:
        ds = np.diff(traj.s)
        finite = np.isfinite(traj.V)
        if np.all(finite):
            dips = np.diff(traj.V) / np.maximum(ds, 1e-300)
            worst = float(np.min(dips)) if len(dips) else 0.0
            checks["V_nondecreasing"] = {
                "pass": bool(worst >= -1e-8),
                "worst_dip_per_unit_s": worst,
            }
    mono = diagnostics.monotonicity_report(traj)
    checks["monotonicity"] = {
        "regime": mono.regime,
        "pass": not mono.violations,
        "violations": list(mono.violations),
        "c_norm_extrema": [mono.c_norm.minima, mono.c_norm.maxima],
        "z_extrema": [mono.z.minima, mono.z.maxima],
    }
    if mono.lambda_residual_max is not None:
        checks["lambda_rate"] = {
            "pass": bool(mono.lambda_residual_max < 1e-6),
            "max_residual": mono.lambda_residual_max,
        }
    plan = diagnostics.planarity_check(traj)
    checks["planarity"] = {
        "rank": plan.rank,
        "expected_max_rank": plan.expected_max_rank,
        "pass": plan.expected_max_rank is None or plan.rank <= plan.expected_max_rank,
        "singular_values": [float(x) for x in plan.singular_values],
    }
    checks["tangent_drift"] = {
        "pass": traj.stats.get("max_tangent_drift", 0.0) < 1e-9,
        "max_drift": traj.stats.get("max_tangent_drift", 0.0),
    }
    if strict:
        for name, c in checks.items():
            if isinstance(c, dict) and c.get("pass") is False:
                raise InvariantError(f"strict mode: check {name} failed: {c}")
    return checks


def run(config: dict, out_dir: Path, strict: bool = False, seed: int = 0, threads: int = 1) -> dict:
    """Execute one scenario; returns the report dict (also written to disk)."""
    mode = config.get("mode")
    if mode not in MODES:
        raise UsageError(f"mode must be one of {MODES}, got {mode!r}")
    out_dir.mkdir(parents=True, exist_ok=True)
    prefix = config.get("output", {}).get("prefix", mode)
    report: dict = {"mode": mode, "checks": {}, "artifacts": []}

    if mode == "classify":
        g = config.get("generator")
        if g is None:
            raise UsageError("classify mode needs a generator block")
        raw = taxonomy.GeneratorRaw(
            theta=float(g.get("theta", 0.0)),
            v=np.asarray(g.get("v", []), dtype=float),
            w=float(g.get("w", 0.0)),
            M=_matrix_from_config(g.get("M", [])),
        )
        try:
            can = taxonomy.classify(raw)
        except ValueError as e:
            raise UsageError(str(e)) from e
        report["category"] = can.category
        report["theta"] = can.theta
        report["w"] = can.w
        report["v_hat"] = [float(x) for x in can.v_hat]
        report["frequencies"] = [float(p.omega) for p in can.spectrum.planes]

    elif mode == "helix":
        h = config.get("helix")
        if h is None:
            raise UsageError("helix mode needs a helix block")
        spec = skew_normal_form(_matrix_from_config(h["M"]))
        sol = helices.make_helix(
            spec, [np.asarray(m, float) for m in h["modes"]],
            np.asarray(h.get("v", np.zeros(spec.n)), float),
        )
        grid_cfg = h.get("eps_grid", {"start": 0.0, "stop": 6.2831853071795862, "count": 200})
        eps = np.linspace(grid_cfg["start"], grid_cfg["stop"], int(grid_cfg["count"]))
        for k, t in enumerate(h.get("times", [0.0])):
            curve = helices.sample_curve(sol, float(t), eps)
            path = out_dir / f"{prefix}_{k:03d}.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["eps"] + [f"C_{i + 1}" for i in range(spec.n)])
                for e, row in zip(eps, curve):
                    w.writerow([_fmt(float(e))] + [_fmt(float(x)) for x in row])
            report["artifacts"].append(path.name)
        report["time_coefficient"] = helices.resolve_time_coefficient(sol)
        report["T_singular"] = sol.T_singular

    elif mode in ("integrate", "catalog"):
        if mode == "catalog":
            c = config.get("catalog")
            if c is None:
                raise UsageError("catalog mode needs a catalog block")
            fx = catalog.make(c["label"], **c.get("options", {}))
            params = fx.params
            states = [fx.initial_state]
            opts, s_span = _opts_from_config(config)
            if "s_span" in c:
                s_span = tuple(c["s_span"])
            report["label"] = c["label"]
            if fx.expected_V is not None:
                report["expected_V"] = fx.expected_V
        else:
            params = _params_from_config(config)
            opts, s_span = _opts_from_config(config)
            states = _initial_states(config, params, seed)

        def one(idx_state):
            idx, st = idx_state
            traj = integrate(params, st, s_span, opts)
            path = out_dir / f"{prefix}_{idx:03d}.csv"
            write_trajectory_csv(path, traj)
            return idx, path.name, _check_trajectory(traj, strict)

        if threads > 1 and len(states) > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                results = list(ex.map(one, enumerate(states)))
        else:
            results = [one(x) for x in enumerate(states)]
        for idx, name, checks in results:
            report["artifacts"].append(name)
            report["checks"][f"trajectory_{idx:03d}"] = checks

    elif mode == "compact":
        params = _params_from_config(config)
        opts, span = _opts_from_config(config)
        st = _initial_states(config, params, seed)[0]
        ct = integrate_compactified(params, compactify(st), span, opts)
        if ct.stats["status"] in ("nan_detected", "step_underflow"):
            raise InvariantError(f"integration failed: {ct.stats['status']}")
        traj = ct.to_trajectory()
        path = out_dir / f"{prefix}_000.csv"
        write_trajectory_csv(path, traj)
        report["artifacts"].append(path.name)
        report["checks"]["trajectory_000"] = _check_trajectory(traj, strict)

    elif mode == "family-validate":
        params = _params_from_config(config)
        opts, s_span = _opts_from_config(config)
        st = _initial_states(config, params, seed)[0]
        fam = config.get("family", {})
        grid_h = float(fam.get("grid_h", 1e-3))
        t = float(fam.get("t", 1.0 / (2.0 * params.alpha) if params.alpha != 0.0 else 0.0))
        if opts.fixed_step is None:
            opts = IntegratorOptions(tol=opts.tol, fixed_step=grid_h, c_norm_cap=opts.c_norm_cap)
        traj = integrate(params, st, s_span, opts)
        from .flow import csf_residual

        stats = csf_residual(params, traj.C, t, grid_h)
        threshold = float(fam.get("threshold", 1e-4))
        report["checks"]["csf_residual"] = {
            "pass": bool(stats.max < threshold),
            "max": stats.max,
            "rms": stats.rms,
            "threshold": threshold,
            "warnings": list(stats.warnings),
        }
        if strict and stats.max >= threshold:
            raise InvariantError(f"csf residual {stats.max:.3e} over threshold {threshold:.1e}")

    elif mode == "shoot":
        params = _params_from_config(config)
        sh = config.get("shoot")
        if sh is None:
            raise UsageError("shoot mode needs a shoot block")
        spec = asymptotics.RegionSpec(K=float(sh.get("K", config.get("region_K", 10.0))))
        horizon = float(sh.get("horizon", 50.0))
        res = asymptotics.shoot_trapped_direction(
            params, np.asarray(sh["C0"], float), spec, horizon,
            cap_factor=sh.get("cap_factor"), threads=threads,
        )
        report["T0"] = [float(x) for x in res.T0]
        report["achieved_span"] = res.achieved_span
        report["cap"] = res.cap
        report["method"] = res.method
        report["candidates"] = [[a, s] for a, s in res.candidates]
        report["checks"]["trapped"] = {
            "pass": bool(res.achieved_span >= horizon),
            "achieved_span": res.achieved_span,
            "horizon": horizon,
        }
        if res.trajectory is not None:
            path = out_dir / f"{prefix}_000.csv"
            write_trajectory_csv(path, res.trajectory)
            report["artifacts"].append(path.name)
        if strict and res.achieved_span < horizon:
            raise InvariantError("no trapped direction reached the horizon")

    elif mode == "report":
        params = _params_from_config(config)
        src = config.get("trajectory")
        if src is None:
            raise UsageError("report mode needs a trajectory path")
        traj = read_trajectory_csv(Path(src), params)
        report["checks"]["trajectory"] = _check_trajectory(traj, strict)

    manifest = {
        "config": config,
        "version": _version(),
        "seed": seed,
        "threads": threads,
        "strict": strict,
        "metadata": {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z")},
    }
    with open(out_dir / f"{prefix}_manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    with open(out_dir / f"{prefix}_report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, default=float)
    return report


def _version() -> str:
    try:
        return pkg_version("cssolitons")
    except Exception:
        return "unknown"


def main(argv=None) -> int:
    p = argparse.ArgumentParser(
        prog="cssolitons",
        description="Numerical laboratory for self-similar curve shortening solutions",
    )
    p.add_argument("--config", required=True, help="path to a JSON scenario config")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--strict", action="store_true", help="report findings become failures")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized grids")
    p.add_argument("--threads", type=int, default=1, help="worker threads for batches")
    try:
        args = p.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        with open(args.config) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: cannot read config: {e}", file=sys.stderr)
        return 2
    try:
        report = run(config, Path(args.out), args.strict, args.seed, args.threads)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except InvariantError as e:
        print(f"invariant failure: {e}", file=sys.stderr)
        return 1
    failed = [
        name
        for name, c in report.get("checks", {}).items()
        if isinstance(c, dict)
        and (
            c.get("pass") is False
            or any(isinstance(s, dict) and s.get("pass") is False for s in c.values())
        )
    ]
    if failed:
        # report-only findings: surfaced but not fatal unless --strict, in
        # which case they already raised InvariantError above
        print("report findings: " + ", ".join(sorted(failed)), file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
