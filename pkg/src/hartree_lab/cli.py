"""Command-line batch front end.

    hartree-lab propagate     --config run.json [--out rows.csv] [--compare-oracle]
    hartree-lab standing-wave --config run.json [--out report.json]
    hartree-lab stability     --config run.json [--out dist.csv] [--workers N]   (summary: dist.summary.json)
    hartree-lab morse         --config run.json [--out report.json]
    hartree-lab basis-check   --config run.json

Exit codes: 0 success, 1 numerical tolerance failure, 2 invalid configuration.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load, read_grid_file, validate
from .galilean import GalileanParams, apply_galilean
from .grid import GridState
from .hermite import BasisSpec, analyze, gauss_hermite_rule, hermite_functions, random_state, synthesize
from .morse import assemble_hessian
from .observables import observables_grid
from .oracle import ToleranceError, integrate, pde_residual
from .propagator import ExactPropagator, KappaError, Model
from .waves import (AdmissibilityError, PeakSpec, Perturbation, StabilityConfig, multi_peak,
                    single_peak, slope_fit, stability_trial)

EXIT_OK, EXIT_TOL, EXIT_CONFIG = 0, 1, 2
ORACLE_TOL = 1e-8
RESIDUAL_STEP = 1e-3
BASIS_TOL = 1e-10


class ToleranceFailure(RuntimeError):
    pass


def fmt(x) -> str:
    return format(float(x), ".17g")


def _vec(v, d):
    if v is None:
        return np.zeros(d)
    v = np.atleast_1d(np.asarray(v, dtype=float))
    return np.full(d, v[0]) if v.size == 1 and d > 1 else v


def _peaks(cfg: RunConfig):
    out = []
    for p in cfg.initial.peaks:
        alpha = p.get("alpha", 1.0)
        if isinstance(alpha, (list, tuple)):
            alpha = complex(alpha[0], alpha[1])
        out.append(PeakSpec(alpha, _vec(p.get("a"), cfg.d), _vec(p.get("b"), cfg.d), p.get("n", [0] * cfg.d)))
    return out


def initial_state(cfg: RunConfig) -> GridState:
    grid = cfg.grid_spec()
    ini = cfg.initial
    if ini.kind == "grid_file":
        return read_grid_file(ini.path, grid)
    if ini.kind == "multi_peak":
        return multi_peak(cfg.lam, cfg.eta, ini.M, _peaks(cfg), cfg.model, grid, cfg.cutoff).initial()
    if ini.kind == "random":
        spec = BasisSpec(cfg.d, cfg.kappa, max(ini.modes, 1))
        c = random_state(spec, np.random.default_rng(cfg.seed), modes=ini.modes)
        u = synthesize(c.scaled(math.sqrt(ini.M)), grid)
        return apply_galilean(GalileanParams(0.0, cfg.kappa, _vec(ini.a, cfg.d), _vec(ini.b, cfg.d)), u)
    return single_peak(cfg.lam, cfg.eta, ini.M, ini.n, _vec(ini.a, cfg.d), _vec(ini.b, cfg.d),
                       Model.H, grid).initial()


def _report(cfg: RunConfig, results, diagnostics) -> dict:
    return {"config_echo": cfg.to_dict(), "results": results, "diagnostics": diagnostics,
            "version": __version__}


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in r])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(type(o).__name__)


# ---------------------------------------------------------------------------


def cmd_propagate(cfg: RunConfig, out=None, compare_oracle=False, workers=1) -> int:
    u0 = initial_state(cfg)
    model = Model.parse(cfg.model)
    times = np.linspace(0.0, cfg.time.t_end, cfg.time.samples + 1)
    M0 = u0.mass()
    if cfg.lam + cfg.eta * M0 <= 0:
        raise ConfigError("kappa_nonpositive", f"lambda + eta M = {cfg.lam + cfg.eta * M0:g}")
    prop = ExactPropagator(model, u0, cfg.lam, cfg.eta, cfg.cutoff)
    oracle = None
    if compare_oracle:
        oracle = integrate(u0, cfg.time.t_end, cfg.lam, cfg.eta, model, samples=cfg.time.samples,
                           dt=cfg.grid.dt, tol=ORACLE_TOL, extrapolate=True)
    d = cfg.d
    header = ["t", "mass", "energy"] + [f"X{k + 1}" for k in range(d)] + [f"P{k + 1}" for k in range(d)]
    header += ["psi_or_phi", "sigma1_norm"] + (["rel_l2_error"] if compare_oracle else []) + ["flagged"]
    rows = []
    status = EXIT_OK
    for j, t in enumerate(times):
        res = prop.at(float(t))
        u = res.state
        obs = observables_grid(u, cfg.lam, cfg.eta)
        row = [t, obs.mass, obs.energy, *obs.position, *obs.momentum, prop.phase(float(t)),
               math.sqrt(obs.kinetic + 0.5 * obs.m2)]
        if oracle is not None:
            ref = oracle[j]
            row.append(float(np.linalg.norm(u.values - ref.values) / np.linalg.norm(ref.values)))
        row.append("1" if res.flagged else "0")
        rows.append(row)
        if res.flagged:
            print(f"flagged at t = {t:.6g}: truncation {res.diagnostics['truncation_loss']:.2e}, "
                  f"boundary {res.diagnostics['boundary_loss']:.2e}; output truncated", file=sys.stderr)
            status = EXIT_TOL
            break
    _write(_csv(header, rows), out)
    return status


def _residual(closure, times, cfg: RunConfig, model) -> float:
    worst = 0.0
    for tc in times:
        ts = tc + RESIDUAL_STEP * np.arange(-2, 3)
        worst = max(worst, pde_residual([closure(float(s)) for s in ts], ts, cfg.lam, cfg.eta, model))
    return worst


def cmd_standing_wave(cfg: RunConfig, out=None, **_) -> int:
    grid = cfg.grid_spec()
    model = Model.parse(cfg.model)
    ini = cfg.initial
    times = np.linspace(0.0, cfg.time.t_end, cfg.time.samples + 1)
    check = times[:: max(1, len(times) // 4)]
    if ini.kind == "hermite_mode":
        sp = single_peak(cfg.lam, cfg.eta, ini.M, ini.n, _vec(ini.a, cfg.d), _vec(ini.b, cfg.d), model, grid)
        results = {
            "kind": "single_peak",
            "omega": sp.omega,
            "phase_rate": sp.omega / 2,
            "kappa": sp.kappa,
            "residual": _residual(sp.at, check, cfg, model),
            "trajectory": [{"t": float(t), "center": sp.center(float(t))} for t in times],
        }
    elif ini.kind == "multi_peak":
        mp = multi_peak(cfg.lam, cfg.eta, ini.M, _peaks(cfg), model, grid, cfg.cutoff)
        results = {
            "kind": "multi_peak",
            "kappa": mp.kappa,
            "mu": mp.mu,
            "a": mp.a,
            "b": mp.b,
            "peak_rates": mp.rates(),
            "relative_period": mp.relative_period,
            "peak_periods": [mp.relative_period] * len(mp.peaks),
            "residual": _residual(mp.at, check, cfg, model),
            "trajectory": [{"t": float(t), "centers": mp.peak_centers(float(t))} for t in times],
        }
    else:
        raise ConfigError("standing_wave_initial", "initial.kind must be hermite_mode or multi_peak")
    _write(_json(_report(cfg, results, {"residual_step": RESIDUAL_STEP})), out)
    return EXIT_OK


def _perturbations(cfg: RunConfig) -> tuple:
    out = []
    for i, p in enumerate(cfg.stability.perturbations):
        kind = p["kind"]
        n = list(cfg.initial.n) if isinstance(cfg.initial.n, (list, tuple)) else [cfg.initial.n]
        mode = tuple(p.get("mode", [k + 2 for k in n] if kind == "mode" else [0] * cfg.d))
        amp = p.get("amplitude", 1.0)
        if isinstance(amp, (list, tuple)):
            amp = complex(amp[0], amp[1])
        out.append(Perturbation(kind, mode, amp, tuple(p.get("direction", [1.0] * cfg.d)),
                                seed=int(p.get("seed", cfg.seed)) + i, modes=int(p.get("modes", 8))))
    return tuple(out)


def _stability_config(cfg: RunConfig, delta: float) -> StabilityConfig:
    st = cfg.stability
    n = cfg.initial.n if isinstance(cfg.initial.n, (list, tuple)) else [cfg.initial.n]
    return StabilityConfig(model=cfg.model, n=tuple(int(k) for k in n), M=cfg.initial.M, lam=cfg.lam,
                           eta=cfg.eta, s=st.s, perturbations=_perturbations(cfg), delta=delta,
                           periods=st.periods, samples_per_period=st.samples_per_period,
                           half_width=cfg.grid.L, points=cfg.grid.points,
                           cutoff=cfg.cutoff or 64, y_max=st.y_max)


def _map(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def cmd_stability(cfg: RunConfig, out=None, workers=1, **_) -> int:
    st = cfg.stability
    deltas = [st.delta] if st.deltas is None else list(st.deltas)
    reports = _map(stability_trial, [_stability_config(cfg, d) for d in deltas], workers)
    header = ["t"] + [f"distance_delta_{fmt(d)}" for d in deltas]
    rows = [[t, *(r.trajectory[j] for r in reports)] for j, t in enumerate(reports[0].times)]
    table = [{"delta": d, "sup_dist": r.sup_dist, "ratio": r.sup_dist / d if d > 0 else None,
              "initial_dist": r.initial_dist} for d, r in zip(deltas, reports)]
    positive = [(d, r.sup_dist) for d, r in zip(deltas, reports) if d > 0 and r.sup_dist > 0]
    results = {"s": st.s, "T": reports[0].T, "table": table,
               "slope": slope_fit(*zip(*positive)) if len(positive) >= 2 else None}
    csv_text = _csv(header, rows)
    summary = _json(_report(cfg, results, {"samples": len(reports[0].times)}))
    if out is None:
        sys.stdout.write(csv_text)
        sys.stderr.write(summary)
    else:
        out.write_text(csv_text)
        out.with_name(out.stem + ".summary.json").write_text(summary)
    return EXIT_OK


def _morse_one(args):
    case, n, cutoff, subspace = args
    return assemble_hessian(case, n, cutoff, subspace).summary()


def cmd_morse(cfg: RunConfig, out=None, workers=1, **_) -> int:
    m = cfg.morse
    ns = m.n if isinstance(m.n, (list, tuple)) else [m.n]
    rows = _map(_morse_one, [(m.case, int(n), m.cutoff, m.subspace) for n in ns], workers)
    _write(_json(_report(cfg, rows if len(rows) > 1 else rows[0], {"cutoff": m.cutoff})), out)
    return EXIT_OK


def cmd_basis_check(cfg: RunConfig, out=None, **_) -> int:
    """Quadrature orthonormality of the basis and analysis/synthesis round trip of the initial state."""
    N = cfg.cutoff or (64 if cfg.d == 1 else 32)
    rule = gauss_hermite_rule(2 * N + 1)
    H = hermite_functions(N, rule.nodes) * np.sqrt(rule.scaled_weights)
    gram = H @ H.T
    ortho = float(np.max(np.abs(gram - np.eye(N + 1))))
    u0 = initial_state(cfg)
    kappa = cfg.lam + cfg.eta * u0.mass()
    spec = BasisSpec(cfg.d, kappa if kappa > 0 else 1.0, N)
    c = analyze(u0, spec)
    back = synthesize(c, u0.spec)
    rt = float(np.linalg.norm(back.values - u0.values) / np.linalg.norm(u0.values))
    results = {"cutoff": N, "kappa": spec.kappa, "orthonormality_error": ortho,
               "round_trip_error": rt, "truncation_loss": c.diagnostics["truncation_loss"],
               "tolerance": BASIS_TOL}
    _write(_json(_report(cfg, results, {"quadrature_nodes": len(rule.nodes)})), out)
    return EXIT_OK if max(ortho, rt) <= BASIS_TOL else EXIT_TOL


COMMANDS = {
    "propagate": cmd_propagate,
    "standing-wave": cmd_standing_wave,
    "stability": cmd_stability,
    "morse": cmd_morse,
    "basis-check": cmd_basis_check,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hartree-lab", description="Spectral lab for trapped Hartree equations.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON run configuration (defaults if omitted)")
        sp.add_argument("--out", type=Path)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--workers", type=int, default=1)
        if name == "propagate":
            sp.add_argument("--compare-oracle", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load(args.config) if args.config else RunConfig()
        if args.seed is not None:
            cfg.seed = args.seed
        validate(cfg, args.command)
        kwargs = {"out": args.out, "workers": max(1, args.workers)}
        if args.command == "propagate":
            kwargs["compare_oracle"] = args.compare_oracle
        return COMMANDS[args.command](cfg, **kwargs)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AdmissibilityError, KappaError) as exc:
        code = getattr(exc, "condition", getattr(exc, "code", "invalid"))
        print(f"invalid configuration: {code}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ToleranceError, ToleranceFailure) as exc:
        print(f"tolerance failure: {exc}", file=sys.stderr)
        return EXIT_TOL


if __name__ == "__main__":
    sys.exit(main())
