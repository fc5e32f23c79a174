"""Command-line front end: ``warped-ricci {bryant,simulate,verify,plot,validate-pinch}``.

Exit codes: 0 pass, 1 check failure, 2 usage or config error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import barriers, bryant, pinch as pinch_mod, solver, verify
from .barriers import BarrierParams
from .scales import DomainError

log = logging.getLogger("warped_ricci")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3

CHECKS = ("barricade", "curvature_bound", "bryant_convergence", "buckling",
          "mollification", "approx_residual", "initial_rate", "anderson_chow")
DEFAULT_CHECKS = ("barricade", "curvature_bound", "bryant_convergence", "buckling")

SECTIONS = {
    "pinch": None,
    "grid": {"n_nodes", "tip_nodes", "n_uniform", "u_star"},
    "time": {"T1_over_m", "T_end", "n_outputs", "c_dt", "method"},
    "barriers": {f.name for f in fields(BarrierParams)},
    "mollification": {"m"},
    "tables": {"sigma_max", "tol"},
    "checks": {"run"},
    "output": {"dir"},
}


class ConfigError(ValueError):
    pass


def _line_of(text: str, section: str, key: Optional[str] = None) -> int:
    cur = None
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            cur = line[1:-1].strip()
            if key is None and cur == section:
                return i
        elif cur == section and key is not None:
            k = line.split("=", 1)[0].split(":", 1)[0].strip()
            if k.lower() == key.lower():
                return i
    return 0


def _floats(text: str) -> List[float]:
    return [float(x) for x in text.replace(",", " ").split()]


@dataclass
class RunConfig:
    pinch_section: Dict[str, str]
    grid: solver.GridSpec = field(default_factory=solver.GridSpec)
    T1_over_m: float = 0.01
    T_end: float = 5e-3
    n_outputs: int = 12
    c_dt: float = 0.1
    method: str = "imex"
    barrier_overrides: Dict[str, float] = field(default_factory=dict)
    m_list: List[float] = field(default_factory=lambda: [1e-2])
    sigma_max: float = 1e4
    tol: float = 1e-10
    checks: List[str] = field(default_factory=lambda: list(DEFAULT_CHECKS))
    out_dir: str = "run"
    source: str = ""

    @property
    def pinch(self) -> pinch_mod.ModelPinch:
        return pinch_mod.pinch_from_config(self.pinch_section)

    def params(self) -> BarrierParams:
        return barriers.params_for(self.pinch, **self.barrier_overrides)

    def T1(self, m: float) -> float:
        return self.T1_over_m * m

    def as_dict(self):
        return {"pinch": dict(self.pinch_section), "grid": asdict(self.grid),
                "time": {"T1_over_m": self.T1_over_m, "T_end": self.T_end,
                         "n_outputs": self.n_outputs, "c_dt": self.c_dt,
                         "method": self.method},
                "barriers": dict(self.barrier_overrides), "m": list(self.m_list),
                "tables": {"sigma_max": self.sigma_max, "tol": self.tol},
                "checks": list(self.checks), "source": self.source}

    @classmethod
    def from_text(cls, text: str, source: str = "<config>") -> "RunConfig":
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        try:
            cp.read_string(text, source=source)
        except configparser.Error as exc:
            raise ConfigError(f"{source}: {exc}") from None

        def where(sec, key=None):
            return f"{source}:{_line_of(text, sec, key)}"

        for sec in cp.sections():
            if sec not in SECTIONS:
                raise ConfigError(f"{where(sec)}: unknown section [{sec}]")
            allowed = SECTIONS[sec]
            if allowed is not None:
                for key in cp[sec]:
                    if key not in allowed:
                        raise ConfigError(f"{where(sec, key)}: unknown key {key!r} in [{sec}]")
        if "pinch" not in cp:
            raise ConfigError(f"{source}: missing [pinch] section")
        cfg = cls(pinch_section=dict(cp["pinch"]), source=source)

        def get(sec, key, conv, default):
            if sec not in cp or key not in cp[sec]:
                return default
            try:
                return conv(cp[sec][key])
            except ValueError as exc:
                raise ConfigError(f"{where(sec, key)}: bad value for {key}: {exc}") from None

        try:
            cfg.pinch
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"{where('pinch')}: {exc}") from None
        g = solver.GridSpec()
        cfg.grid = solver.GridSpec(n_nodes=get("grid", "n_nodes", int, g.n_nodes),
                                   tip_nodes=get("grid", "tip_nodes", int, g.tip_nodes),
                                   n_uniform=get("grid", "n_uniform", int, g.n_uniform),
                                   u_star=get("grid", "u_star", float, g.u_star))
        cfg.T1_over_m = get("time", "T1_over_m", float, cfg.T1_over_m)
        cfg.T_end = get("time", "T_end", float, cfg.T_end)
        cfg.n_outputs = get("time", "n_outputs", int, cfg.n_outputs)
        cfg.c_dt = get("time", "c_dt", float, cfg.c_dt)
        cfg.method = get("time", "method", str, cfg.method)
        if cfg.method not in ("imex", "rk2"):
            raise ConfigError(f"{where('time', 'method')}: method must be imex or rk2")
        if "barriers" in cp:
            for key in cp["barriers"]:
                cfg.barrier_overrides[key] = get("barriers", key, float, None)
        cfg.m_list = get("mollification", "m", _floats, cfg.m_list)
        if not cfg.m_list:
            raise ConfigError(f"{where('mollification', 'm')}: empty m list")
        cfg.sigma_max = get("tables", "sigma_max", float, cfg.sigma_max)
        cfg.tol = get("tables", "tol", float, cfg.tol)
        checks = get("checks", "run", lambda s: s.replace(",", " ").split(), cfg.checks)
        bad = [c for c in checks if c not in CHECKS]
        if bad:
            raise ConfigError(f"{where('checks', 'run')}: unknown checks {bad}")
        cfg.checks = checks
        cfg.out_dir = get("output", "dir", str, cfg.out_dir)
        if not cfg.T1_over_m < 1:
            raise ConfigError(f"{where('time', 'T1_over_m')}: T1 must be below every m")
        try:
            cfg.params()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where('barriers')}: {exc}") from None
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = resolve_config(path)
        return cls.from_text(Path(path).read_text(), source=str(path))


def resolve_config(name) -> Path:
    """A path, or the name of a bundled config such as ``ak-reference.cfg``."""
    p = Path(name)
    if p.exists():
        return p
    bundled = resources.files("warped_ricci") / "configs" / p.name
    if bundled.is_file():
        return Path(str(bundled))
    raise ConfigError(f"config {name} not found")


def bundled_configs() -> List[str]:
    root = resources.files("warped_ricci") / "configs"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".cfg"))


# ---------------------------------------------------------------------------
# tables are cached per process

_TABLES: Dict[tuple, bryant.BryantTables] = {}


def get_tables(q: int, sigma_max: float, tol: float) -> bryant.BryantTables:
    key = (q, float(sigma_max), float(tol))
    if key not in _TABLES:
        log.info("building Bryant tables q=%d sigma_max=%g", q, sigma_max)
        _TABLES[key] = bryant.build_tables(q, sigma_max=sigma_max, tol=tol, B=256.0)
    return _TABLES[key]


# ---------------------------------------------------------------------------
# bryant

def cmd_bryant(args) -> int:
    if args.q < 2:
        print("error: q must be an integer >= 2", file=sys.stderr)
        return EXIT_USAGE
    try:
        tab = bryant.build_tables(args.q, sigma_max=args.sigma_max, tol=args.tol, B=256.0)
    except (RuntimeError, ValueError) as exc:
        print(f"error: Bryant solve failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tab.to_csv(out / f"bryant_q{args.q}.csv")
    rep = bryant.asymptotics_report(tab)
    (out / f"bryant_q{args.q}_report.json").write_text(json.dumps(rep, indent=2))
    print(json.dumps(rep, indent=2))
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate

def _m_dir(run_dir: Path, m: float) -> Path:
    return run_dir / f"m={m:g}"


def _simulate_one(cfg: RunConfig, m: float, run_dir: str) -> dict:
    pinch = cfg.pinch
    params = cfg.params()
    tab = get_tables(pinch.q, cfg.sigma_max, cfg.tol)
    T1 = cfg.T1(m)
    t0 = time.perf_counter()
    state = solver.mollified_initial(pinch, m, T1, cfg.grid, tab, params)
    outs = np.geomspace(T1, cfg.T_end, cfg.n_outputs)
    traj = solver.run(state, cfg.T_end, output_times=outs, params=params, tables=tab,
                      method=cfg.method, c_dt=cfg.c_dt)
    wall = time.perf_counter() - t0
    d = _m_dir(Path(run_dir), m)
    d.mkdir(parents=True, exist_ok=True)
    solver.write_snapshots(traj, d / "snapshots.csv")
    (d / "monitor.json").write_text(json.dumps(traj.monitor, indent=2, default=float))
    return {"m": m, "T1": T1, "dir": d.name, "steps": traj.steps, "wall_s": wall,
            "n_snapshots": len(traj.snapshots)}


def cmd_simulate(args) -> int:
    try:
        cfg = RunConfig.load(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    run_dir = Path(args.out or cfg.out_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    workers = max(1, int(os.environ.get("WARPED_RICCI_THREADS", "1")))
    workers = min(workers, len(cfg.m_list))
    runs = []
    try:
        if workers == 1:
            for m in cfg.m_list:
                log.info("simulating m=%g", m)
                runs.append(_simulate_one(cfg, m, str(run_dir)))
        else:
            with ProcessPoolExecutor(max_workers=workers) as ex:
                futs = [ex.submit(_simulate_one, cfg, m, str(run_dir)) for m in cfg.m_list]
                runs = [f.result() for f in futs]
    except (solver.SolverError, DomainError, solver.ConfigError, ValueError) as exc:
        print(f"error: simulation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    manifest = {"config": cfg.as_dict(), "pinch_spec": cfg.pinch.spec(),
                "params": cfg.params().as_dict(), "runs": runs}
    (run_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, default=float))
    print(json.dumps({"run_dir": str(run_dir), "runs": runs}, indent=2, default=float))
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify

@dataclass
class LoadedRun:
    cfg: RunConfig
    manifest: dict
    trajectories: Dict[float, solver.Trajectory]


def load_run(run_dir) -> LoadedRun:
    run_dir = Path(run_dir)
    mf = run_dir / "manifest.json"
    if not mf.is_file():
        raise FileNotFoundError(f"{run_dir}: no manifest.json")
    manifest = json.loads(mf.read_text())
    c = manifest["config"]
    cfg = RunConfig(pinch_section=c["pinch"])
    cfg.grid = solver.GridSpec(**c["grid"])
    for k, v in c["time"].items():
        setattr(cfg, k, v)
    cfg.barrier_overrides = c["barriers"]
    cfg.m_list = c["m"]
    cfg.sigma_max, cfg.tol = c["tables"]["sigma_max"], c["tables"]["tol"]
    cfg.checks = c["checks"]
    pinch = cfg.pinch
    trajs = {}
    for r in manifest["runs"]:
        f = run_dir / r["dir"] / "snapshots.csv"
        if not f.is_file():
            raise FileNotFoundError(f"missing artifact {f}")
        trajs[float(r["m"])] = solver.Trajectory(snapshots=solver.read_snapshots(f, pinch))
    if not trajs:
        raise FileNotFoundError(f"{run_dir}: manifest lists no runs")
    return LoadedRun(cfg, manifest, trajs)


def _merge(name: str, reports: Dict[float, verify.CheckReport]) -> verify.CheckReport:
    st = [r.status for r in reports.values()]
    status = "fail" if "fail" in st else ("pass" if "pass" in st else "skipped")
    return verify.CheckReport(name, status,
                              margins={f"m={m:g}": r.margins for m, r in reports.items()},
                              fit_constants={f"m={m:g}": r.fit_constants for m, r in reports.items()},
                              details={f"m={m:g}": r.details for m, r in reports.items()})


def run_checks(loaded: LoadedRun, checks) -> List[verify.CheckReport]:
    cfg = loaded.cfg
    pinch, params = cfg.pinch, cfg.params()
    tab = None
    if any(c in checks for c in ("barricade", "bryant_convergence", "buckling")):
        tab = get_tables(pinch.q, cfg.sigma_max, cfg.tol)
    out = []
    T = loaded.trajectories
    for c in checks:
        if c == "barricade":
            out.append(_merge(c, {m: verify.barricade_monitor(tr, params, tab) for m, tr in T.items()}))
        elif c == "curvature_bound":
            out.append(_merge(c, {m: verify.curvature_bound_check(tr, params) for m, tr in T.items()}))
        elif c == "bryant_convergence":
            out.append(_merge(c, {m: verify.bryant_convergence_check(tr, tab) for m, tr in T.items()}))
        elif c == "buckling":
            out.append(verify.buckling_check(pinch, params, tab))
        elif c == "mollification":
            if len(T) < 2:
                out.append(verify.CheckReport(c, "skipped", details={"reason": "single m"}))
            else:
                out.append(verify.mollification_convergence(T))
        elif c == "approx_residual":
            out.append(_merge(c, {m: verify.approx_residual(tr, pinch.V0, 1.0, params)
                                  for m, tr in T.items()}))
        elif c == "initial_rate":
            out.append(_merge(c, {m: verify.initial_convergence_rate(tr, pinch) for m, tr in T.items()}))
        elif c == "anderson_chow":
            out.append(verify.ac_report())
    return out


def cmd_verify(args) -> int:
    checks = args.checks.replace(",", " ").split() if args.checks else None
    if checks:
        bad = [c for c in checks if c not in CHECKS]
        if bad:
            print(f"error: unknown checks {bad}; choose from {list(CHECKS)}", file=sys.stderr)
            return EXIT_USAGE
    try:
        loaded = load_run(args.run_dir)
    except (FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    checks = checks or loaded.cfg.checks
    bad = [c for c in checks if c not in CHECKS]
    if bad:
        print(f"error: manifest lists unknown checks {bad}", file=sys.stderr)
        return EXIT_USAGE
    try:
        reports = run_checks(loaded, checks)
    except (solver.SolverError, DomainError, ValueError) as exc:
        print(f"error: verification failed to run: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    vdir = Path(args.run_dir) / "verify"
    vdir.mkdir(exist_ok=True)
    summary = {}
    for r in reports:
        (vdir / f"{r.check}.json").write_text(r.to_json(indent=2))
        summary[r.check] = r.status
        print(f"{r.check:22s} {r.status.upper()}")
    (vdir / "summary.json").write_text(json.dumps(summary, indent=2))
    return EXIT_OK if all(s != "fail" for s in summary.values()) else EXIT_FAIL


# ---------------------------------------------------------------------------
# plot

_GP_HEADER = "set terminal pngcairo size 900,600\nset datafile separator whitespace\n"


def _plot_data(loaded: LoadedRun, pdir: Path):
    """Write the whitespace tables behind the plot scripts; returns their names."""
    cfg = loaded.cfg
    pinch, params = cfg.pinch, cfg.params()
    tab = get_tables(pinch.q, cfg.sigma_max, cfg.tol)
    files = {"barriers": [], "tip": [], "curvature": "curvature_trend.dat"}
    curv_rows = []
    for m, tr in sorted(loaded.trajectories.items()):
        fb, ft = f"barriers_m={m:g}.dat", f"tip_m={m:g}.dat"
        with open(pdir / fb, "w") as fh:
            fh.write("# u v V- V+ (one block per snapshot)\n")
            for s in tr.snapshots:
                mask = (s.u > 0) & (s.u + s.mu * s.t < params.u_star)
                u = s.u[mask]
                Vm, Vp, _, _ = barriers.prish_barriers(u, s.t, pinch, params)
                fh.write(f"# t = {s.t:.6g}\n")
                for row in zip(u, s.v[mask], Vm, Vp):
                    fh.write(" ".join(f"{x:.10g}" for x in row) + "\n")
                fh.write("\n\n")
        with open(pdir / ft, "w") as fh:
            fh.write("# sigma v_rescaled V_Bry (one block per snapshot)\n")
            for s in tr.snapshots:
                g, v, _ = solver.rescale_tip(s)
                fh.write(f"# t = {s.t:.6g}\n")
                for row in zip(g, v, tab.V(g)):
                    fh.write(" ".join(f"{x:.10g}" for x in row) + "\n")
                fh.write("\n\n")
        rep = verify.curvature_bound_check(tr, params)
        for t, c in zip(rep.details["t"], rep.details["tip"]):
            curv_rows.append((m, t, c))
        files["barriers"].append(fb)
        files["tip"].append(ft)
    with open(pdir / files["curvature"], "w") as fh:
        fh.write("# m t sup|Rm|*t*nu(t)\n")
        for row in curv_rows:
            fh.write(" ".join(f"{x:.10g}" for x in row) + "\n")
    return files, curv_rows


def _gnuplot_scripts(pdir: Path, files) -> List[str]:
    names = []
    s = [_GP_HEADER, "set output 'barriers.png'\nset logscale xy\n",
         "set xlabel 'u'\nset ylabel 'v'\n"]
    parts = []
    for f in files["barriers"]:
        parts += [f"'{f}' using 1:2 with lines title '{f} v'",
                  f"'{f}' using 1:3 with lines dt 2 notitle",
                  f"'{f}' using 1:4 with lines dt 2 notitle"]
    s.append("plot " + ", \\\n     ".join(parts) + "\n")
    (pdir / "barriers.gp").write_text("".join(s))
    names.append("barriers.gp")
    s = [_GP_HEADER, "set output 'tip.png'\n", "set xlabel 'sigma'\nset ylabel 'v'\n"]
    parts = []
    for f in files["tip"]:
        parts += [f"'{f}' using 1:2 with lines title '{f}'"]
    parts.append(f"'{files['tip'][0]}' index 0 using 1:3 with lines lw 2 title 'V_Bry'")
    s.append("plot " + ", \\\n     ".join(parts) + "\n")
    (pdir / "tip.gp").write_text("".join(s))
    names.append("tip.gp")
    s = [_GP_HEADER, "set output 'curvature.png'\nset logscale xy\n",
         "set xlabel 't'\nset ylabel 'sup|Rm| t nu(t)'\n",
         f"plot '{files['curvature']}' using 2:3 with linespoints title 'tip'\n"]
    (pdir / "curvature.gp").write_text("".join(s))
    names.append("curvature.gp")
    return names


def _render_png(loaded: LoadedRun, pdir: Path, curv_rows):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    cfg = loaded.cfg
    pinch, params = cfg.pinch, cfg.params()
    tab = get_tables(pinch.q, cfg.sigma_max, cfg.tol)
    m0 = sorted(loaded.trajectories)[len(loaded.trajectories) // 2]
    tr = loaded.trajectories[m0]

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for s in tr.snapshots[:: max(1, len(tr.snapshots) // 4)]:
        mask = (s.u > 0) & (s.u + s.mu * s.t < params.u_star)
        u = s.u[mask]
        Vm, Vp, _, _ = barriers.prish_barriers(u, s.t, pinch, params)
        line, = ax.loglog(u, s.v[mask], label=f"t={s.t:.2e}")
        ax.fill_between(u, np.maximum(Vm, 1e-12), Vp, color=line.get_color(), alpha=0.15)
    ax.set_xlabel("u")
    ax.set_ylabel("v")
    ax.set_title(f"productish barriers, m={m0:g}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(pdir / "barriers.png", dpi=120)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for s in tr.snapshots[1:]:
        g, v, _ = solver.rescale_tip(s)
        ax.plot(g, v, lw=0.8, label=f"t={s.t:.2e}")
    g = np.linspace(0, 10, 201)
    ax.plot(g, tab.V(g), "k--", lw=1.5, label="V_Bry")
    ax.set_xlabel("sigma")
    ax.set_ylabel("v")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(pdir / "tip.png", dpi=120)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for m in sorted({r[0] for r in curv_rows}):
        rows = [r for r in curv_rows if r[0] == m]
        ax.loglog([r[1] for r in rows], [r[2] for r in rows], "o-", label=f"m={m:g}")
    ax.set_xlabel("t")
    ax.set_ylabel("sup|Rm| t nu(t)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(pdir / "curvature.png", dpi=120)
    plt.close(fig)
    return ["barriers.png", "tip.png", "curvature.png"]


def cmd_plot(args) -> int:
    run_dir = Path(args.run_dir)
    try:
        loaded = load_run(run_dir)
    except (FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    pdir = run_dir / "plots"
    pdir.mkdir(exist_ok=True)
    files, curv_rows = _plot_data(loaded, pdir)
    scripts = _gnuplot_scripts(pdir, files)
    pngs = [] if args.no_render else _render_png(loaded, pdir, curv_rows)
    print(json.dumps({"scripts": scripts, "png": pngs, "dir": str(pdir)}, indent=2))
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate-pinch

def cmd_validate_pinch(args) -> int:
    try:
        if Path(args.pinch).exists() or args.pinch.endswith(".cfg"):
            path = resolve_config(args.pinch)
            cp = configparser.ConfigParser(interpolation=None)
            cp.optionxform = str
            cp.read(path)
            p = pinch_mod.pinch_from_config(cp["pinch"])
        else:
            p = pinch_mod.get_pinch(args.pinch)
    except (KeyError, ValueError, ConfigError, configparser.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rep = pinch_mod.validate_model_pinch(p)
    print(json.dumps(rep.as_dict(), indent=2, default=float))
    return EXIT_OK if rep.passed else EXIT_FAIL


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="warped-ricci", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    b = sub.add_parser("bryant", help="solve the soliton profile and write tables")
    b.add_argument("--q", type=int, default=2)
    b.add_argument("--sigma-max", type=float, default=1e3)
    b.add_argument("--tol", type=float, default=1e-10)
    b.add_argument("--out", default=".")
    b.set_defaults(func=cmd_bryant)

    s = sub.add_parser("simulate", help="run the flow for every mollification scale")
    s.add_argument("config", help="config path or bundled name (ak-reference.cfg)")
    s.add_argument("--out", help="run directory (overrides [output] dir)")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="replay a run directory and run checks")
    v.add_argument("run_dir")
    v.add_argument("--checks", help=f"comma list from {','.join(CHECKS)}")
    v.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot", help="write gnuplot scripts and PNG figures")
    p.add_argument("run_dir")
    p.add_argument("--no-render", action="store_true", help="scripts and data only")
    p.set_defaults(func=cmd_plot)

    vp = sub.add_parser("validate-pinch", help="check the model-pinch conditions")
    vp.add_argument("pinch", help="builtin name or config file with a [pinch] section")
    vp.set_defaults(func=cmd_validate_pinch)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
