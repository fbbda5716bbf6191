"""Command-line front end: tdpainleve {potential,modes,verify,propagate,oscillator}.

Configuration is a plain ``key = value`` file (no section headers needed);
see configs/ for complete examples. Recognised keys:

    profile      constant | tanh | tabulated
    omega0_sq    constant profile Omega^2
    omega1, omega2, slope      tanh profile 4 Omega^2 = omega1 + omega2 tanh(slope t)
    profile_csv  tabulated profile file (t, omega_sq)
    a, c, sign_b, t0           Ermakov coefficients and reference time
    t_start, t_end, t_samples  time window and number of output times
    hierarchy    erfc | riccati | pseudo_hermite | okamoto | nonlinear_bound
    lam, gamma, mu, k_a, k_b, k, N, M    hierarchy parameters
    grid_points  spatial points (default 4096)
    n_max        raising steps per zero mode (modes, verify)
    mode         zero-mode label to propagate (default: first)
    n            oscillator level (oscillator)
    tol          verification tolerance multiplier (default 1)

Exit codes: 0 success, 2 invalid input or constraint violation,
3 numerical tolerance failure.
"""
from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .ermakov import (
    ConstantFrequency,
    ErmakovSolution,
    TanhFrequency,
    load_profile_csv,
    make_ermakov,
    phase_theta,
    solve_linear_basis,
)
from .errors import ConstraintError, NumericalError
from .hamiltonian import (
    PotentialField,
    oscillator_state,
    potential_V1,
    potential_V1_deformation,
    read_potential_csv,
    write_potential_csv,
)
from .invariant import (
    SCHEMA_VERSION,
    GridFunction,
    apply_Adag,
    apply_I0,
    apply_I1,
    build_superpotentials,
    high_band_fraction,
    decay_rate,
    eigen_residual,
    export_states,
    generate_sequence,
    make_grid,
    mode_at,
    node_count,
    norm,
    zero_modes,
)
from .painleve4 import (
    CERT_WINDOW,
    PainleveSolution,
    erfc_solution,
    nonlinear_bound_solution,
    okamoto_solution,
    pseudo_hermite_solution,
    riccati_physical,
    riccati_solution,
)
from .tdse import PropagatorConfig, export_trajectory, fidelity, invariant_drift, propagate_trajectory

EXIT_OK, EXIT_CONSTRAINT, EXIT_NUMERICAL = 0, 2, 3

HIERARCHIES = ("erfc", "riccati", "pseudo_hermite", "okamoto", "nonlinear_bound")


@dataclass
class RunConfig:
    profile: str = "constant"
    omega0_sq: float = 1.0
    omega1: float = 15.0
    omega2: float = 10.0
    slope: float = 0.5
    profile_csv: str | None = None
    a: float = 1.0
    c: float = 1.0
    sign_b: int = 1
    t0: float = 0.0
    t_start: float = 0.0
    t_end: float | None = None
    t_samples: int = 11
    hierarchy: str = "erfc"
    lam: float = 1.0
    gamma: float = 0.0
    mu: int = -1
    k_a: float = 1.0
    k_b: float = 0.0
    k: float = 0.3
    N: int = 1
    M: int = 2
    grid_points: int = 4096
    n_max: int = 3
    mode: str | None = None
    n: int = 0
    tol: float = 1.0
    source: str = field(default="<defaults>", repr=False)

    def __post_init__(self):
        if self.profile not in ("constant", "tanh", "tabulated"):
            raise ConstraintError(f"profile must be constant, tanh or tabulated (got {self.profile!r})")
        if self.profile == "tabulated" and not self.profile_csv:
            raise ConstraintError("tabulated profile needs profile_csv = <path>")
        if self.hierarchy not in HIERARCHIES:
            raise ConstraintError(f"hierarchy must be one of {', '.join(HIERARCHIES)} (got {self.hierarchy!r})")
        if self.sign_b not in (1, -1):
            raise ConstraintError("sign_b must be 1 or -1")
        if self.mu not in (1, -1):
            raise ConstraintError("mu must be 1 or -1")
        if self.grid_points < 64:
            raise ConstraintError("grid_points must be at least 64")
        if self.t_samples < 2:
            raise ConstraintError("t_samples must be at least 2")
        if not self.tol > 0:
            raise ConstraintError("tol must be positive")
        if self.lam <= 0:
            raise ConstraintError("lam must be positive")
        if self.t_end is None:
            self.t_end = self.t_start + self.default_span()
        if not self.t_end > self.t_start:
            raise ConstraintError("t_end must exceed t_start")
        if not self.t_start <= self.t0 <= self.t_end:
            raise ConstraintError("t0 must lie in [t_start, t_end]")

    def default_span(self) -> float:
        # one period of sigma for a constant frequency, else a unit interval
        if self.profile == "constant":
            if self.omega0_sq <= 0:
                raise ConstraintError("omega0_sq must be positive")
            return math.pi / (2 * math.sqrt(self.omega0_sq))
        return 1.0

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.t_samples)


_TYPES = {f: t for f, t in RunConfig.__annotations__.items()}


def _convert(key: str, raw: str):
    kind = _TYPES[key]
    try:
        if "int" in kind:
            return int(raw)
        if "float" in kind:
            return float(raw)
    except ValueError:
        raise ConstraintError(f"config key {key!r}: cannot parse {raw!r} as {kind}") from None
    return raw


def load_config(path: str | None, overrides: dict | None = None) -> RunConfig:
    values: dict = {}
    source = "<defaults>"
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConstraintError(f"config file {path} not found")
        cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        cp.optionxform = str
        text = p.read_text()
        if not text.lstrip().startswith("["):
            text = "[run]\n" + text
        try:
            cp.read_string(text, source=str(p))
        except configparser.Error as exc:
            raise ConstraintError(f"config file {path}: {exc}") from None
        for sec in cp.sections():
            for key, raw in cp.items(sec):
                if key not in _TYPES or key == "source":
                    raise ConstraintError(f"config file {path}: unknown key {key!r}")
                values[key] = _convert(key, raw.strip())
        source = str(p)
        if "profile_csv" in values:
            csv_path = Path(values["profile_csv"])
            if not csv_path.is_absolute():
                values["profile_csv"] = str(p.parent / csv_path)
    for key, val in (overrides or {}).items():
        if val is not None:
            values[key] = val
    return RunConfig(**values, source=source)


# ---------------------------------------------------------------------------
# construction from a config


@dataclass
class System:
    cfg: RunConfig
    erm: ErmakovSolution
    sol: PainleveSolution
    S: object
    grid: object


def build_ermakov(cfg: RunConfig) -> ErmakovSolution:
    if cfg.profile == "constant":
        prof = ConstantFrequency(cfg.omega0_sq)
    elif cfg.profile == "tanh":
        prof = TanhFrequency(cfg.omega1, cfg.omega2, cfg.slope)
    else:
        prof = load_profile_csv(cfg.profile_csv)
    pad = 0.05 * (cfg.t_end - cfg.t_start)
    window = (cfg.t_start - pad, cfg.t_end + pad)
    if cfg.profile == "tabulated":
        window = (max(window[0], prof.t_start), min(window[1], prof.t_end))
    return make_ermakov(solve_linear_basis(prof, cfg.t0, window), cfg.a, cfg.c, cfg.sign_b)


def build_painleve(cfg: RunConfig) -> PainleveSolution:
    h = cfg.hierarchy
    if h == "erfc":
        return erfc_solution(cfg.k, cfg.lam)
    if h == "pseudo_hermite":
        return pseudo_hermite_solution(cfg.N, cfg.lam)
    if h == "okamoto":
        return okamoto_solution(cfg.M, cfg.lam)
    if h == "nonlinear_bound":
        return nonlinear_bound_solution(cfg.N, cfg.k, cfg.lam)
    return riccati_solution(riccati_physical(cfg.lam, cfg.gamma, cfg.mu), cfg.mu, cfg.k_a, cfg.k_b)


def build_system(cfg: RunConfig) -> System:
    erm = build_ermakov(cfg)
    sol = build_painleve(cfg)
    S = build_superpotentials(sol)
    grid = make_grid(erm, S.lam, np.linspace(cfg.t_start, cfg.t_end, 401), n=cfg.grid_points, omega=decay_rate(sol))
    return System(cfg, erm, sol, S, grid)


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps({"schema_version": SCHEMA_VERSION, **payload}, indent=2, default=_jsonable))


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(type(o).__name__)


def _describe(cfg: RunConfig) -> dict:
    return {k: v for k, v in cfg.__dict__.items() if k != "source"}


# ---------------------------------------------------------------------------
# commands


def _potential_surface(sys_: System, times):
    return np.array([potential_V1(sys_.S, sys_.erm, sys_.grid.x, t) for t in times])


def cmd_potential(cfg: RunConfig, out: Path) -> int:
    s = build_system(cfg)
    times = cfg.times
    V = _potential_surface(s, times)
    if not np.all(np.isfinite(V)):
        raise NumericalError("potential has non-finite samples")
    out.mkdir(parents=True, exist_ok=True)
    write_potential_csv(out / "potential.csv", s.grid.x, times, V)
    V_alt = np.array([potential_V1_deformation(s.S, s.erm, s.grid.x, t) for t in times])
    dev = float(np.max(np.abs(V - V_alt) / np.maximum(1.0, np.abs(V))))
    _write_json(out / "potential.json", {
        "command": "potential",
        "config": _describe(cfg),
        "hierarchy": s.sol.hierarchy.name,
        "shape": [len(times), s.grid.n],
        "two_route_max_rel_diff": dev,
    })
    print(f"wrote {out / 'potential.csv'} ({len(times)} times x {s.grid.n} points); two-route diff {dev:.2e}")
    return EXIT_OK


def _spectrum(s: System, t: float, n_max: int, tol: float):
    report = []
    modes = zero_modes(s.S, s.erm, s.sol, t, s.grid, report)
    entries, states = [], []
    for m in modes:
        seq = [(m.psi, m.Lam)]
        if m.kind in ("A", "both") and n_max > 0:
            seq = generate_sequence(s.S, s.erm, m, n_max, tol=1e-5 * tol)
        for j, (psi, Lam) in enumerate(seq):
            label = m.label if j == 0 else f"{m.label}+{j}"
            entries.append({
                "label": label,
                "Lambda": Lam,
                "Lambda_over_lambda": Lam / s.S.lam,
                "kind": m.kind if j == 0 else "raised",
                "nodes": m.node_count if j == 0 else None,
                "eigen_residual": m.residual if j == 0 else eigen_residual(s.S, s.erm, psi, Lam),
            })
            states.append((psi, label, Lam))
    return modes, report, entries, states


def cmd_modes(cfg: RunConfig, out: Path) -> int:
    s = build_system(cfg)
    modes, report, entries, states = _spectrum(s, cfg.t0, cfg.n_max, cfg.tol)
    export_states([p for p, _, _ in states], [lab for _, lab, _ in states], [L for _, _, L in states], out)
    for e, (psi, _, _) in zip(entries, states):
        if e["nodes"] is None:
            e["nodes"] = node_count(psi)
    _write_json(out / "spectrum.json", {
        "command": "modes",
        "config": _describe(cfg),
        "t": cfg.t0,
        "hierarchy": s.sol.hierarchy.name,
        "discarded": [{"label": lab, "reason": why} for lab, why in report],
        "states": entries,
    })
    for e in entries:
        print(f"{e['label']:>14}  Lambda={e['Lambda']:.10g}  nodes={e['nodes']}  residual={e['eigen_residual']:.2e}")
    return EXIT_OK


def _check(name, value, tol, hint=""):
    ok = bool(np.isfinite(value) and value < tol)
    out = {"name": name, "value": float(value), "tol": tol, "pass": ok}
    if hint and not ok:
        out["hint"] = hint
    return out


def _random_states(s: System, t: float, count: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    sig, ds = s.erm(t)
    sig, ds = float(sig), float(ds)
    x = s.grid.x
    y = math.sqrt(s.S.lam * decay_rate(s.sol)) * x / sig
    out = []
    for _ in range(count):
        c = rng.normal(size=6) + 1j * rng.normal(size=6)
        v = np.polynomial.polynomial.polyval(y, c) * np.exp(-0.5 * y * y + 0.25j * ds * x * x / sig)
        out.append(GridFunction(v, s.grid, t, s.erm).normalized())
    return out


def verify_system(s: System, tol: float = 1.0, potential_csv: str | None = None) -> list[dict]:
    """All residual checks for one configured system."""
    cfg, erm, S = s.cfg, s.erm, s.S
    checks = []
    y = np.linspace(*CERT_WINDOW, 1000)
    checks.append(_check("painleve_residual", s.sol.residual(y), 1e-7 * tol))
    tt = np.linspace(cfg.t_start, cfg.t_end, 201)
    checks.append(_check("ermakov_residual", float(np.max(np.abs(erm.residual(tt)))), 1e-8 * tol))
    Wr = erm.basis.wronskian(tt)
    checks.append(_check("wronskian_drift", float(np.max(np.abs(Wr - erm.basis.W0)) / abs(erm.basis.W0)), 1e-10 * tol))

    x = s.grid.x
    times = cfg.times
    dev = 0.0
    for t in times:
        V = potential_V1(S, erm, x, t)
        V2 = potential_V1_deformation(S, erm, x, t)
        dev = max(dev, float(np.max(np.abs(V - V2) / np.maximum(1.0, np.abs(V)))))
    checks.append(_check("potential_two_route", dev, 1e-9 * tol))

    if potential_csv is not None:
        xs, ts, Vs = read_potential_csv(potential_csv)
        ref = np.array([potential_V1(S, erm, xs, t) for t in ts])
        diff = float(np.max(np.abs(ref - Vs) / np.maximum(1.0, np.abs(ref))))
        checks.append(_check("potential_csv_reproduced", diff, 1e-12 * tol, "CSV was produced by a different configuration"))

    modes = zero_modes(S, erm, s.sol, cfg.t0, s.grid)
    res_hint = "grid too coarse for the sixth-order stencils; increase grid_points"
    for m in modes:
        frac = high_band_fraction(m.psi)
        checks.append(_check(f"resolution[{m.label}]", frac, 1e-12, res_hint))
    t5 = np.linspace(cfg.t_start, cfg.t_end, 5)
    for m in modes:
        r = max(eigen_residual(S, erm, mode_at(m, S, erm, t, s.grid), m.Lam) for t in t5)
        checks.append(_check(f"zero_mode_residual[{m.label}]", r, 1e-6 * tol, res_hint))

    tsi = 0.5 * (cfg.t_start + cfg.t_end)
    worst = 0.0
    for psi in _random_states(s, tsi, 20):
        Ad = apply_Adag(S, erm, psi)
        lhs = apply_I1(S, erm, Ad)
        rhs = apply_Adag(S, erm, apply_I1(S, erm, psi) + psi * (2 * S.lam))
        worst = max(worst, norm(lhs - rhs) / norm(Ad))
    checks.append(_check("shape_invariance", worst, 1e-5 * tol, res_hint))
    return checks


def cmd_verify(cfg: RunConfig, out: Path, potential_csv: str | None = None) -> int:
    s = build_system(cfg)
    checks = verify_system(s, cfg.tol, potential_csv)
    ok = all(c["pass"] for c in checks)
    _write_json(out / "verify.json", {
        "command": "verify",
        "config": _describe(cfg),
        "hierarchy": s.sol.hierarchy.name,
        "pass": ok,
        "checks": checks,
    })
    for c in checks:
        line = f"{'PASS' if c['pass'] else 'FAIL'}  {c['name']:<32} {c['value']:.3e}  (tol {c['tol']:.0e})"
        if "hint" in c:
            line += f"  hint: {c['hint']}"
        print(line)
    return EXIT_OK if ok else EXIT_NUMERICAL


def _pick_mode(modes, label):
    if not modes:
        raise ConstraintError("hierarchy has no finite-norm zero modes to propagate")
    if label is None:
        return modes[0]
    for m in modes:
        if m.label == label:
            return m
    raise ConstraintError(f"no zero mode labelled {label!r}; available: {', '.join(m.label for m in modes)}")


def _trajectory_report(traj, exact_states, phases):
    fids, phase_err = [], []
    for psi, ex, th in zip(traj.states, exact_states, phases):
        fids.append(fidelity(ex, psi))
        ov = np.vdot(ex.values, psi.values)
        d = np.angle(ov * np.exp(-1j * th))
        phase_err.append(abs(d))
    return min(fids), max(phase_err)


def cmd_propagate(cfg: RunConfig, out: Path, t1: float | None = None) -> int:
    s = build_system(cfg)
    modes = zero_modes(s.S, s.erm, s.sol, cfg.t0, s.grid)
    m = _pick_mode(modes, cfg.mode)
    t_end = cfg.t_end if t1 is None else float(t1)
    if not cfg.t0 < t_end <= cfg.t_end + 1e-12:
        raise ConstraintError(f"propagation end time must lie in ({cfg.t0}, {cfg.t_end}]")
    times = np.linspace(cfg.t0, t_end, cfg.t_samples)
    start = time.perf_counter()
    traj = propagate_trajectory(m.psi, PotentialField(s.S, s.erm), times, PropagatorConfig())
    elapsed = time.perf_counter() - start
    exact = [mode_at(m, s.S, s.erm, t, s.grid) for t in times]
    phases = [phase_theta(s.erm, m.Lam, t, cfg.t0) for t in times]
    fmin, perr = _trajectory_report(traj, exact, phases)
    drift = invariant_drift(traj.states, s.S)
    norm_drift = max(abs(norm(p) - 1.0) for p in traj.states)
    checks = [
        _check("infidelity", 1 - fmin, 1e-4 * cfg.tol),
        _check("phase_error", perr, 1e-3 * cfg.tol),
        _check("invariant_drift", drift, (1e-4 if abs(m.Lam) > 0 else 1e-6) * cfg.tol),
        _check("norm_drift", norm_drift, 1e-9 * cfg.tol),
    ]
    out.mkdir(parents=True, exist_ok=True)
    export_trajectory(traj, out / "trajectory.csv", every=max(1, s.grid.n // 512))
    ok = all(c["pass"] for c in checks)
    _write_json(out / "propagate.json", {
        "command": "propagate",
        "config": _describe(cfg),
        "mode": m.label,
        "Lambda": m.Lam,
        "dt": traj.dt,
        "steps": traj.steps,
        "runtime_s": elapsed,
        "pass": ok,
        "checks": checks,
    })
    for c in checks:
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {c['name']:<16} {c['value']:.3e}  (tol {c['tol']:.0e})")
    print(f"{traj.steps} steps of dt={traj.dt:.2e} in {elapsed:.1f}s")
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_oscillator(cfg: RunConfig, out: Path, tdse: bool = True) -> int:
    erm = build_ermakov(cfg)
    times = cfg.times
    grid = make_grid(erm, 1.0, np.linspace(cfg.t_start, cfg.t_end, 401), n=cfg.grid_points,
                     edge_y=8.5 + math.sqrt(2 * cfg.n + 1))
    states = [oscillator_state(erm, cfg.n, grid, t, cfg.t0) for t in times]
    Lam = 2.0 * cfg.n + 1.0
    res = max(norm(apply_I0(erm, st.psi) - st.psi * Lam) / norm(st.psi) for st in states)
    checks = [_check("invariant_residual", res, 1e-6 * cfg.tol)]
    payload = {"command": "oscillator", "config": _describe(cfg), "n": cfg.n, "Lambda": Lam}
    if tdse:
        psi0 = states[0].psi * np.exp(1j * states[0].theta)
        traj = propagate_trajectory(psi0, lambda x, t: erm.omega_sq(t) * x * x, times)
        exact = [GridFunction(st.values, grid, st.psi.t, erm) for st in states]
        fmin, perr = _trajectory_report(traj, exact, [0.0] * len(times))
        checks.append(_check("infidelity", 1 - fmin, 1e-5 * cfg.tol))
        checks.append(_check("phase_error", perr, 1e-3 * cfg.tol))
    export_states([st.psi for st in states], [f"n{cfg.n}_t{i}" for i in range(len(times))], [Lam] * len(times), out)
    ok = all(c["pass"] for c in checks)
    _write_json(out / "oscillator.json", {**payload, "theta": [st.theta for st in states],
                                          "times": times, "pass": ok, "checks": checks})
    for c in checks:
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {c['name']:<20} {c['value']:.3e}  (tol {c['tol']:.0e})")
    return EXIT_OK if ok else EXIT_NUMERICAL


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tdpainleve", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--grid-points", type=int, dest="grid_points", help="override grid_points")
    common.add_argument("--tol", type=float, help="scale all tolerances by this factor")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("potential", parents=[common], help="V1(x, t) on the grid as CSV")
    p = sub.add_parser("modes", parents=[common], help="zero modes and raised states")
    p.add_argument("--n-max", type=int, dest="n_max", help="raising steps per zero mode")
    p = sub.add_parser("verify", parents=[common], help="residual checks, JSON report")
    p.add_argument("--potential", help="re-verify a potential CSV written by 'potential'")
    p = sub.add_parser("propagate", parents=[common], help="TDSE cross-check of one zero mode")
    p.add_argument("--mode", help="zero-mode label (see 'modes')")
    p.add_argument("--t1", type=float, help="end time (default t_end)")
    p = sub.add_parser("oscillator", parents=[common], help="parametric-oscillator baseline states")
    p.add_argument("--n", type=int, help="oscillator level")
    p.add_argument("--no-tdse", action="store_true", help="skip the propagation check")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"grid_points": args.grid_points, "tol": args.tol}
    for key in ("n_max", "mode", "n"):
        if hasattr(args, key):
            overrides[key] = getattr(args, key)
    out = Path(args.out)
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "potential":
            return cmd_potential(cfg, out)
        if args.command == "modes":
            return cmd_modes(cfg, out)
        if args.command == "verify":
            return cmd_verify(cfg, out, args.potential)
        if args.command == "propagate":
            return cmd_propagate(cfg, out, args.t1)
        return cmd_oscillator(cfg, out, not args.no_tdse)
    except ConstraintError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except NumericalError as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
