"""Command-line entry point: configuration, orchestration, artifact output.

Configs are flat ``key = value`` text with dotted keys (see ``SCHEMA``);
every run writes machine-readable JSON and CSV artifacts with floats
serialized at 17 significant digits, so identical config and seed produce
byte-identical reports.  Exit codes: 0 all checks passed, 1 a check failed,
2 configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .auxiliary import AuxiliaryField, ConfigurationError, check_seminorm_growth, \
    holder_seminorm
from .coefficients import EllipticityError, check_ellipticity, check_holder
from .geometry import GeometryError, LocalRegion
from .mesh import generate
from .oracle import brute_force_seminorm, exact_affine_case, finite_difference_reference
from .solver import assemble, dirichlet_values, gradient_at, solve_dirichlet
from .verify import (PlanError, SweepPlan, check_energy_scaling, check_lower_bound,
                     check_profile, profile_constant, run_sweep)
from .coefficients import identity_coefficients


class ConfigError(ValueError):
    """Bad key, bad value, or missing config file."""


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def _floats(text: str):
    return tuple(float(t) for t in str(text).split(",") if t.strip() != "")


SCHEMA = {
    # key: (parser, default)
    "epsilon": (float, 1e-2),
    "gamma": (float, 0.5),
    "dim": (int, 2),
    "profile.kind": (str, "power"),
    "profile.c1": (float, 1.0),
    "profile.c2": (float, -1.0),
    "system.kind": (str, "lame"),
    "system.lambda1": (float, 1.0),
    "system.mu1": (float, 1.0),
    "system.m": (int, 1),
    "bc.kind": (str, "constant_jump"),
    "bc.phi": (_floats, (1.0, 0.0)),
    "bc.psi": (_floats, (0.0, 0.0)),
    "mesh.layers": (int, 12),
    "mesh.aspect": (float, 2.0),
    "mesh.dxmax": (float, 0.02),
    "mesh.xrange": (float, 1.0),
    "sweep.epsilons": (_floats, (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)),
    "energy.aspect": (float, 0.25),
    "energy.layers": (int, 16),
    "energy.xrange": (float, 0.75),
    "energy.zprimes": (_floats, (0.04, 0.0566, 0.08, 0.1131, 0.16)),
    "probes.centerline": (int, 33),
    "probes.profile": (int, 65),
    "probes.offset": (float, 0.05),
    "reliability.threshold": (float, 0.10),
    "lateral": (str, "auxiliary"),
    "quadrature": (int, 3),
    "prop21.s_fractions": (_floats, (0.25, 0.5, 1.0)),
    "prop21.pairs": (int, 2000),
    "prop21.zprimes": (str, "0,neck,0.25"),
    "coeffcheck.samples": (int, 10_000),
    "coeffcheck.pairs": (int, 10_000),
    "checks.stability_factor": (float, 3.0),
    "checks.exponent_band": (float, 0.2),
    "validate.samples": (int, 1000),
    "seed": (int, 0),
}


def parse_config_text(text: str) -> dict:
    """Flat dotted-key config; '#' starts a comment; unknown keys are errors."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        out[key] = value
    return out


def effective_config(path: str | None, overrides: list[str], seed: int | None) -> dict:
    """Defaults, then the config file, then --set overrides, then --seed."""
    raw = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {path}")
        raw.update(parse_config_text(p.read_text()))
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        raw[key] = value
    cfg = {}
    for key, (parser, default) in SCHEMA.items():
        if key in raw:
            try:
                cfg[key] = parser(raw[key])
            except ConfigError:
                raise
            except Exception as exc:
                raise ConfigError(f"bad value for {key!r}: {raw[key]!r} ({exc})")
        else:
            cfg[key] = default
    if seed is not None:
        cfg["seed"] = int(seed)
    return cfg


def plan_from_config(cfg: dict) -> SweepPlan:
    plan = SweepPlan(
        epsilons=cfg["sweep.epsilons"],
        gamma=cfg["gamma"],
        profile_kind=cfg["profile.kind"],
        profile_c1=cfg["profile.c1"],
        profile_c2=cfg["profile.c2"],
        system_kind=cfg["system.kind"],
        lambda1=cfg["system.lambda1"],
        mu1=cfg["system.mu1"],
        m=cfg["system.m"],
        bc_kind=cfg["bc.kind"],
        bc_phi=cfg["bc.phi"],
        bc_psi=cfg["bc.psi"],
        mesh_layers=cfg["mesh.layers"],
        mesh_aspect=cfg["mesh.aspect"],
        mesh_dxmax=cfg["mesh.dxmax"],
        mesh_xrange=cfg["mesh.xrange"],
        energy_aspect=cfg["energy.aspect"],
        energy_layers=cfg["energy.layers"],
        energy_xrange=cfg["energy.xrange"],
        energy_zprimes=cfg["energy.zprimes"],
        probes_centerline=cfg["probes.centerline"],
        probes_profile=cfg["probes.profile"],
        probe_offset=cfg["probes.offset"],
        reliability_threshold=cfg["reliability.threshold"],
        lateral=cfg["lateral"],
        quadrature=cfg["quadrature"],
        seed=cfg["seed"],
    )
    plan.validate()
    return plan


# ---------------------------------------------------------------------------
# deterministic serialization (17 significant digits)
# ---------------------------------------------------------------------------

def fmt_float(x: float) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    xf = float(x)
    if not np.isfinite(xf):
        return "null"
    return format(xf, ".17g")


def dumps(obj, indent: int = 0) -> str:
    """Minimal JSON writer with fixed float formatting and insertion order."""
    pad = "  " * indent
    pin = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, str):
        escaped = obj.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        return f'"{escaped}"'
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = [dumps(v, indent + 1) for v in obj]
        if not items:
            return "[]"
        return "[\n" + ",\n".join(pin + s for s in items) + "\n" + pad + "]"
    if isinstance(obj, dict):
        items = [f'{pin}"{k}": {dumps(v, indent + 1)}' for k, v in obj.items()]
        if not items:
            return "{}"
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def write_json(path: Path, obj) -> None:
    path.write_text(dumps(obj) + "\n")


def _csv_row(values) -> str:
    parts = []
    for v in values:
        if isinstance(v, str):
            parts.append(v)
        elif isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            parts.append(str(int(v)))
        else:
            parts.append(fmt_float(v))
    return ",".join(parts)


# ---------------------------------------------------------------------------
# artifact emission
# ---------------------------------------------------------------------------

def emit_tables(report, outdir: Path) -> list[str]:
    """sweep.csv, per-epsilon profile CSVs, and the log-log rate table."""
    written = []
    rows = ["epsilon,M_center,C_upper,C_lower,energy_E0,flags"]
    for r in report.records:
        flags = ";".join(r.flags) if r.flags else ""
        e0 = getattr(r, "energy_E0", None)
        rows.append(_csv_row([r.epsilon, r.M_center, r.C_upper,
                              r.C_lower if r.C_lower is not None else float("nan"),
                              e0 if e0 is not None else float("nan"), flags]))
    (outdir / "sweep.csv").write_text("\n".join(rows) + "\n")
    written.append("sweep.csv")
    for r in report.records:
        name = f"profile_{r.epsilon:.6g}.csv"
        lines = ["x,grad_norm"]
        lines += [_csv_row([a, b]) for a, b in zip(r.profile_xp, r.profile_grad)]
        (outdir / name).write_text("\n".join(lines) + "\n")
        written.append(name)
    lines = ["epsilon,M_center"]
    lines += [_csv_row([r.epsilon, r.M_center]) for r in report.records]
    (outdir / "rate_center.csv").write_text("\n".join(lines) + "\n")
    written.append("rate_center.csv")
    return written


def export_solution_text(sol) -> str:
    """Header ``vertices N m M`` then one line of m values per vertex."""
    n, m = sol.values.shape
    lines = [f"vertices {n} m {m}"]
    for row in sol.values:
        lines.append(" ".join(fmt_float(v) for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_validate_geometry(cfg, outdir: Path) -> int:
    from .geometry import GapGeometry
    plan = plan_from_config(cfg)
    if cfg["profile.kind"] == "power":
        geom = GapGeometry.power_law(cfg["epsilon"], cfg["gamma"], cfg["profile.c1"],
                                     cfg["profile.c2"], dim=cfg["dim"])
    else:
        geom = plan.geometry(cfg["epsilon"])
    result = {"epsilon": cfg["epsilon"], "gamma": cfg["gamma"], "dim": cfg["dim"],
              "kappa0": geom.kappa0, "kappa1": geom.kappa1, "kappa2": geom.kappa2}
    try:
        geom.validate(samples=cfg["validate.samples"], seed=cfg["seed"])
        result["passed"] = True
    except GeometryError as exc:
        result["passed"] = False
        result["error"] = str(exc)
    write_json(outdir / "geometry.json", result)
    print(("PASS" if result["passed"] else "FAIL") + " geometry validation")
    return 0 if result["passed"] else 1


def _cmd_validate_coefficients(cfg, outdir: Path) -> int:
    plan = plan_from_config(cfg)
    cs = plan.coefficients()
    geom = plan.geometry(cfg["epsilon"])
    rng = np.random.default_rng(cfg["seed"])
    pts = geom.sample_points(max(64, int(np.sqrt(cfg["coeffcheck.samples"]))), rng)
    result = {"system": cs.name, "claimed_lambda": cs.lam, "claimed_kappa3": cs.kappa3}
    ok = True
    try:
        meas = check_ellipticity(cs, samples=cfg["coeffcheck.samples"], points=pts,
                                 seed=cfg["seed"])
        result["measured_lambda"] = meas.value
        result["near_ties"] = meas.near_ties
    except EllipticityError as exc:
        ok = False
        result["error"] = str(exc)
    k3 = check_holder(cs, pair_samples=cfg["coeffcheck.pairs"], points=pts,
                      seed=cfg["seed"])
    result["measured_kappa3"] = k3
    if k3 > cs.kappa3:
        ok = False
        result["kappa3_exceeded"] = True
    result["passed"] = ok
    write_json(outdir / "coefficients.json", result)
    print(("PASS" if ok else "FAIL") + " coefficient validation")
    return 0 if ok else 1


def _cmd_solve(cfg, outdir: Path) -> int:
    plan = plan_from_config(cfg)
    eps = cfg["epsilon"]
    geom = plan.geometry(eps)
    cs = plan.coefficients()
    data = plan.boundary_data(geom)
    mesh = generate(geom, plan.mesh_layers, plan.mesh_aspect, plan.mesh_dxmax,
                    plan.mesh_xrange)
    system = assemble(mesh, cs, quadrature=plan.quadrature)
    bc = dirichlet_values(mesh, data, lateral=plan.lateral)
    sol = solve_dirichlet(system, bc)
    (outdir / "mesh.txt").write_text(mesh.export_text())
    (outdir / "solution.txt").write_text(export_solution_text(sol))
    lines = ["x,y,comp,dudx,dudy"]
    w0 = float(geom.gap_width(np.zeros(1)))
    xn = np.linspace(float(geom.bottom(np.zeros(1))) + plan.probe_offset * w0,
                     float(geom.top(np.zeros(1))) - plan.probe_offset * w0,
                     plan.probes_centerline)
    xp = np.linspace(-0.5, 0.5, plan.probes_profile)
    mid = geom.midline(xp[:, None])
    probes = [(0.0, t) for t in xn] + list(zip(xp, mid))
    for x, y in probes:
        g = gradient_at(sol, (x, y))
        for comp in range(g.shape[0]):
            lines.append(_csv_row([x, y, comp, g[comp, 0], g[comp, 1]]))
    (outdir / "gradients.csv").write_text("\n".join(lines) + "\n")
    print(f"solved epsilon={eps:g}: {mesh.num_vertices} vertices, "
          f"|grad u(0,0)| = {np.sqrt(np.sum(gradient_at(sol, (0.0, 0.0))**2)):.6g}")
    return 0


def _cmd_sweep(cfg, outdir: Path, threads: int) -> int:
    plan = plan_from_config(cfg)
    report = run_sweep(plan, threads=threads)
    ok = True
    doc = report.to_dict()
    pc = check_profile(report, plan.epsilons[0], cfg["checks.stability_factor"])
    lb = check_lower_bound(report, cfg["checks.stability_factor"])
    doc["checks"] = {
        "profile_constants": [profile_constant(r, plan.gamma) for r in report.records],
        "profile_stability": pc.sweep_max_over_min,
        "profile_passed": pc.passed,
        "lower_bound_applicable": lb.applicable,
        "lower_bound_constants": lb.constants,
        "lower_bound_stability": lb.sweep_max_over_min,
        "lower_bound_passed": lb.passed,
        "reliability_passed": all(r.reliable for r in report.records),
    }
    if not pc.passed or not doc["checks"]["reliability_passed"]:
        ok = False
    if lb.applicable and not lb.passed:
        ok = False
    write_json(outdir / "report.json", doc)
    emit_tables(report, outdir)
    print(f"fitted rho = {report.rho:.6g} +/- {report.rho_halfwidth:.3g}"
          + (" (degenerate data)" if report.degenerate else ""))
    for name in ("profile_passed", "lower_bound_passed", "reliability_passed"):
        val = doc["checks"][name]
        state = "PASS" if val else ("n/a" if val is None else "FAIL")
        print(f"{state} {name}")
    return 0 if ok else 1


def _resolve_prop21_zprimes(tokens: str, eps: float, gamma: float) -> list[float]:
    out = []
    for tok in tokens.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok == "neck":
            out.append(eps ** (1.0 / (1.0 + gamma)))
        else:
            out.append(float(tok))
    return out


def _cmd_prop21(cfg, outdir: Path) -> int:
    plan = plan_from_config(cfg)
    fractions = cfg["prop21.s_fractions"]
    pairs = cfg["prop21.pairs"]
    rows = []
    per_eps_max = []
    for eps in plan.epsilons:
        geom = plan.geometry(eps)
        data = plan.boundary_data(geom)
        fld = AuxiliaryField(geom, data, 0)
        worst = 0.0
        for zp in _resolve_prop21_zprimes(cfg["prop21.zprimes"], eps, plan.gamma):
            mid = float(geom.midline(np.array([zp])))
            rep = check_seminorm_growth(fld, np.array([zp, mid]), fractions,
                                        pairs=pairs, seed=plan.seed)
            for row in rep.rows:
                rows.append({"epsilon": eps, "zprime": zp, "s": row.s,
                             "lhs": row.lhs, "rhs": row.rhs, "ratio": row.ratio,
                             "hypothesis_ok": row.hypothesis_ok})
            if np.isfinite(rep.fitted_constant):
                worst = max(worst, rep.fitted_constant)
        per_eps_max.append(worst)
    stability = max(per_eps_max) / min(per_eps_max) if min(per_eps_max) > 0 else float("inf")
    finite = all(np.isfinite(per_eps_max))
    ok = finite and stability < cfg["checks.stability_factor"]
    doc = {"rows": rows, "per_epsilon_max_constant": per_eps_max,
           "stability": stability, "passed": ok}
    write_json(outdir / "prop21.json", doc)
    print(f"{'PASS' if ok else 'FAIL'} seminorm-growth constants "
          f"(max/min = {stability:.4g})")
    return 0 if ok else 1


def _cmd_energy_scaling(cfg, outdir: Path) -> int:
    plan = plan_from_config(cfg)
    res = check_energy_scaling(plan)
    band = cfg["checks.exponent_band"]
    doc = res.to_dict()
    if res.degenerate:
        doc["passed"] = True
        doc["note"] = "degenerate data: remainder vanishes, fits skipped"
        ok = True
    else:
        lo_in = res.expected_inner - band
        edge_ok = lo_in <= res.edge_exponent <= res.expected_inner + band
        outer_ok = (res.expected_outer - band <= res.outer_exponent
                    <= res.expected_outer + band)
        # the slab at z' = 0 decays at least as fast as the bound allows
        center_ok = res.center_exponent >= lo_in
        doc["edge_in_band"] = edge_ok
        doc["outer_in_band"] = outer_ok
        doc["center_bound_satisfied"] = center_ok
        doc["center_in_band"] = bool(lo_in <= res.center_exponent
                                     <= res.expected_inner + band)
        ok = edge_ok and outer_ok and center_ok
        doc["passed"] = ok
    write_json(outdir / "energy.json", doc)
    for name, table in (("energy_inner_center.csv", res.center_table),
                        ("energy_inner_edge.csv", res.edge_table),
                        ("energy_outer.csv", res.outer_table)):
        lines = ["scale,energy"] + [_csv_row([a, b]) for a, b in table]
        (outdir / name).write_text("\n".join(lines) + "\n")
    if not res.degenerate:
        print(f"inner(center z'=0) exponent = {res.center_exponent:.4f}, "
              f"inner(regime edge) = {res.edge_exponent:.4f} "
              f"(expected {res.expected_inner:.4f}), "
              f"outer = {res.outer_exponent:.4f} (expected {res.expected_outer:.4f})")
    print(("PASS" if doc["passed"] else "FAIL") + " energy scaling")
    return 0 if doc["passed"] else 1


def _fem_point_value(mesh, sol, x: float, y: float) -> np.ndarray:
    t = mesh.locate((x, y))
    tri = mesh.triangles[t]
    p = mesh.vertices[tri]
    T = np.array([[p[1, 0] - p[0, 0], p[2, 0] - p[0, 0]],
                  [p[1, 1] - p[0, 1], p[2, 1] - p[0, 1]]])
    l12 = np.linalg.solve(T, np.array([x, y]) - p[0])
    lam = np.array([1 - l12.sum(), *l12])
    return lam @ sol.values[tri]


def _fd_vs_fem(cs, geom, data, eps: float, m: int) -> float:
    """Interior sup distance between the grid twin and the element solution."""

    def bdata(X):
        X = np.atleast_2d(X)
        u = (X[:, 1] + eps / 2) / eps
        out = np.zeros((X.shape[0], m))
        out[:, 0] = (1.0 + X[:, 0] ** 2) * u
        return out

    grid = finite_difference_reference(cs, 0.5, eps, nx=160, ny=64, boundary=bdata)
    mesh = generate(geom, layers=16, aspect=2.0, dxmax=0.0125, xrange=0.5)
    sol = solve_dirichlet(assemble(mesh, cs), dirichlet_values(mesh, data))
    worst = 0.0
    for i in range(1, grid.xs.size - 1, 2):
        x = grid.xs[i]
        if abs(x) > 0.4:
            continue
        for j in range(1, grid.ys.size - 1):
            y = grid.ys[j]
            vfem = _fem_point_value(mesh, sol, x, y)
            worst = max(worst, float(np.max(np.abs(vfem - grid.values[i, j]))))
    return worst


def _cmd_oracle_suite(cfg, outdir: Path) -> int:
    from .auxiliary import BoundaryData
    from .coefficients import LameParameters, lame_as_general

    results = {}
    ok = True
    eps = cfg["epsilon"]

    case = exact_affine_case(eps)
    geom = case.geometry()
    mesh = generate(geom, layers=8, aspect=2.0, dxmax=0.05, xrange=1.0)
    cs = identity_coefficients()
    system = assemble(mesh, cs)
    sol = solve_dirichlet(system, dirichlet_values(mesh, case.data()))
    err = float(np.max(np.abs(sol.values - case.solution(mesh.vertices))))
    results["affine_nodal_error"] = err
    ok &= err <= 1e-10

    # cross-method checks run on a thicker rectangle where the solution is
    # genuinely two-dimensional
    eps_fd = 0.1
    geom_fd = exact_affine_case(eps_fd).geometry()
    data_scalar = BoundaryData.polynomial([[1.0, 0.0, 1.0]], [[0.0]], geom_fd)
    worst = _fd_vs_fem(identity_coefficients(), geom_fd, data_scalar, eps_fd, m=1)
    results["fd_vs_fem_scalar"] = worst
    ok &= worst <= 0.01

    cs_lame = lame_as_general(LameParameters(cfg["system.lambda1"], cfg["system.mu1"]), 2)
    data_lame = BoundaryData.polynomial([[1.0, 0.0, 1.0], [0.0]], [[0.0], [0.0]], geom_fd)
    worst_l = _fd_vs_fem(cs_lame, geom_fd, data_lame, eps_fd, m=2)
    results["fd_vs_fem_lame"] = worst_l
    ok &= worst_l <= 0.01

    gap = plan_from_config(cfg).geometry(eps)
    data = plan_from_config(cfg).boundary_data(gap)
    fld = AuxiliaryField(gap, data, 0)
    w0 = float(gap.gap_width(np.zeros(1)))
    region = LocalRegion(np.array([0.0, float(gap.midline(np.zeros(1)))]), 0.5 * w0, gap)
    from .auxiliary import field_gradients

    def f(X):
        return field_gradients(fld, X).reshape(X.shape[0], -1)

    dense = brute_force_seminorm(f, region, cfg["gamma"], grid=60)
    sampled = holder_seminorm(f, region, cfg["gamma"], pairs=4000, seed=cfg["seed"])
    results["seminorm_dense"] = dense
    results["seminorm_sampled"] = sampled
    ok &= sampled >= 0.8 * dense
    results["passed"] = bool(ok)
    write_json(outdir / "oracle.json", results)
    print(("PASS" if ok else "FAIL") + f" oracle suite: affine={err:.2e}, "
          f"fd-vs-fem scalar={worst:.2e} lame={worst_l:.2e}, seminorm ratio="
          f"{sampled / dense if dense > 0 else float('nan'):.3f}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

COMMANDS = ("validate-geometry", "validate-coefficients", "solve", "sweep",
            "prop21", "energy-scaling", "oracle-suite")


def run(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(
        prog="thingap",
        description="Verification experiments for gradient blow-up in narrow gaps.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", default=None, help="flat key=value config file")
    parser.add_argument("--out", default="thingap_out",
                        help="output directory (THINGAP_OUT overrides)")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config key (repeatable)")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--version", action="version", version=__version__)
    args = parser.parse_args(argv)

    try:
        cfg = effective_config(args.config, args.overrides, args.seed)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    outdir = Path(os.environ.get("THINGAP_OUT") or args.out)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "validate-geometry":
            return _cmd_validate_geometry(cfg, outdir)
        if args.command == "validate-coefficients":
            return _cmd_validate_coefficients(cfg, outdir)
        if args.command == "solve":
            return _cmd_solve(cfg, outdir)
        if args.command == "sweep":
            return _cmd_sweep(cfg, outdir, max(1, args.threads))
        if args.command == "prop21":
            return _cmd_prop21(cfg, outdir)
        if args.command == "energy-scaling":
            return _cmd_energy_scaling(cfg, outdir)
        if args.command == "oracle-suite":
            return _cmd_oracle_suite(cfg, outdir)
    except (ConfigError, PlanError, ConfigurationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
