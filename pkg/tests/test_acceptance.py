"""Acceptance suite: every criterion at its stated tolerance, one line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the PASS lines and
the measured values.  Criterion 6 is split: the power-law exponents of the
remainder energy are verified where the inner bound is attained (the rim of
the neck regime) and in the outer regime; the additional literal assertion
at the exact neck center is expected to fail and documents a defect in the
requirement, not in the code (see the assertion message).
"""

import dataclasses
import time

import numpy as np
import pytest

import thingap as tg
from thingap.auxiliary import (AuxiliaryField, BoundaryData, check_seminorm_growth,
                               field_gradients, gap_fraction_gradient, holder_seminorm,
                               interpolant_gradients, interpolant_values)
from thingap.cli import run as cli_run
from thingap.geometry import GapGeometry, LocalRegion
from thingap.mesh import generate, refine
from thingap.oracle import brute_force_seminorm, exact_affine_case
from thingap.solver import (BoundaryAssignment, RightHandSide, assemble,
                            dirichlet_values, solve_component, solve_dirichlet)
from thingap.verify import (SweepPlan, check_energy_scaling, check_lower_bound,
                            check_profile, fit_rate, profile_constant, run_sweep)

GAMMA = 0.5
RHO_BAND = (0.85, 1.15)
EXPONENT_HALF_BAND = 0.2
STABILITY_FACTOR = 3.0


@pytest.fixture(scope="module")
def default_sweep():
    plan = SweepPlan()
    t0 = time.monotonic()
    report = run_sweep(plan)
    elapsed = time.monotonic() - t0
    return plan, report, elapsed


def _announce(n, text):
    print(f"\nPASS criterion {n}: {text}")


# -- criterion 1: oracle exactness ------------------------------------------

def test_criterion1_affine_oracle_exact():
    t0 = time.monotonic()
    eps = 0.1
    case = exact_affine_case(eps)
    geom = case.geometry()
    mesh = generate(geom, layers=8, aspect=2.0, dxmax=0.05, xrange=1.0)
    sol = solve_dirichlet(assemble(mesh, tg.identity_coefficients()),
                          dirichlet_values(mesh, case.data()))
    err = float(np.max(np.abs(sol.values - case.solution(mesh.vertices))))
    elapsed = time.monotonic() - t0
    assert err <= 1e-10, f"affine nodal error {err:.3e} exceeds 1e-10"
    assert elapsed < 5.0, f"runtime {elapsed:.2f}s exceeds 5s"
    _announce(1, f"affine case reproduced to {err:.2e} in {elapsed:.2f}s")


# -- criterion 2: manufactured-solution convergence ---------------------------

def _mms_errors(cs, mesh):
    A0 = cs.A(np.zeros(2))

    def ustar(X):
        X = np.atleast_2d(X)
        u1 = np.sin(1.3 * X[:, 0]) * np.cosh(X[:, 1]) + 0.3 * X[:, 0] ** 2
        u2 = np.cos(X[:, 0]) * X[:, 1] + 0.1 * X[:, 0]
        return np.stack([u1, u2], axis=1)[:, :cs.m]

    def gstar(X):
        X = np.atleast_2d(X)
        g = np.empty((X.shape[0], 2, 2))
        g[:, 0, 0] = 1.3 * np.cos(1.3 * X[:, 0]) * np.cosh(X[:, 1]) + 0.6 * X[:, 0]
        g[:, 0, 1] = np.sin(1.3 * X[:, 0]) * np.sinh(X[:, 1])
        g[:, 1, 0] = -np.sin(X[:, 0]) * X[:, 1] + 0.1
        g[:, 1, 1] = np.cos(X[:, 0])
        return g[:, :cs.m, :]

    def F(X):
        return np.einsum("pqij,kjq->kip", A0, gstar(X))

    system = assemble(mesh, cs, rhs=RightHandSide(F=F))
    bc = BoundaryAssignment(values=ustar(mesh.vertices), fixed=mesh.vertex_tags != 0)
    sol = solve_dirichlet(system, bc)
    diff = sol.values - ustar(mesh.vertices)
    c_vals = diff[mesh.triangles].mean(axis=1)
    l2 = float(np.sqrt(np.sum(mesh.areas() * np.sum(c_vals**2, axis=1))))
    gd = sol.gradients() - gstar(mesh.centroids())
    h1 = float(np.sqrt(np.sum(mesh.areas() * np.sum(gd**2, axis=(1, 2)))))
    return l2, h1


def test_criterion2_manufactured_convergence_rates():
    t0 = time.monotonic()
    geom = GapGeometry.power_law(0.1, GAMMA)
    rates = {}
    levels = 4                          # base mesh plus 3 refinements
    for name, cs in (("identity", tg.identity_coefficients(m=2, n=2)),
                     ("lame", tg.lame_as_general(tg.LameParameters(1.0, 1.0), 2))):
        mesh = generate(geom, layers=4, aspect=1.0, dxmax=0.1, xrange=0.5)
        errs = []
        for level in range(levels):
            errs.append(_mms_errors(cs, mesh))
            if level < levels - 1:
                mesh = refine(mesh, 2)
        hs = [2.0 ** (-k) for k in range(levels)]
        rate_l2, _ = fit_rate(list(zip(hs, [e[0] for e in errs])))
        rate_h1, _ = fit_rate(list(zip(hs, [e[1] for e in errs])))
        rates[name] = (rate_l2, rate_h1)
        assert abs(rate_l2 - 2.0) <= 0.2, f"{name}: L2 rate {rate_l2:.3f} not 2 +/- 0.2"
        assert abs(rate_h1 - 1.0) <= 0.2, f"{name}: H1 rate {rate_h1:.3f} not 1 +/- 0.2"
    elapsed = time.monotonic() - t0
    assert elapsed < 120.0, f"runtime {elapsed:.1f}s exceeds 2 min"
    _announce(2, "convergence rates " + ", ".join(
        f"{k}: L2 {v[0]:.2f}, H1 {v[1]:.2f}" for k, v in rates.items())
        + f" in {elapsed:.1f}s")


# -- criterion 3: blow-up rate ------------------------------------------------

def test_criterion3_blowup_rate(default_sweep):
    plan, report, elapsed = default_sweep
    assert plan.epsilons == (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)
    assert all(r.reliable for r in report.records), \
        "mesh-reliability gate failed: " + ", ".join(
            f"eps={r.epsilon:g} change={r.reliability_change:.3f}"
            for r in report.records if not r.reliable)
    assert RHO_BAND[0] <= report.rho <= RHO_BAND[1], \
        f"fitted centerline exponent {report.rho:.4f} outside {RHO_BAND}"
    assert elapsed < 900.0, f"runtime {elapsed:.1f}s exceeds 15 min"
    _announce(3, f"rho = {report.rho:.4f} +/- {report.rho_halfwidth:.4f}, "
                 f"all gates pass, {elapsed:.1f}s single-threaded")


# -- criterion 4: upper-envelope stability -------------------------------------

def test_criterion4_envelope_constant_stability(default_sweep):
    plan, report, _ = default_sweep
    pc = check_profile(report, plan.epsilons[0], STABILITY_FACTOR)
    consts = [profile_constant(r, plan.gamma) for r in report.records]
    assert pc.passed, f"profile constants vary by {pc.sweep_max_over_min:.3f} >= 3"
    _announce(4, f"envelope constants {min(consts):.3f}..{max(consts):.3f} "
                 f"(ratio {pc.sweep_max_over_min:.3f} < 3)")


# -- criterion 5: lower bound and the no-jump control ---------------------------

def test_criterion5_lower_bound_and_no_jump(default_sweep):
    plan, report, _ = default_sweep
    lb = check_lower_bound(report, STABILITY_FACTOR)
    assert lb.applicable and lb.passed, \
        f"lower-bound constants unstable: {lb.constants}"
    assert min(lb.constants) > 0

    equal = dataclasses.replace(plan, bc_kind="polynomial",
                                bc_phi=(1.0, 1.0, 1.0), bc_psi=(1.0, 1.0, 1.0))
    rep_eq = run_sweep(equal)
    assert -0.15 <= rep_eq.rho <= 0.15, \
        f"no-jump sweep shows spurious blow-up: rho = {rep_eq.rho:.4f}"
    _announce(5, f"lower constants {min(lb.constants):.3f}..{max(lb.constants):.3f} "
                 f"(ratio {lb.sweep_max_over_min:.3f} < 3); "
                 f"no-jump rho = {rep_eq.rho:.4f}")


# -- criterion 6: energy scaling ------------------------------------------------

@pytest.fixture(scope="module")
def energy_result():
    return check_energy_scaling(SweepPlan())


def test_criterion6_energy_scaling_regimes(energy_result):
    res = energy_result
    lo, hi = res.expected_inner - EXPONENT_HALF_BAND, res.expected_inner + EXPONENT_HALF_BAND
    assert lo <= res.edge_exponent <= hi, \
        f"inner-regime exponent {res.edge_exponent:.4f} outside [{lo:.3f}, {hi:.3f}]"
    lo_o, hi_o = res.expected_outer - EXPONENT_HALF_BAND, res.expected_outer + EXPONENT_HALF_BAND
    assert lo_o <= res.outer_exponent <= hi_o, \
        f"outer exponent {res.outer_exponent:.4f} outside [{lo_o:.3f}, {hi_o:.3f}]"
    # the neck-center slab must not decay slower than the bound allows
    assert res.center_exponent >= lo, \
        f"neck-center energy decays slower than the bound permits " \
        f"({res.center_exponent:.4f} < {lo:.3f})"
    _announce(6, f"energy exponents: inner regime {res.edge_exponent:.4f} "
                 f"(expected {res.expected_inner:.4f}), outer {res.outer_exponent:.4f} "
                 f"(expected {res.expected_outer:.4f}); neck-center decays at "
                 f"{res.center_exponent:.4f}")


def test_criterion6_energy_scaling_at_literal_center(energy_result):
    # Literal reading of the requirement: the fit at the slab centered exactly
    # at z' = 0 should land in [2/3 - 0.2, 2/3 + 0.2].  The measured exponent
    # converges to ~2*gamma = 1 under mesh refinement: inside that slab the
    # structural envelope forces the profile gradients down to O(eps^gamma),
    # below the regime-wide worst case O(eps^{gamma/(1+gamma)}) that the
    # energy bound is built from, so the bound holds with slack exactly at
    # z' = 0 and its exponent is attained only near the regime rim (covered
    # by the passing regime check above).  No admissible profile family can
    # make this assertion true; it is kept as stated to document the defect.
    res = energy_result
    lo = res.expected_inner - EXPONENT_HALF_BAND
    hi = res.expected_inner + EXPONENT_HALF_BAND
    assert lo <= res.center_exponent <= hi, (
        f"literal neck-center exponent {res.center_exponent:.4f} outside "
        f"[{lo:.3f}, {hi:.3f}]: the inner energy bound is not saturated at "
        f"z' = 0 (measured decay ~eps^{res.center_exponent:.2f}, bound allows "
        f"~eps^{res.expected_inner:.2f}); see the regime check for where the "
        f"bound's exponent is attained")


# -- criterion 7: auxiliary identities ------------------------------------------

def test_criterion7_auxiliary_identities():
    geom = GapGeometry.power_law(1e-2, GAMMA)
    rng = np.random.default_rng(11)
    xp = rng.uniform(-0.9, 0.9, size=(1000, 1))
    t = rng.uniform(0.15, 0.85, size=1000)
    bot, top = geom.bottom(xp), geom.top(xp)
    X = np.concatenate([xp, (bot + t * (top - bot))[:, None]], axis=1)

    g = gap_fraction_gradient(geom, X)
    want = 1.0 / geom.gap_width(xp)
    assert np.array_equal(g[:, 1], want), "vertical derivative identity violated"

    data = BoundaryData.polynomial([[1.0, 0.5, 1.0], [0.2]], [[0.0], [0.1, -0.3]], geom)
    grads = interpolant_gradients(geom, data, X)
    h = (1e-7 * geom.gap_width(xp))[:, None]
    worst = 0.0
    for d in range(2):
        step = np.zeros_like(X)
        step[:, d] = h[:, 0]
        fd = (interpolant_values(geom, data, X + step)
              - interpolant_values(geom, data, X - step)) / (2 * h)
        scale = np.maximum(np.linalg.norm(grads, axis=(1, 2)), 1.0)
        worst = max(worst, float(np.max(np.abs(fd - grads[:, :, d]) / scale[:, None])))
    assert worst <= 1e-6, f"extension gradient vs finite differences: {worst:.3e}"
    _announce(7, f"vertical-derivative identity exact at 1000 samples; "
                 f"gradient vs finite differences {worst:.2e} <= 1e-6")


# -- criterion 8: seminorm growth constants ---------------------------------------

def test_criterion8_seminorm_growth_stability():
    plan = SweepPlan()
    data_cache = {}
    per_eps = []
    for eps in plan.epsilons:
        geom = plan.geometry(eps)
        data = plan.boundary_data(geom)
        fld = AuxiliaryField(geom, data, 0)
        worst = 0.0
        for zp in (0.0, eps ** (1 / (1 + plan.gamma)), 0.25):
            mid = float(geom.midline(np.array([zp])))
            rep = check_seminorm_growth(fld, np.array([zp, mid]),
                                        (0.25, 0.5, 1.0), pairs=2000, seed=plan.seed)
            assert np.isfinite(rep.fitted_constant)
            worst = max(worst, rep.fitted_constant)
        per_eps.append(worst)
        data_cache[eps] = (geom, fld)
    ratio = max(per_eps) / min(per_eps)
    assert ratio < STABILITY_FACTOR, \
        f"growth constants vary by {ratio:.3f} >= 3: {per_eps}"

    # calibration: the sampled seminorm reaches the dense-grid reference
    geom, fld = data_cache[1e-2]
    w0 = float(geom.gap_width(np.zeros(1)))
    region = LocalRegion(np.array([0.0, 0.0]), 0.5 * w0, geom)
    f = lambda X: field_gradients(fld, X).reshape(X.shape[0], -1)
    dense = brute_force_seminorm(f, region, plan.gamma, grid=60)
    sampled = holder_seminorm(f, region, plan.gamma, pairs=4000, seed=plan.seed)
    assert sampled >= 0.8 * dense, \
        f"sampled seminorm {sampled:.4g} below 0.8 x dense reference {dense:.4g}"
    _announce(8, f"growth constants {min(per_eps):.3f}..{max(per_eps):.3f} "
                 f"(ratio {ratio:.3f} < 3); seminorm calibration "
                 f"{sampled / dense:.3f} >= 0.8")


# -- criterion 9: superposition ----------------------------------------------------

def test_criterion9_superposition(default_sweep):
    plan, _, _ = default_sweep
    eps = 1e-2
    geom = plan.geometry(eps)
    cs = plan.coefficients()
    data = plan.boundary_data(geom)
    mesh = generate(geom, plan.mesh_layers, plan.mesh_aspect, plan.mesh_dxmax,
                    plan.mesh_xrange)
    system = assemble(mesh, cs)
    u = solve_dirichlet(system, dirichlet_values(mesh, data, lateral=plan.lateral))
    total = sum(solve_component(system, data, ell, lateral=plan.lateral).values
                for ell in range(cs.m))
    diff = float(np.max(np.abs(u.values - total)))
    tol = 10 * 1e-10 * max(1.0, float(np.max(np.abs(u.values))))
    assert diff <= tol, f"superposition defect {diff:.3e} exceeds {tol:.1e}"
    _announce(9, f"max nodal superposition defect {diff:.2e} <= {tol:.1e}")


# -- criterion 10: determinism -------------------------------------------------------

def test_criterion10_byte_identical_reports(tmp_path):
    args = ["sweep", "--seed", "123"]
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert cli_run([*args, "--out", str(out1)]) == 0
    assert cli_run([*args, "--out", str(out2)]) == 0
    b1 = (out1 / "report.json").read_bytes()
    b2 = (out2 / "report.json").read_bytes()
    assert b1 == b2, "two identical sweep runs produced different report.json"
    _announce(10, f"report.json byte-identical across runs ({len(b1)} bytes)")
