"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line with the measured residual and
the required tolerance.  The heavy trajectory batch (five catalog
systems, twenty deterministic starts each, both pipelines, u-spans of
length ten at rtol 1e-10) is integrated once and shared by the criteria
that sweep it.
"""

import json
import math

import numpy as np
import pytest

from hlift.cli import main as cli_main
from hlift.cloud import point_cloud, state_cloud
from hlift.dynamics import (IntegratorConfig, ReducedState,
                            homogeneity_residual, integrate_geodesic,
                            integrate_herglotz, lift_state, reduce_trajectory,
                            u_equation_residual, w_equation_residual)
from hlift.geometry import BrinkmannMetric, Point, conformal_pullback_check
from hlift.symmetry import (charge_series, degreewise_max_residual,
                            killing_residual, nonlocal_charge,
                            transform_rule_check)
from hlift.systems import (conformal_pair, damped_action_dependent,
                           damped_time_dependent, standard_catalog,
                           x_scaling_control)

SPAN = 10.0
RUN_CFG = IntegratorConfig(rtol=1e-10, atol=1e-12)
STARTS_PER_SYSTEM = 20


def report(name: str, residual: float, tol: float, ok=None) -> bool:
    ok = bool(residual <= tol) if ok is None else bool(ok)
    verdict = "PASS" if ok else "FAIL"
    print(f"[{verdict}] {name}: residual={residual:.3e} tol={tol:.1e}")
    return ok


class RunPair:
    __slots__ = ("key", "ent", "met", "rs0", "geo", "red", "herg")

    def __init__(self, key, ent, met, rs0, geo, red, herg):
        self.key = key
        self.ent = ent
        self.met = met
        self.rs0 = rs0
        self.geo = geo
        self.red = red
        self.herg = herg

    def checkpoints(self):
        return np.linspace(self.rs0.u, self.rs0.u + SPAN, 33)


@pytest.fixture(scope="session")
def batch():
    pairs = []
    for key, ent in standard_catalog().items():
        met = BrinkmannMetric(ent.system)
        n = ent.system.n
        for rs0 in state_cloud(n, STARTS_PER_SYSTEM):
            gs0 = lift_state(ent.system, rs0, 1.0)
            geo = integrate_geodesic(met, gs0, (0.0, math.inf),
                                     config=RUN_CFG, stop_at_u=rs0.u + SPAN)
            red = reduce_trajectory(geo)
            herg = integrate_herglotz(ent.system, rs0, (rs0.u, rs0.u + SPAN),
                                      config=RUN_CFG)
            pairs.append(RunPair(key, ent, met, rs0, geo, red, herg))
    return pairs


@pytest.fixture(scope="session")
def damped_closed_runs():
    """gamma -> (entry, herglotz view, reduced geodesic view), x0=1, v0=0."""
    out = {}
    for gamma in (0.1, 0.2, 0.5):
        ent = damped_action_dependent(gamma=gamma, omega=1.0)
        rs0 = ReducedState([1.0], [0.0], 0.0, 0.25)
        herg = integrate_herglotz(ent.system, rs0, (0.0, SPAN), config=RUN_CFG)
        gs0 = lift_state(ent.system, rs0, 1.0)
        geo = integrate_geodesic(BrinkmannMetric(ent.system), gs0,
                                 (0.0, math.inf), config=RUN_CFG,
                                 stop_at_u=SPAN)
        out[gamma] = (ent, herg, reduce_trajectory(geo))
    return out


def underdamped_x(gamma: float, u: float) -> float:
    om_d = math.sqrt(1.0 - 0.25 * gamma * gamma)
    return math.exp(-0.5 * gamma * u) * (math.cos(om_d * u)
                                         + 0.5 * gamma / om_d * math.sin(om_d * u))


def test_criterion_01_pipeline_equivalence(batch):
    worst = 0.0
    for pair in batch:
        for u in pair.checkpoints():
            gap = np.max(np.abs(pair.red.state_at(u).x - pair.herg.state_at(u).x))
            worst = max(worst, float(gap))
    assert report("criterion-01 pipeline-equivalence", worst, 1e-6)


def test_criterion_02_damped_closed_form(damped_closed_runs):
    worst = 0.0
    for gamma, (ent, herg, red) in damped_closed_runs.items():
        for u in np.linspace(0.0, SPAN, 101):
            want = underdamped_x(gamma, u)
            worst = max(worst, abs(herg.state_at(u).x[0] - want),
                        abs(red.state_at(u).x[0] - want))
    # the explicitly time-dependent formulation reduces to the same motion
    ent_t = damped_time_dependent(gamma=0.2, omega=1.0)
    herg_t = integrate_herglotz(ent_t.system,
                                ReducedState([1.0], [0.0], 0.0, 0.25),
                                (0.0, SPAN), config=RUN_CFG)
    for u in np.linspace(0.0, SPAN, 101):
        worst = max(worst, abs(herg_t.state_at(u).x[0] - underdamped_x(0.2, u)))
    assert report("criterion-02 damped-closed-form", worst, 1e-6)


def test_criterion_03_null_constraint(batch):
    worst = max(float(np.max(np.abs(p.geo.diagnostics["null_residual"])))
                for p in batch)
    assert report("criterion-03 null-drift", worst, 1e-8)


def test_criterion_04_w_equation_redundancy(batch):
    worst = max(w_equation_residual(p.met, p.geo) for p in batch)
    ok = worst <= 1e-7
    # control: started off the null cone the w equation must fail visibly
    ent = damped_action_dependent(gamma=0.2, omega=1.0)
    met = BrinkmannMetric(ent.system)
    gs0 = lift_state(ent.system, ReducedState([1.0], [0.0], 0.0, 0.25), 1.0)
    gs0.velocity[2] += 0.1
    off = integrate_geodesic(met, gs0, (0.0, math.inf), config=RUN_CFG,
                             stop_at_u=SPAN)
    control = w_equation_residual(met, off)
    ok = ok and control > 1e-4
    print(f"        off-cone control residual={control:.3e} (needs > 1e-04)")
    assert report("criterion-04 w-redundancy", worst, 1e-7, ok)


def test_criterion_05_u_acceleration(batch):
    worst = max(u_equation_residual(p.met, p.geo) for p in batch)
    ok = worst <= 1e-8
    # systems without action coupling must hold udot exactly constant
    flat_drift = 0.0
    for p in batch:
        if p.key in ("free", "harmonic", "damped-time"):
            n = p.ent.system.n
            flat_drift = max(flat_drift, float(np.ptp(p.geo.y[:, (n + 2) + n])))
    ok = ok and flat_drift <= 1e-12
    print(f"        udot drift on uncoupled systems={flat_drift:.3e} "
          f"(needs <= 1e-12)")
    assert report("criterion-05 u-acceleration", worst, 1e-8, ok)


def test_criterion_06_conformal_pair():
    gamma = 0.2
    ent_a, ent_b, cmap, factor = conformal_pair(gamma, 1.0, 1)
    met_a = BrinkmannMetric(ent_a.system)
    met_b = BrinkmannMetric(ent_b.system)
    pull = max(conformal_pullback_check(met_a, met_b, cmap, p, factor)
               for p in point_cloud(1, 100))
    ok = pull <= 1e-12
    rs0 = ReducedState([1.0], [0.0], 0.0, 0.25)
    ta = integrate_herglotz(ent_a.system, rs0, (0.0, SPAN), config=RUN_CFG)
    tb = integrate_herglotz(ent_b.system, rs0, (0.0, SPAN), config=RUN_CFG)
    flow = max(float(np.max(np.abs(ta.state_at(u).x - tb.state_at(u).x)))
               for u in np.linspace(0.0, SPAN, 101))
    wmap = max(abs(math.exp(-gamma * u) * ta.state_at(u).w - tb.state_at(u).w)
               for u in np.linspace(0.0, SPAN, 101))
    ok = ok and flow <= 1e-6 and wmap <= 1e-6
    print(f"        flow gap={flow:.3e}, rescaled-w gap={wmap:.3e} "
          f"(each needs <= 1e-06)")
    assert report("criterion-06 conformal-pair", pull, 1e-12, ok)


def test_criterion_07_generator_identities():
    worst_deg = 0.0
    worst_kil = 0.0
    for key, ent in standard_catalog().items():
        met = BrinkmannMetric(ent.system)
        cloud = point_cloud(ent.system.n, 100)
        for name, gen in ent.generators.items():
            worst_deg = max(worst_deg, max(
                degreewise_max_residual(ent.system, gen, p) for p in cloud))
            worst_kil = max(worst_kil, max(
                killing_residual(met, gen, p) for p in cloud))
    ok = worst_deg <= 1e-10 and worst_kil <= 1e-8
    osc = standard_catalog()["harmonic"]
    ctrl = x_scaling_control(1)
    control = max(max(degreewise_max_residual(osc.system, ctrl, p),
                      killing_residual(BrinkmannMetric(osc.system), ctrl, p))
                  for p in point_cloud(1, 100))
    ok = ok and control > 1e-3
    print(f"        killing worst={worst_kil:.3e} (needs <= 1e-08), "
          f"control={control:.3e} (needs > 1e-03)")
    assert report("criterion-07 generator-identities", worst_deg, 1e-10, ok)


def test_criterion_08_nonlocal_charge(damped_closed_runs):
    ent, herg, _ = damped_closed_runs[0.2]
    ts = ent.generators["time-shift"]
    _, plain = charge_series(ent.system, ts, herg)
    plain_drift = float(np.max(np.abs(plain - plain[0])))
    _, qn = nonlocal_charge(ent.system, ts, herg)
    drift = float(np.max(np.abs(qn - qn[0])) / abs(qn[0]))
    ok = drift <= 1e-6 and plain_drift > 1e-2
    print(f"        unrescaled charge drift={plain_drift:.3e} (needs > 1e-02)")
    assert report("criterion-08 nonlocal-charge", drift, 1e-6, ok)


def test_criterion_09_transform_rule():
    ent_a, ent_b, cmap, _ = conformal_pair(0.2, 1.0, 1)
    worst = max(transform_rule_check(ent_a.system, ent_b.system, cmap, rs)
                for rs in state_cloud(1, 100))
    assert report("criterion-09 transform-rule", worst, 1e-12)


def test_criterion_10_homogeneity_and_reparametrization():
    # fixed documented seed for the random sweep
    rng = np.random.default_rng(20260825)
    ent = standard_catalog()["coupled"]
    worst_h = 0.0
    for _ in range(500):
        rs = ReducedState(rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2),
                          rng.uniform(0, 2), rng.uniform(-1, 1))
        udot = rng.uniform(0.5, 2.0)
        worst_h = max(worst_h, homogeneity_residual(ent.system, rs, udot))
    ok = worst_h <= 1e-12
    # reparametrization: the reduced motion cannot see udot0
    dent = damped_action_dependent(gamma=0.2, omega=1.0)
    met = BrinkmannMetric(dent.system)
    rs0 = ReducedState([1.0], [0.0], 0.0, 0.25)
    cfg = IntegratorConfig(rtol=1e-11, atol=1e-13)
    views = []
    for udot0 in (0.5, 1.0, 2.0):
        gs0 = lift_state(dent.system, rs0, udot0)
        traj = integrate_geodesic(met, gs0, (0.0, math.inf), config=cfg,
                                  stop_at_u=SPAN)
        views.append(reduce_trajectory(traj))
    gap = 0.0
    for u in np.linspace(0.0, SPAN, 41):
        states = [v.state_at(u) for v in views]
        for other in states[1:]:
            gap = max(gap,
                      float(np.max(np.abs(states[0].x - other.x))),
                      abs(states[0].w - other.w))
    ok = ok and gap <= 1e-9
    print(f"        reparametrization gap={gap:.3e} (needs <= 1e-09)")
    assert report("criterion-10 homogeneity", worst_h, 1e-12, ok)


def test_criterion_11_derivative_oracles():
    worst_fd = 0.0
    worst_compat = 0.0
    eps = 1e-6
    for key, ent in standard_catalog().items():
        sys = ent.system
        met = BrinkmannMetric(sys)
        n = sys.n
        for p in point_cloud(n, 10):
            c0 = p.coords()
            b = sys.eval_bundle(p)
            dg_fd = np.zeros((n + 2, n + 2, n + 2))
            for axis in range(n + 2):
                step = np.zeros(n + 2)
                step[axis] = eps
                pp = Point.from_coords(c0 + step, n)
                pm = Point.from_coords(c0 - step, n)
                hp, Ap, Vp = sys.eval_values(pp)
                hm, Am, Vm = sys.eval_values(pm)
                worst_fd = max(
                    worst_fd,
                    float(np.max(np.abs((hp - hm) / (2 * eps) - b.dh[axis]))),
                    float(np.max(np.abs((Ap - Am) / (2 * eps) - b.dA[axis]))),
                    abs((Vp - Vm) / (2 * eps) - b.dV[axis]))
                dg_fd[axis] = (met.eval(pp) - met.eval(pm)) / (2 * eps)
            # Christoffel from differenced metric vs the seeded version
            ginv = met.inverse(p)
            first = (np.transpose(dg_fd, (1, 0, 2))
                     + np.transpose(dg_fd, (1, 2, 0)) - dg_fd)
            gamma_fd = 0.5 * np.einsum("ms,sab->mab", ginv, first)
            gamma = met.christoffel(p)
            worst_fd = max(worst_fd, float(np.max(np.abs(gamma - gamma_fd))))
            g, dg = met.eval_with_derivatives(p)
            nabla = (dg - np.einsum("dca,db->cab", gamma, g)
                     - np.einsum("dcb,ad->cab", gamma, g))
            worst_compat = max(worst_compat, float(np.max(np.abs(nabla))))
    ok = worst_fd <= 1e-6 and worst_compat <= 1e-9
    print(f"        metric compatibility={worst_compat:.3e} (needs <= 1e-09)")
    assert report("criterion-11 derivative-oracles", worst_fd, 1e-6, ok)


def test_criterion_12_deterministic_output(tmp_path):
    scn = {
        "system": "damped-action",
        "params": {"gamma": 0.2, "omega": 1.0},
        "initial": {"x": [1.0], "xp": [0.0], "u": 0.0, "w": 0.25},
        "span": {"from": 0.0, "to": 6.0},
        "checks": ["noether-charge:time-shift", "nonlocal-charge:time-shift"],
    }
    path = tmp_path / "scn.json"
    path.write_text(json.dumps(scn))
    assert cli_main(["run", str(path), "--out-dir", str(tmp_path / "a")]) == 0
    assert cli_main(["run", str(path), "--out-dir", str(tmp_path / "b")]) == 0
    same = all(
        (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        for name in ("geodesic.csv", "reduced.csv"))
    assert report("criterion-12 deterministic-output", 0.0 if same else 1.0,
                  0.5, same)
