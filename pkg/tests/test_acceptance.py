"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the verdict lines are
written straight to the terminal so they also land in captured logs.
"""

import math
import time

import numpy as np
import pytest

from selregion.analytic import NetworkConfig, SelectionRegion, expected_density_numeric, expected_density_of_progress
from selregion.cli import main
from selregion.experiments import ResultTable, build_config, cmd_compare
from selregion.optimize import (
    joint_residual,
    optimal_rm_given_phi,
    optimize_joint,
    rm_from_phi_closed_form,
    rm_upper_bound,
    stationarity_residual_rm,
)
from selregion.simulate import candidate_count_ratio, truncation_audit

BASE = NetworkConfig(lam=1.0, p=0.05, alpha=3.0, beta=10.0)
P_GRID = (0.01, 0.02, 0.03, 0.05, 0.07, 0.1, 0.15, 0.2, 0.25, 0.3)


@pytest.fixture
def verdict(capsys):
    def report(number, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
        assert ok, detail

    return report


@pytest.fixture(scope="module")
def joint_sweep():
    return {p: optimize_joint(BASE.replace(p=p)) for p in P_GRID}


def test_criterion_1_closed_form_vs_quadrature(verdict):
    start = time.perf_counter()
    worst = 0.0
    for p in (0.01, 0.05, 0.2):
        cfg = BASE.replace(p=p)
        for phi in (math.pi / 6, math.pi / 3, math.pi / 2, math.pi):
            for r_m in (0.0, 0.3, 1.0):
                region = SelectionRegion(phi, r_m)
                a = expected_density_of_progress(cfg, region)
                b = expected_density_numeric(cfg, region)
                worst = max(worst, abs(a - b) / b)
    elapsed = time.perf_counter() - start
    verdict(1, worst <= 1e-8 and elapsed < 1.0, f"max rel err {worst:.2e} (<= 1e-8), {elapsed:.3f} s (< 1 s)")


def test_criterion_2_physical_success_probability(verdict):
    start = time.perf_counter()
    parts, ok = [], True
    for d in (0.2, 0.5, 1.0):
        audit = truncation_audit(BASE, d, 100_000, seed=2024)
        target = math.exp(-BASE.lam * BASE.p * BASE.t * d * d)
        z = audit.base.z_score(target)
        shift = audit.shift_in_sigma
        ok &= abs(z) <= 3 and shift < 1
        parts.append(f"d={d:g}: {audit.base.mean:.4f} vs {target:.4f} z={z:+.2f}, doubling shift {shift:.2f}sigma")
    elapsed = time.perf_counter() - start
    verdict(2, ok and elapsed < 30, "; ".join(parts) + f"; {elapsed:.1f} s (< 30 s)")


def test_criterion_3_bound_dominance(verdict):
    phi = math.pi / 3
    gaps, dominated = [], True
    for p in P_GRID:
        cfg = BASE.replace(p=p)
        bound = rm_upper_bound(cfg, phi)
        rm = optimal_rm_given_phi(cfg, phi).rm_star
        if bound.exists:
            dominated &= bound.upper_bound >= rm
            gaps.append((p, bound.upper_bound - rm))
    upper = [g for p, g in gaps if p >= 0.1]
    tightening = all(b <= a for a, b in zip(upper, upper[1:]))
    verdict(
        3,
        dominated and tightening and len(gaps) == len(P_GRID),
        f"bound >= rm* at {len(gaps)}/10 p values; gap over p>=0.1 "
        + ", ".join(f"{g:.2e}" for g in upper),
    )


def test_criterion_4_joint_optimum_consistency(verdict, joint_sweep):
    worst_rm = worst_joint = worst_closed = 0.0
    interior = 0
    for p, res in joint_sweep.items():
        if res.boundary_flag:
            continue
        interior += 1
        cfg = BASE.replace(p=p)
        worst_rm = max(worst_rm, abs(stationarity_residual_rm(cfg, res.phi_star, res.rm_star)))
        worst_joint = max(worst_joint, abs(joint_residual(cfg, res.phi_star, res.rm_star)))
        closed_rm = rm_from_phi_closed_form(cfg, res.phi_star)
        worst_closed = max(worst_closed, math.inf if closed_rm is None else abs(res.rm_star - closed_rm) / res.rm_star)
    ok = interior > 0 and worst_rm <= 1e-10 and worst_joint <= 1e-8 and worst_closed <= 1e-6
    verdict(4, ok, f"{interior} interior optima; r_m residual {worst_rm:.1e}, joint residual {worst_joint:.1e}, closed-form gap {worst_closed:.1e}")


def test_criterion_5_trends(verdict, joint_sweep):
    phis = [joint_sweep[p].phi_star for p in P_GRID]
    rms = [joint_sweep[p].rm_star for p in P_GRID]
    up = all(b >= a for a, b in zip(phis, phis[1:]))
    down = all(b <= a for a, b in zip(rms, rms[1:]))
    verdict(
        5,
        up and down,
        f"phi*/pi {phis[0] / math.pi:.3f} -> {phis[-1] / math.pi:.3f} non-decreasing={up}; "
        f"r_m* {rms[0]:.3f} -> {rms[-1]:.4f} non-increasing={down}",
    )


def test_criterion_6_scaling(verdict):
    res = {lam: optimize_joint(BASE.replace(lam=lam)) for lam in (0.5, 1.0, 2.0, 4.0)}
    e = [r.e_star / math.sqrt(lam) for lam, r in res.items()]
    r = [r.rm_star * math.sqrt(lam) for lam, r in res.items()]
    de = (max(e) - min(e)) / e[1]
    dr = (max(r) - min(r)) / r[1]
    verdict(6, de <= 1e-9 and dr <= 1e-9, f"e*/sqrt(lam) spread {de:.1e}, r_m*·sqrt(lam) spread {dr:.1e} (<= 1e-9)")


def _overlap_ge(a, b, z=1.96):
    # a >= b up to overlap of the two 95% intervals
    return a["e_density"] + z * a["std_error"] >= b["e_density"] - z * b["std_error"]


def test_criterion_7_protocol_comparison(verdict):
    start = time.perf_counter()
    cfg = build_config("compare", {"trials": 10_000, "seed": 1, "mode": "semi"})
    rows = cmd_compare(cfg).records()
    elapsed = time.perf_counter() - start
    by = {}
    for r in rows:
        assert r["status"] == "ok", r
        by.setdefault(r["p"], {})[r["protocol"].split("(")[0] + ("_pi2" if "1.5708" in r["protocol"] else "")] = r
    ordering = all(
        _overlap_ge(c["best_progress"], c["selection_region"]) and _overlap_ge(c["selection_region"], c["nearest_neighbor_pi2"])
        for c in by.values()
    )
    curve = {p: c["selection_region"]["e_density"] for p, c in by.items()}
    argmax = max(curve, key=curve.get)
    degenerate = []
    for p, c in by.items():
        if p >= 0.2:
            a, b = c["selection_region"], c["nearest_neighbor"]
            degenerate.append(abs(a["e_density"] - b["e_density"]) <= 2 * math.hypot(a["std_error"], b["std_error"]))
    ok = ordering and 0.03 <= argmax <= 0.07 and all(degenerate) and elapsed < 300
    verdict(
        7,
        ok,
        f"ordering holds={ordering}; selection-region argmax p={argmax:g}; "
        f"p>=0.2 agreement with optimised nearest neighbour {sum(degenerate)}/{len(degenerate)}; {elapsed:.1f} s",
    )


def test_criterion_8_candidate_ratio(verdict):
    est = candidate_count_ratio(BASE, math.pi / 2, 10_000, seed=7)
    z = est.z_score(0.25)
    verdict(8, abs(z) <= 3, f"ratio {est.mean:.5f} +/- {est.std_error:.5f}, z={z:+.2f} vs 0.25")


DETERMINISM_CONFIGS = {
    "surface": {"sweep": [{"name": "phi", "start": 0.2, "stop": 3.0, "points": 5}, {"name": "r_m", "start": 0, "stop": 1, "points": 4}]},
    "optimize": {"sweep": [{"name": "p", "values": [0.02, 0.2]}]},
    "compare": {
        "trials": 20_000,
        "mode": "physical",
        "sweep": [{"name": "p", "values": [0.05, 0.2]}],
        "protocols": [{"kind": "best_progress"}, {"kind": "selection_region", "phi": 1.2, "r_m": 0.2}],
    },
    "validate": {"trials": 20_000},
    "route": {"route": {"dest": [15.0, 0.0]}},
}


def test_criterion_9_determinism(verdict, tmp_path):
    import json

    outcomes = []
    for command, raw in DETERMINISM_CONFIGS.items():
        conf = tmp_path / f"{command}.json"
        conf.write_text(json.dumps(raw))
        blobs = []
        for run, workers in enumerate((1, 1, 4, 4)):
            out = tmp_path / f"{command}-{run}.csv"
            code = main([command, "--config", str(conf), "--seed", "99", "--workers", str(workers), "--out", str(out)])
            assert code == 0
            blobs.append(out.read_bytes())
        same = all(b == blobs[0] for b in blobs)
        ResultTable.from_csv(blobs[0].decode())
        outcomes.append((command, same))
    verdict(9, all(s for _, s in outcomes), ", ".join(f"{c}: {'identical' if s else 'DIFFERS'}" for c, s in outcomes) + " (workers 1 and 4, two runs each)")
