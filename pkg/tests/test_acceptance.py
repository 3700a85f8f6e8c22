"""Acceptance suite: one printed pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py`` or directly as a script.
"""

from __future__ import annotations

import contextlib
import io
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest
import yaml

from heisenberg_simons import cli
from heisenberg_simons import verifier as vf
from heisenberg_simons.surface_defs import gallery, sample_points

SEED = 20240917
N2_GALLERY = [
    ("vertical_hyperplane", {}),
    ("horizontal_plane", {}),
    ("hyperbolic_paraboloid", {}),
    ("catenoid", {"E": 0.5}),
    ("catenoid", {"E": 1.0}),
    ("catenoid", {"E": 2.0}),
    ("helicoid", {}),
]
SIMONS_SURFACES = [("vertical_hyperplane", {}), ("hyperbolic_paraboloid", {}), ("catenoid", {"E": 0.5}), ("catenoid", {"E": 1.0}), ("catenoid", {"E": 2.0})]
K_VALUES = [0.0, 0.5, 1.0, 1.5, 2.0]
DELTAS = [0.0, 1e-3, 1.0]


def _analysis(gid, params, count, seed=SEED, n=2, frame="adapted"):
    e = gallery(gid, n, params)
    pts = sample_points(e.surface, e.region, count, seed)
    return vf.Analysis(e.surface, pts, vf.Tolerances(), frame=frame, expected=e.expected_properties, known=e.known, seed=seed)


def _statuses(reports):
    return {r.status for r in reports}


# -- criteria ---------------------------------------------------------------


def structure():
    worst = {}
    for n in (1, 2):
        for r in vf.structure_suite(n, 1000, SEED + n, 1e-10):
            worst[r.check_id] = max(worst.get(r.check_id, 0.0), r.residual)
    wanted = ("heis_bracket", "heis_torsion", "heis_flatness", "heis_J_compat")
    ok = all(worst[c] < 1e-10 for c in wanted)
    return ok, ", ".join(f"{c} {worst[c]:.1e}" for c in wanted) + " (1000 points, n = 1, 2)"


def _relative_ok(r):
    if r.rhs == 0.0:
        return abs(r.lhs) <= 1e-8
    return abs(r.lhs - r.rhs) <= 1e-8 * abs(r.rhs)


def example_values():
    plan = [("catenoid", {"E": 1.0}, 20), ("helicoid", {}, 50), ("hyperbolic_paraboloid", {}, 20), ("horizontal_plane", {}, 20), ("vertical_hyperplane", {}, 20)]
    bad, total, seen = 0, 0, set()
    for gid, params, count in plan:
        an = _analysis(gid, params, count)
        for r in vf.POINT_IMPL["example_values"](an, {}):
            total += 1
            bad += not _relative_ok(r)
            seen.add(f"{gid}:{r.notes.split(':')[0]}")
        if gid == "catenoid":
            ratio = 2 * an.hsq - 3 * an.v("ell") ** 2
            total += len(ratio)
            bad += int(np.sum(np.abs(ratio) > 1e-8 * 3 * an.v("ell") ** 2))
    required = {
        "catenoid:jnu_nu_coeff", "catenoid:ell_sq", "catenoid:htilde_sq", "catenoid:p3",
        "helicoid:p3", "hyperbolic_paraboloid:p3", "hyperbolic_paraboloid:jnu_nu_norm",
        "horizontal_plane:p3", "vertical_hyperplane:alpha", "vertical_hyperplane:htilde_sq", "vertical_hyperplane:q",
    }
    missing = required - seen
    return bad == 0 and not missing, f"{total - bad}/{total} values within 1e-8 relative" + (f"; missing {sorted(missing)}" if missing else "")


TENSOR_IDS = [
    "gauss", "codazzi", "codazzi_htilde", "codazzi_htilde_corollary", "nabla_C", "hessian_commutation",
    "trace_nabla_h", "trace_hess_h", "h_norm_split", "laplacian_norm_htilde", "jnu_htilde_sq",
]


def tensor_identities():
    counts = {"pass": 0}
    failures = []
    for gid, params in N2_GALLERY:
        for frame in ("adapted", "rotated"):
            an = _analysis(gid, params, 20, frame=frame)
            for cid in TENSOR_IDS:
                for r in vf.POINT_IMPL[cid](an, {}):
                    counts[r.status] = counts.get(r.status, 0) + 1
                    if r.status != "pass":
                        failures.append(f"{gid}/{frame}/{cid}")
    detail = f"{counts['pass']} point reports pass across {len(N2_GALLERY)} surfaces x 2 pivotings x {len(TENSOR_IDS)} identities"
    if failures:
        detail += f"; not passing: {sorted(set(failures))[:5]}"
    return not failures, detail


def simons():
    problems = []
    worst_pair = 0.0
    for gid, params in SIMONS_SURFACES:
        an = _analysis(gid, params, 20)
        for cid in ("simons_full", "simons_contracted"):
            reps = vf.POINT_IMPL[cid](an, {})
            if _statuses(reps) != {"pass"}:
                problems.append(f"{gid}{params}/{cid}: {sorted(_statuses(reps))}")
        for r in vf.POINT_IMPL["hhJ_identity_h2"](an, {}):
            worst_pair = max(worst_pair, r.residual)
    cat = _analysis("catenoid", {"E": 1.0}, 20)
    margins = [r.margin for r in vf.POINT_IMPL["ell_bound_h2"](cat, {})]
    sat = max(abs(m) for m in margins)
    ok = not problems and worst_pair <= 1e-8 and sat < 1e-8
    return ok, f"Simons full and contracted pass on {len(SIMONS_SURFACES)} surfaces; pairing identity residual {worst_pair:.1e}; catenoid bound |margin| {sat:.1e}" + (f"; {problems}" if problems else "")


def kato():
    problems = []
    worst = np.inf
    for gid, params in N2_GALLERY:
        an = _analysis(gid, params, 20)
        for r in vf.POINT_IMPL["kato_trivial"](an, {}):
            worst = min(worst, r.margin)
            if r.status != "pass":
                problems.append(f"trivial {gid}")
    for gid, params in [("vertical_hyperplane", {}), ("catenoid", {"E": 0.5}), ("catenoid", {"E": 1.0}), ("catenoid", {"E": 2.0})]:
        an = _analysis(gid, params, 20)
        for r in vf.POINT_IMPL["kato_improved"](an, {"k": K_VALUES}) + vf.POINT_IMPL["simons_kato"](an, {"simons_kato_k": K_VALUES, "delta": DELTAS}):
            worst = min(worst, r.margin)
            if r.status != "pass":
                problems.append(f"{r.check_id} {gid}{params}")
    return not problems and worst >= -1e-8, f"smallest margin {worst:.2e}" + (f"; not passing: {sorted(set(problems))}" if problems else "")


PROPERTY_TABLE = {
    "catenoid": ("holds", "holds", "holds"),
    "hyperbolic_paraboloid": ("holds", "holds", "fails"),
    "horizontal_plane": ("holds", "holds", "zero"),
    "vertical_hyperplane": ("holds", "holds", "zero"),
    "helicoid": (None, None, "holds"),
}


def _measured_properties(an):
    g = an.geom
    hnorm = np.sqrt(an.hsq)
    xdev, _ = g.p1_residuals()
    p1 = "holds" if np.all(xdev <= 1e-8 * (1 + hnorm)) else "fails"
    grad_alpha = np.linalg.norm(g.Ealpha.value, axis=0)
    p2 = "holds" if np.all(g.p2_residual() <= 1e-8 * (1 + grad_alpha)) else "fails"
    p3v = g.p3_value()
    if np.all(np.abs(p3v) <= 1e-8):
        p3 = "zero"  # boundary case, holds with equality
    elif np.all(p3v >= -1e-8):
        p3 = "holds"
    else:
        p3 = "fails"
    return (p1, p2, p3), p3v


def properties():
    rows, problems = [], []
    for gid, expected in PROPERTY_TABLE.items():
        params = {"E": 1.0} if gid == "catenoid" else {}
        an = _analysis(gid, params, 20)
        measured, p3v = _measured_properties(an)
        reports = vf.POINT_IMPL["property_p1"](an, {}) + vf.POINT_IMPL["property_p2"](an, {}) + vf.POINT_IMPL["property_p3"](an, {})
        if "fail" in _statuses(reports):
            problems.append(f"{gid} report disagrees with the table")
        for want, got in zip(expected, measured):
            if want is not None and want != got:
                problems.append(f"{gid}: expected {want}, measured {got}")
        if gid == "vertical_hyperplane" and np.any(p3v != 0.0):
            problems.append("vertical hyperplane J(nu)alpha + alpha^2 not identically 0")
        rows.append(f"{gid}({'/'.join(measured)})")
    return not problems, "; ".join(rows) + (f"; {problems}" if problems else "")


def appendix():
    reps = vf.appendix_threshold_reports(1e-15) + vf.appendix_admissibility_reports(100, SEED)
    ok = all(r.passed for r in reps)
    exact = ", ".join(r.notes.split(" (")[0] for r in reps if r.check_id == "appendix_u_threshold")
    mism = [int(r.lhs) for r in reps if r.check_id == "appendix_admissibility"]
    return ok, f"{exact}; brute-force mismatches on 100 triples (existence, drawn k): {mism}"


def quadrature():
    reps = []
    for cid in ("volume_growth", "cutoff_gradient", "curvature_estimate", "beta_window"):
        reps += vf.run_global_check(cid, SEED, vf.Tolerances())
    exps = [f"n={2 if r.rhs == 5 else 1}: {r.lhs:.3f}" for r in reps if r.check_id == "volume_growth"]
    cut = [r for r in reps if r.check_id == "cutoff_gradient"]
    ok = all(r.passed for r in reps)
    failing = sorted({r.check_id for r in reps if not r.passed})
    return ok, f"volume exponents {', '.join(exps)}; max |grad phi| R {max(r.lhs for r in cut):.4f} <= {cut[0].rhs}; curvature LHS zero; beta windows agree" + (f"; failing {failing}" if failing else "")


def determinism():
    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp) / "default.yaml"
        cfg.write_text(yaml.safe_dump(cli.DEFAULT_CONFIG))
        with contextlib.redirect_stdout(io.StringIO()):
            codes = [cli.main(["run", "--config", str(cfg), "--out", str(Path(tmp) / d)]) for d in ("a", "b")]
        a = (Path(tmp) / "a" / "run.csv").read_bytes()
        b = (Path(tmp) / "b" / "run.csv").read_bytes()
    ok = codes == [0, 0] and a == b
    return ok, f"default configuration exit codes {codes}; CSV identical: {a == b} ({len(a)} bytes)"


CRITERIA = [
    ("structure", structure),
    ("example values", example_values),
    ("tensor identities", tensor_identities),
    ("Simons identities", simons),
    ("Kato inequalities", kato),
    ("properties", properties),
    ("appendix criteria", appendix),
    ("quadrature and growth", quadrature),
    ("determinism", determinism),
]


def _line(number, title, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}"


@pytest.mark.parametrize("number", range(1, len(CRITERIA) + 1), ids=[t.replace(" ", "_") for t, _ in CRITERIA])
def test_acceptance(number, capsys):
    title, fn = CRITERIA[number - 1]
    ok, detail = fn()
    with capsys.disabled():
        print("\n" + _line(number, title, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for i, (title, fn) in enumerate(CRITERIA, 1):
        ok, detail = fn()
        results.append(ok)
        print(_line(i, title, ok, detail), flush=True)
    sys.exit(0 if all(results) else 1)
