"""Acceptance criteria, one test each.  Every test prints a single PASS/FAIL line."""

import cmath
import math
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from specfield.analysis import (
    detect_gap_tips,
    estimate_constants,
    fit_loglog,
    log_abs,
    p2_modulus,
    sweep,
    track_gaps,
    verify_bounds,
    width_exponent,
)
from specfield.cli import analyze, load_config, main
from specfield.hyperspace import CompactSet, gaps, hausdorff
from specfield.models import (
    INF,
    CounterexampleConfig,
    almost_mathieu,
    counterexample_family,
    counterexample_field,
    substitution_field,
)
from specfield.operators import (
    DenseHermitian,
    PeriodicJacobi,
    SymTridiag,
    UnitaryDiag,
    probe_ball,
    probe_unitary_arc,
    resolvent_norm,
    spectrum,
    upper_edge_from_resolvent,
)
from specfield.presets import PRESETS

SLACK = 1e-6


@pytest.fixture
def report(acceptance_log):
    def _report(num, title, ok, detail):
        line = f"criterion {num} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        acceptance_log.append(line)
        print(line)
        assert ok, line

    return _report


@pytest.fixture(scope="module")
def am_closing():
    start = time.perf_counter()
    trace, tracks, tips, _ = analyze(load_config("am_closing"))
    return trace, tracks, tips, time.perf_counter() - start


def random_hermitian(rng, n):
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (X + X.conj().T) / 2


def test_01_probe_equivalence(report):
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    agree = n_true = 0
    for _ in range(1000):
        H = random_hermitian(rng, 8)
        ev = np.linalg.eigvalsh(H)
        x = rng.uniform(ev[0] - 1, ev[-1] + 1)
        dist = np.abs(ev - x).min()
        r = max(1e-3, dist * rng.uniform(0.5, 1.5))
        m = max(np.abs(ev - x).max(), r) * rng.uniform(1.01, 2.0)
        got = probe_ball(DenseHermitian(H), x, r, m)
        want = dist >= r
        n_true += want
        agree += got == want or abs(dist - r) < 1e-9
    dt = time.perf_counter() - start
    ok = agree == 1000 and dt < 10
    report(1, "probe equivalence", ok, f"{agree}/1000 agree ({n_true} outside), {dt:.2f} s")


def test_02_unitary_probe(report):
    rng = np.random.default_rng(202)
    start = time.perf_counter()
    agree = 0
    for _ in range(1000):
        phases = rng.uniform(0, 2 * math.pi, rng.integers(1, 9))
        theta = rng.uniform(0, 2 * math.pi)
        chord = min(abs(cmath.exp(1j * p) - cmath.exp(1j * theta)) for p in phases)
        r = min(1.999, max(1e-3, chord * rng.uniform(0.5, 1.5)))
        got = probe_unitary_arc(UnitaryDiag(tuple(phases)), theta, r)
        agree += got == (chord >= r) or abs(chord - r) < 1e-9
    dt = time.perf_counter() - start
    report(2, "unitary probe", agree == 1000 and dt < 5, f"{agree}/1000 agree, {dt:.2f} s")


def _dyadic_union(rng, k=10):
    n = rng.integers(1, 6)
    ks = np.sort(rng.choice(2**k + 1, size=2 * n, replace=False))
    return CompactSet(tuple((a / 2**k, b / 2**k) for a, b in zip(ks[::2], ks[1::2])))


def _brute_hausdorff(F, G, h):
    # all extremal points (endpoints, gap midpoints) lie on the h-grid
    grid = np.arange(0, 1 + h / 2, h)

    def members(S):
        return grid[np.any([(grid >= lo) & (grid <= hi) for lo, hi in S.intervals], axis=0)]

    def dist(xs, S):
        return np.min([np.maximum(0, np.maximum(lo - xs, xs - hi)) for lo, hi in S.intervals], axis=0)

    return max(dist(members(F), G).max(), dist(members(G), F).max())


def test_03_hausdorff_oracle(report):
    rng = np.random.default_rng(303)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(500):
        F, G = _dyadic_union(rng), _dyadic_union(rng)
        worst = max(worst, abs(hausdorff(F, G) - _brute_hausdorff(F, G, 2.0**-11)))
    dt = time.perf_counter() - start
    report(3, "Hausdorff oracle", worst < 1e-6 and dt < 10, f"max deviation {worst:.2e} over 500 pairs, {dt:.2f} s")


def test_04_resolvent_formula(report):
    rng = np.random.default_rng(404)
    start = time.perf_counter()
    worst = 0.0
    for k in range(200):
        n = int(rng.integers(1, 11))
        if k % 2:
            A = SymTridiag(tuple(rng.normal(size=n)), tuple(rng.normal(size=n - 1)))
            M = A.to_dense()
        else:
            M = random_hermitian(rng, n)
            A = DenseHermitian(M)
        z = complex(rng.uniform(-4, 4), rng.choice([-1, 1]) * 10 ** rng.uniform(-3, 0.5))
        ev = np.linalg.eigvalsh(M)
        dist = np.abs(ev - z).min()
        direct = np.linalg.norm(np.linalg.inv(M - z * np.eye(n)), 2)
        r = resolvent_norm(A, z)
        worst = max(worst, abs(r * dist - 1), abs(r / direct - 1))
    gap_err = 0.0
    for _ in range(50):
        # bands [-sqrt(a^2 + 4), -a] and [a, sqrt(a^2 + 4)]: gap (-a, a)
        a = rng.uniform(0.2, 3)
        x, y = rng.uniform(0.01, a), 10 ** rng.uniform(-3, 0.5)
        gap_err = max(gap_err, abs(upper_edge_from_resolvent(PeriodicJacobi((a, -a)), x, y) - a))
    dt = time.perf_counter() - start
    ok = worst < 1e-9 and gap_err < 1e-9 and dt < 5
    report(4, "resolvent formula", ok, f"max |r dist - 1| {worst:.1e}, gap-form edge error {gap_err:.1e}, {dt:.2f} s")


def test_05_free_spectrum(report):
    cases = [spectrum(substitution_field(0.0, w, lv)) for w, lv in (("period_doubling", 5), ("fibonacci", 7), ("thue_morse", 4))]
    cases += [spectrum(almost_mathieu(0.0, th, t)) for t in ("1/3", "2/7", "5/13") for th in (None, 0.0, 0.3)]
    err = max(max(abs(F.intervals[0][0] + 2), abs(F.intervals[-1][1] - 2)) for F in cases)
    single = all(len(F) == 1 for F in cases)
    report(5, "free spectrum", single and err < 1e-9, f"{len(cases)} models, one band each: {single}, edge error {err:.1e}")


def test_06_am_gap_closing_exponent(report, am_closing):
    trace, tracks, _, dt = am_closing
    half = Fraction(1, 2)
    central = [tr for tr in tracks if tr.status == "closed" and tr.tip[0] == half and abs(float(tr.tip[1])) < 1e-3]
    ld, lw = [], []
    for tr in central:
        for _, t, g in tr.samples:
            ld.append(trace.space.log_distance(t, half))
            lw.append(log_abs(g.width))
    est = fit_loglog(ld, lw)
    ok = bool(central) and abs(est.alpha - 0.5) <= 0.15 and est.r_squared >= 0.9 and dt < 300
    detail = f"{len(central)} central tracks closing at (1/2, 0), exponent {est.alpha:.4f}, r^2 {est.r_squared:.4f}, {dt:.1f} s"
    report(6, "AM gap-closing exponent", ok, detail)


def test_07_am_p2_lipschitz(report):
    start = time.perf_counter()
    trace, _, _, _ = analyze(load_config("am_lipschitz"))
    est = p2_modulus(trace)
    dt = time.perf_counter() - start
    ok = 0.85 <= est.alpha <= 1.15 and dt < 300
    report(7, "AM p2-Lipschitz", ok, f"alpha {est.alpha:.4f} (r^2 {est.r_squared:.3f}, {len(trace)} grid points), {dt:.1f} s")


def _preset_alpha(cfg):
    raw = cfg["verify"]["alpha"].strip().lower()
    return None if raw == "auto" else float(raw)


def test_08_hausdorff_bound_on_every_preset(report):
    parts, total = [], 0
    for name in sorted(PRESETS):
        cfg = load_config(name)
        trace, tracks, tips, _ = analyze(cfg)
        rep = verify_bounds(trace, tracks, estimate_constants(trace, _preset_alpha(cfg)), tips)
        n = rep["checks"]["i_hausdorff"]["n_violations"]
        total += n
        parts.append(f"{name} {n}/{rep['checks']['i_hausdorff']['n_checked']}")
    report(8, "Hausdorff bound (i)", total == 0, f"violations {', '.join(parts)}")


def test_09_closing_gap_bound(report, am_closing):
    trace, tracks, _, _ = am_closing
    consts = estimate_constants(trace, _preset_alpha(load_config("am_closing")))
    checked = bad = n_tracks = 0
    for tr in tracks:
        if tr.status != "closed":
            continue
        n_tracks += 1
        t_star = tr.tip[0]
        for _, t, g in tr.samples:
            ld = trace.space.log_distance(t, t_star)
            bound = math.log(2) + 0.5 * consts.log_cM + 0.5 * consts.alpha * ld
            checked += 1
            bad += log_abs(g.width) > bound + math.log1p(SLACK)
    ok = n_tracks > 0 and bad == 0
    report(9, "closing-gap bound", ok, f"{bad} violations over {checked} samples on {n_tracks} closing tracks")


def test_10_counterexample(report):
    start = time.perf_counter()
    cfg = CounterexampleConfig(c=2, m=3, kappa=2, alpha=1, C=1, N=12)
    fam = counterexample_family(cfg)
    space = cfg.space()
    ns = range(1, cfg.N + 1)
    ld = [space.log_distance(n, INF) for n in ns]
    # gaps of F_inf, in order of birth (they ascend towards c)
    widths = [g.width for g in gaps(fam[INF])]
    assert len(widths) == cfg.N
    w_fit = fit_loglog(ld, [log_abs(w) for w in widths])
    h_fit = fit_loglog([space.log_distance(n, INF) for n in range(cfg.N)], [log_abs(hausdorff(fam[n], fam[INF])) for n in range(cfg.N)])
    trace = sweep(counterexample_field(cfg), space)
    tips = detect_gap_tips(track_gaps(trace, width_tol=0), trace, 1e-6)
    at_c = [tp for tp in tips if abs(tp.c - cfg.c) < 1e-2]
    dt = time.perf_counter() - start
    ok = (
        abs(w_fit.alpha / 0.25 - 1) <= 0.05
        and abs(h_fit.alpha / 0.5 - 1) <= 0.05
        and bool(at_c)
        and not any(tp.isolated for tp in at_c)
        and dt < 10
    )
    detail = (
        f"width exponent {w_fit.alpha:.4f} (want 0.25), Hausdorff exponent {h_fit.alpha:.4f} (want 0.5), "
        f"tip at c: {[round(tp.c, 6) for tp in at_c]} isolated={[tp.isolated for tp in at_c]}, {dt:.1f} s"
    )
    report(10, "counterexample", ok, detail)


def test_11_substitution_gap_opening(report):
    start = time.perf_counter()
    trace, tracks, _, _ = analyze(load_config("period_doubling"))
    opening = [tr for tr in tracks if tr.status == "closed" and tr.tip[0] == 0]
    exps = [width_exponent(tr, trace, Fraction(0)).alpha for tr in opening if len(tr.samples) >= 4]
    dt = time.perf_counter() - start
    ok = bool(exps) and min(exps) >= 0.5 - 0.15 and dt < 300
    rng = f"[{min(exps):.3f}, {max(exps):.3f}]" if exps else "none"
    report(11, "substitution gap opening", ok, f"{len(exps)} opening gaps, exponents {rng}, {dt:.1f} s")


ACCEPTANCE_COMMANDS = [[cmd, "--preset", p] for p in sorted(PRESETS) if p != "counterexample" for cmd in ("sweep", "gaps", "holder", "verify")]
ACCEPTANCE_COMMANDS += [["counterexample", "--preset", "counterexample"], ["spectrum", "--set", "model.t=3/7"]]


def test_12_determinism(report, tmp_path):
    runs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        codes = [main([*argv, "--out", str(out), "--quiet"]) for argv in ACCEPTANCE_COMMANDS]
        runs.append((codes, {p.name: p.read_bytes() for p in sorted(Path(out).iterdir())}))
    (c0, f0), (c1, f1) = runs
    same = f0.keys() == f1.keys() and all(f0[k] == f1[k] for k in f0)
    ok = same and c0 == c1 and set(c0) == {0} and len(f0) > 0
    report(12, "determinism", ok, f"{len(ACCEPTANCE_COMMANDS)} commands, {len(f0)} files byte-identical: {same}")
