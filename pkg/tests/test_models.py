import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from specfield.hyperspace import CompactSet, dist_point, gaps, hausdorff
from specfield.models import (
    INF,
    CounterexampleConfig,
    OperatorField,
    ParameterSpace,
    almost_mathieu,
    as_fraction,
    continued_fraction,
    convergents,
    counterexample_family,
    counterexample_gaps,
    farey,
    field_bound,
    golden_mean_convergents,
    kohmoto,
    kohmoto_defect_levels,
    mpf_to_fraction,
    silver_convergents,
    substitution_field,
    substitution_word,
)
from specfield.operators import band_edges, spectrum


# -- rationals --------------------------------------------------------------


def test_as_fraction_forms(caplog):
    assert as_fraction("2/6") == Fraction(1, 3)
    assert as_fraction((2, 6)) == Fraction(1, 3)
    assert "not reduced" in caplog.text
    assert as_fraction(3) == 3
    with pytest.raises(ValueError):
        as_fraction((1, 0))
    with pytest.raises(TypeError):
        as_fraction(0.5)


def test_golden_and_silver_convergents():
    assert golden_mean_convergents(6)[-3:] == [Fraction(3, 5), Fraction(5, 8), Fraction(8, 13)]
    assert silver_convergents(3)[1:] == [Fraction(1, 2), Fraction(2, 5), Fraction(5, 12)]


def test_continued_fraction_of_irrationals():
    with mpmath.workdps(50):
        assert continued_fraction((mpmath.sqrt(5) - 1) / 2, 20) == [0] + [1] * 19
        assert continued_fraction(mpmath.sqrt(2) - 1, 10) == [0] + [2] * 9


@given(st.fractions(min_value=0, max_value=10, max_denominator=10**6))
def test_continued_fraction_roundtrip(x):
    assert convergents(continued_fraction(x, 100))[-1] == x


def test_farey_counts():
    pts = farey(0, 1, 5)
    assert len(pts) == 11  # 1 + sum of phi(q) for q <= 5
    assert pts == sorted(pts) and pts[0] == 0 and pts[-1] == 1


def test_mpf_to_fraction_exact():
    assert mpf_to_fraction(mpmath.mpf(0.375)) == Fraction(3, 8)
    with mpmath.workdps(40):
        x = mpmath.exp(-100)
        assert abs(mpmath.mpf(mpf_to_fraction(x).numerator) / mpf_to_fraction(x).denominator - x) == 0


# -- parameter spaces -------------------------------------------------------


def test_euclidean_space():
    S = ParameterSpace(("1/3", Fraction(1, 2)))
    assert S.distance(*S.points) == Fraction(1, 6)
    assert abs(S.log_distance(*S.points) - math.log(1 / 6)) < 1e-15
    with pytest.raises(ValueError):
        ParameterSpace(("1/2", "2/4"))


def test_ultrametric_space_strong_triangle():
    S = ParameterSpace((0, 1, 2, 5, INF), "ultrametric", 2.0)
    pts = list(S)
    for a in pts:
        for b in pts:
            for c in pts:
                if len({a, b, c}) == 3:
                    assert S.log_distance(a, c) <= max(S.log_distance(a, b), S.log_distance(b, c))
    assert S.log_distance(3, INF) == -8.0
    with pytest.raises(ValueError):
        ParameterSpace((0, 1), "ultrametric", 1.0)


# -- almost Mathieu ---------------------------------------------------------


def theta_union(mu, t, n=400):
    q = as_fraction(t).denominator
    ivs = []
    for th in np.linspace(0, 1 / q, n, endpoint=False):
        ivs.extend(band_edges(almost_mathieu(mu, th, t)).intervals)
    return CompactSet.from_intervals(ivs)


@pytest.mark.parametrize("t", ["1/3", "2/5", "3/7", "1/4"])
def test_am_hull_matches_union_over_phases(t):
    hull = spectrum(almost_mathieu(1.0, None, t))
    union = theta_union(1.0, t)
    assert hausdorff(hull, union) < 1e-3
    for lo, hi in union.intervals:
        assert dist_point(lo, hull) < 1e-9 and dist_point(hi, hull) < 1e-9


def test_am_hull_band_counts():
    # odd q: q bands; even q: the two central bands touch
    for t, n in (("1/3", 3), ("2/5", 5), ("1/4", 3), ("3/8", 7)):
        assert len(spectrum(almost_mathieu(1.0, None, t))) == n, t


def test_am_fixed_phase_half_has_open_central_gap():
    F = band_edges(almost_mathieu(1.0, 0.0, "1/2"))
    assert len(gaps(F)) == 1


def test_am_hull_symmetric_under_reflection():
    F = spectrum(almost_mathieu(1.0, None, "2/7"))
    G = spectrum(almost_mathieu(1.0, None, "5/7"))
    assert hausdorff(F, G) < 1e-9
    neg = CompactSet.from_intervals((-hi, -lo) for lo, hi in F.intervals)
    assert hausdorff(F, neg) < 1e-9


def diagonal_difference_lower_estimate(mu, t, s, n_sites, n_theta=64):
    """``max |V_t(n) - V_s(n)|`` over a finite window and phase sample; never exceeds the norm."""
    n = np.arange(n_sites)[:, None]
    th = np.linspace(0, 1, n_theta, endpoint=False)[None, :]
    d = 2 * mu * (np.cos(2 * np.pi * (n * t + th)) - np.cos(2 * np.pi * (n * s + th)))
    return float(np.abs(d).max())


def test_operator_difference_norm_approaches_four_mu():
    mu = 1.0
    t, s = (math.sqrt(5) - 1) / 2, math.sqrt(2) - 1
    est = [diagonal_difference_lower_estimate(mu, t, s, n) for n in (4, 16, 64, 256)]
    assert est == sorted(est)
    assert est[-1] > 3.99 * mu and est[-1] <= 4 * mu


# -- Kohmoto ----------------------------------------------------------------


def test_kohmoto_half_bands_and_defects():
    F = spectrum(kohmoto(1.0, 0, "1/2"))
    # potential (1, 0): bands from (E - 1) E - 2 = +-2
    s5 = math.sqrt(17)
    exp = [((1 - s5) / 2, 0.0), (1.0, (1 + s5) / 2)]
    for (lo, hi), (el, eh) in zip(F.intervals, exp):
        assert abs(lo - el) < 1e-9 and abs(hi - eh) < 1e-9
    levels = kohmoto_defect_levels(1.0, 0, "1/2")
    g = gaps(F)[0]
    assert any(g.a < e < g.b for e in levels)


def test_kohmoto_potential_values():
    A = kohmoto(2.0, 0, "2/5")
    assert sorted(A.potential) == [0.0, 0.0, 0.0, 2.0, 2.0]


# -- substitutions ----------------------------------------------------------


def test_substitution_words():
    assert substitution_word("fibonacci", 5) == "abaababa"
    assert substitution_word("period_doubling", 3) == "abaa"
    assert substitution_word("thue_morse", 3) == "abba"
    with pytest.raises(ValueError):
        substitution_word("nope", 2)


def test_substitution_zero_coupling_is_free():
    F = spectrum(substitution_field(0.0, "period_doubling", 4))
    assert len(F) == 1
    lo, hi = F.intervals[0]
    assert abs(lo + 2) < 1e-9 and abs(hi - 2) < 1e-9


def test_substitution_gaps_open_with_coupling():
    n0 = len(gaps(spectrum(substitution_field(1e-3, "period_doubling", 4), 1e-10)))
    n1 = len(gaps(spectrum(substitution_field(0.5, "period_doubling", 4), 1e-10)))
    assert n0 >= 1 and n1 >= n0


# -- counterexample family --------------------------------------------------


def test_counterexample_structure():
    cfg = CounterexampleConfig(N=8)
    fam = counterexample_family(cfg)
    gp = counterexample_gaps(cfg)
    w = cfg.widths()
    for (a, b), wn in zip(gp, w):
        assert b - a == wn and 0 < a < b < cfg.c
    assert all(b1 < a2 for (_, b1), (a2, _) in zip(gp, gp[1:]))
    assert fam[INF] == fam[cfg.N]
    for n in range(cfg.N):
        assert len(fam[n + 1]) == len(fam[n]) + 1
    assert all(Fraction(cfg.c) in F for F in fam.values())


def test_counterexample_widths_match_formula():
    cfg = CounterexampleConfig(N=6, alpha=1.0, kappa=2.0, C=1.0)
    for n, w in enumerate(cfg.widths(), start=1):
        assert abs(float(w) - math.exp(-0.5 * 2.0 ** (n - 1))) < 1e-15


def test_counterexample_rejects_bad_config():
    with pytest.raises(ValueError):
        CounterexampleConfig(c=3, m=2)
    with pytest.raises(ValueError):
        CounterexampleConfig(kappa=1)
    with pytest.raises(ValueError):
        counterexample_gaps(CounterexampleConfig(c=0.01, m=1, C=10))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 10), st.floats(1.5, 3.0), st.floats(0.5, 2.0))
def test_counterexample_hausdorff_equals_gap_half_width(N, kappa, alpha):
    cfg = CounterexampleConfig(N=N, kappa=kappa, alpha=alpha)
    try:
        fam = counterexample_family(cfg)
    except ValueError:
        assume(False)
    w = cfg.widths()
    for n in range(N):
        assert hausdorff(fam[n], fam[n + 1]) == w[n] / 2


# -- field bound ------------------------------------------------------------


def test_field_bound():
    S = ParameterSpace(("1/3", "1/2"))
    fld = OperatorField(lambda t: almost_mathieu(1.0, None, t))
    # the hull at t = 1/2 reaches +-2 sqrt 2
    assert abs(field_bound(fld, S) - (2 * math.sqrt(2) + 1)) < 1e-9
    with pytest.raises(ValueError):
        field_bound(fld, ParameterSpace(()))
