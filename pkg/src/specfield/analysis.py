"""Sweeps, gap tracking, gap tips, Hoelder estimation and bound verification.

Values that may be exact (Fractions, as in the slow-closing family) are kept
exact until a logarithm is taken; every comparison against a bound happens in
the log domain so that distances like ``exp(-2048)`` are handled.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .hyperspace import CompactSet, Gap, dist_point, gaps, hausdorff, max_abs, poly_image
from .models import INF, OperatorField, ParameterSpace, field_bound
from .operators import Poly2

log = logging.getLogger(__name__)

NOISE_FLOOR = 1e-12
SLACK = 1e-6
LOG_SLACK = math.log1p(SLACK)


class InsufficientData(ValueError):
    pass


class SweepError(RuntimeError):
    pass


def log_abs(x) -> float:
    """``log|x|`` for floats, ints and arbitrarily small Fractions; ``-inf`` at zero."""
    if x == 0:
        return -INF
    if isinstance(x, Fraction):
        x = abs(x)
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(abs(float(x)))


def _is_exact(x) -> bool:
    return isinstance(x, (Fraction, int)) and not isinstance(x, bool)


def fmt_param(t) -> str:
    if t == INF:
        return "inf"
    return str(t)


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumTrace:
    entries: tuple
    space: ParameterSpace
    m: float
    merge_tol: float | None = None

    def __post_init__(self):
        ents = tuple((t, F) for t, F in self.entries)
        object.__setattr__(self, "entries", ents)
        if tuple(t for t, _ in ents) != tuple(self.space.points):
            raise ValueError("trace entries must follow the grid order")
        for t, F in ents:
            if F.is_empty:
                raise ValueError(f"empty spectrum at t={fmt_param(t)}")
            if max_abs(F) > self.m:
                raise ValueError(f"spectrum at t={fmt_param(t)} exceeds the field bound m={self.m}")

    @property
    def params(self) -> list:
        return [t for t, _ in self.entries]

    @property
    def spectra(self) -> list[CompactSet]:
        return [F for _, F in self.entries]

    @property
    def exact(self) -> bool:
        return any(F.is_exact() for F in self.spectra)

    def __len__(self) -> int:
        return len(self.entries)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "interval_index", "lo", "hi"])
        for t, F in self.entries:
            for k, (lo, hi) in enumerate(F.intervals):
                w.writerow([fmt_param(t), k, repr(float(lo)), repr(float(hi))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "space": self.space.to_dict(),
            "m": self.m,
            "merge_tol": self.merge_tol,
            "entries": [{"t": fmt_param(t), **F.to_dict()} for t, F in self.entries],
        }


def sweep(fld: OperatorField, grid: ParameterSpace, merge_tol: float | None = None, m: float | None = None) -> SpectrumTrace:
    """Spectra along the grid, in grid order."""
    if len(grid) == 0:
        raise ValueError("empty grid")
    entries = []
    for t in grid:
        try:
            entries.append((t, fld.spectrum_at(t, merge_tol)))
        except Exception as exc:  # re-raised with the offending parameter
            raise SweepError(f"spectrum failed at t={fmt_param(t)}: {exc}") from exc
    if m is None:
        m = max(float(max_abs(F)) for _, F in entries) + 1.0
    return SpectrumTrace(tuple(entries), grid, float(m), merge_tol)


# ---------------------------------------------------------------------------
# power-law fits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HolderEstimate:
    alpha: float
    C: float
    r_squared: float
    n_points: int
    scale_range: tuple

    @property
    def degenerate(self) -> bool:
        return self.alpha == INF

    def to_dict(self) -> dict:
        return {
            "alpha": _jnum(self.alpha),
            "C": _jnum(self.C),
            "r_squared": _jnum(self.r_squared),
            "n_points": self.n_points,
            "scale_range": [_jnum(x) for x in self.scale_range],
        }


def _jnum(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


def fit_loglog(logd: Sequence[float], logy: Sequence[float]) -> HolderEstimate:
    """Least squares ``log y = log C + alpha log d``."""
    x = np.asarray(logd, dtype=float)
    y = np.asarray(logy, dtype=float)
    n = len(x)
    if n == 0:
        return HolderEstimate(INF, 0.0, 1.0, 0, (0.0, 0.0))
    if n < 4:
        raise InsufficientData(f"need at least 4 points for a power-law fit, got {n}")
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    if sxx == 0.0:
        raise InsufficientData("all scales coincide, exponent undetermined")
    alpha = float(((x - xm) * (y - ym)).sum()) / sxx
    logC = ym - alpha * xm
    res = y - (logC + alpha * x)
    syy = float(((y - ym) ** 2).sum())
    r2 = 1.0 - float((res**2).sum()) / syy if syy > 0 else 1.0
    with np.errstate(over="ignore"):
        C = float(np.exp(logC))
    return HolderEstimate(alpha, C, r2, n, (float(np.exp(x.min())), float(np.exp(x.max()))))


def fit_power_law(d: Sequence, y: Sequence, noise_floor: float = NOISE_FLOOR) -> HolderEstimate:
    """Fit ``y = C d^alpha`` on the pairs with ``d > 0`` and ``y > noise_floor``.

    If nothing survives the floor the data carry no signal: ``alpha = inf``, ``C = 0``.
    """
    pts = [(log_abs(a), log_abs(b)) for a, b in zip(d, y) if a > 0 and b > noise_floor]
    return fit_loglog([p[0] for p in pts], [p[1] for p in pts])


def _lsq_intercept(xs: Sequence, ys: Sequence):
    """Intercept of the least-squares line y = c + k x, in exact arithmetic when possible."""
    n = len(xs)
    if n == 1:
        return ys[0]
    sx = sum(xs, 0 * xs[0])
    sy = sum(ys, 0 * ys[0])
    xm, ym = sx / n, sy / n
    sxx = sum(((x - xm) * (x - xm) for x in xs), 0 * xs[0])
    if sxx == 0:
        return ym
    sxy = sum(((x - xm) * (y - ym) for x, y in zip(xs, ys)), 0 * xs[0])
    return ym - (sxy / sxx) * xm


# ---------------------------------------------------------------------------
# polynomial norms along a trace
# ---------------------------------------------------------------------------


def polynomial_family(M, exact: bool = False) -> list[Poly2]:
    """Deterministic sample of ``{p : ||p||_1 <= M}``: ``p = M v / ||v||_1`` for ``v`` in ``{-2..2}^3``.

    ``v = 0`` gives the zero polynomial; 125 entries in all.
    """
    out = []
    Mq = Fraction(M) if exact else float(M)
    for v0 in range(-2, 3):
        for v1 in range(-2, 3):
            for v2 in range(-2, 3):
                s = abs(v0) + abs(v1) + abs(v2)
                if s == 0:
                    out.append(Poly2(0 * Mq, 0 * Mq, 0 * Mq))
                else:
                    out.append(Poly2(Mq * v0 / s, Mq * v1 / s, Mq * v2 / s))
    return out


def poly_norms(F: CompactSet, polys: Sequence[Poly2]) -> list:
    """``||p(A)||`` for each polynomial, from the spectrum ``F`` alone."""
    if F.is_exact():
        return [max_abs(poly_image(F, p)) for p in polys]
    lo = np.array(F.lows, dtype=float)
    hi = np.array(F.highs, dtype=float)
    P = np.array([[float(p.p0), float(p.p1), float(p.p2)] for p in polys])
    e = np.concatenate([lo, hi])
    vals = np.abs(P[:, :1] + P[:, 1:2] * e + P[:, 2:3] * e * e).max(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(P[:, 2] != 0, -P[:, 1] / (2 * P[:, 2]), np.nan)
    ok = np.isfinite(h)
    idx = np.searchsorted(lo, np.where(ok, h, 0.0), side="right") - 1
    inside = ok & (idx >= 0) & (np.where(ok, h, 0.0) <= hi[np.clip(idx, 0, None)])
    hv = np.abs(P[:, 0] + P[:, 1] * np.where(ok, h, 0.0) + P[:, 2] * np.where(ok, h, 0.0) ** 2)
    return list(np.where(inside, np.maximum(vals, hv), vals))


def _pairs(n: int):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _pair_logd(trace: SpectrumTrace, pairs) -> np.ndarray:
    ts = trace.params
    return np.array([trace.space.log_distance(ts[i], ts[j]) for i, j in pairs], dtype=float)


def _pair_sup_diff(values: list[list], pairs) -> list:
    """Per pair ``max_k |values[i][k] - values[j][k]|`` (exact when the values are)."""
    if values and values[0] and _is_exact(values[0][0]):
        return [max((abs(a - b) for a, b in zip(values[i], values[j])), default=0) for i, j in pairs]
    V = np.array(values, dtype=float)
    if V.size == 0:
        return [0.0] * len(pairs)
    return [float(np.abs(V[i] - V[j]).max()) for i, j in pairs]


def _floor_for(trace: SpectrumTrace) -> float:
    return 0.0 if trace.exact else NOISE_FLOOR


def _fit_pairs(logd: np.ndarray, diffs: list, floor: float) -> HolderEstimate:
    pts = [(ld, log_abs(v)) for ld, v in zip(logd, diffs) if v > floor and ld > -INF]
    return fit_loglog([p[0] for p in pts], [p[1] for p in pts])


def p2_modulus(source, grid: ParameterSpace | None = None, M: float | None = None, polys=None, merge_tol=None) -> HolderEstimate:
    """Regression of ``sup_p |Phi_p(s) - Phi_p(t)|`` against ``d(s, t)`` over all pairs.

    ``source`` is a :class:`SpectrumTrace` or an :class:`OperatorField` (then
    ``grid`` is required).  ``M`` defaults to ``4 m^2 + 2``.
    """
    trace = source if isinstance(source, SpectrumTrace) else sweep(source, grid, merge_tol)
    if len(trace) < 4:
        raise InsufficientData("p2_modulus needs at least 4 grid points")
    if polys is None:
        if M is None:
            M = 4 * trace.m**2 + 2
        polys = polynomial_family(M, exact=trace.exact)
    if len(polys) == 0:
        raise ValueError("need at least one polynomial")
    pairs = _pairs(len(trace))
    phis = [poly_norms(F, polys) for F in trace.spectra]
    return _fit_pairs(_pair_logd(trace, pairs), _pair_sup_diff(phis, pairs), _floor_for(trace))


def spectrum_modulus(trace: SpectrumTrace) -> HolderEstimate:
    """Regression of ``d_H(sigma_s, sigma_t)`` against ``d(s, t)`` over all pairs."""
    if len(trace) < 4:
        raise InsufficientData("spectrum_modulus needs at least 4 grid points")
    pairs = _pairs(len(trace))
    S = trace.spectra
    dh = [hausdorff(S[i], S[j]) for i, j in pairs]
    return _fit_pairs(_pair_logd(trace, pairs), dh, _floor_for(trace))


# ---------------------------------------------------------------------------
# sup-based constants
# ---------------------------------------------------------------------------


def witness_points(trace: SpectrumTrace) -> list:
    """Centres ``lambda`` of the polynomials ``4m^2 - (z - lambda)^2`` used in the bound proofs.

    Spectral edges and gap midpoints realise the Hausdorff distance; gap
    third-points realise the edge estimate for open gaps.  All are clipped to
    ``|lambda| <= m`` so that the closed form of the norm applies.
    """
    pts = set()
    for F in trace.spectra:
        for lo, hi in F.intervals:
            pts.update((lo, hi))
        for g in gaps(F):
            w = g.b - g.a
            pts.update((g.center, g.a + w / 3, g.b - w / 3))
    m = trace.m
    return sorted(x for x in pts if abs(x) <= m)


def _dist_matrix(trace: SpectrumTrace, lam: list):
    if trace.exact:
        return [[dist_point(x, F) for x in lam] for F in trace.spectra]
    L = np.array(lam, dtype=float)
    out = []
    for F in trace.spectra:
        lo = np.array(F.lows, dtype=float)
        hi = np.array(F.highs, dtype=float)
        idx = np.searchsorted(lo, L, side="right") - 1
        k = np.clip(idx, 0, None)
        below = idx < 0
        inside = ~below & (L <= hi[k])
        right = np.where(idx + 1 < len(lo), lo[np.clip(idx + 1, 0, len(lo) - 1)] - L, INF)
        left = np.where(below, INF, L - hi[k])
        d = np.where(inside, 0.0, np.minimum(left, right))
        out.append(d)
    return np.array(out)


def witness_diffs(trace: SpectrumTrace, pairs) -> list:
    """Per pair, ``sup_lambda |dist(lambda, F_s)^2 - dist(lambda, F_t)^2|``.

    For ``|lambda| <= m`` and spectra inside ``[-m, m]`` this is exactly
    ``| ||p(A_s)|| - ||p(A_t)|| |`` for ``p(z) = 4m^2 - (z - lambda)^2``, evaluated
    without the cancellation of subtracting two numbers near ``4m^2``.
    """
    lam = witness_points(trace)
    if not lam:
        return [0] * len(pairs)
    D = _dist_matrix(trace, lam)
    if trace.exact:
        sq = [[d * d for d in row] for row in D]
        return [max(abs(a - b) for a, b in zip(sq[i], sq[j])) for i, j in pairs]
    sq = D * D
    return [float(np.abs(sq[i] - sq[j]).max()) for i, j in pairs]


def edge_diffs(trace: SpectrumTrace, pairs) -> list:
    """Per pair ``max(|d min|, |d max|)``: the witnesses ``m + z`` and ``m - z``."""
    e = [(F.intervals[0][0], F.intervals[-1][1]) for F in trace.spectra]
    return [max(abs(e[i][0] - e[j][0]), abs(e[i][1] - e[j][1])) for i, j in pairs]


@dataclass(frozen=True)
class Constants:
    """Sup-based Hoelder constants at exponent ``alpha`` (stored as logs)."""

    alpha: float
    m: float
    M: float
    log_cM: float
    log_c1m: float
    alpha_fit: HolderEstimate | None = None

    @property
    def cM(self) -> float:
        return _safe_exp(self.log_cM)

    @property
    def c1m(self) -> float:
        return _safe_exp(self.log_c1m)

    def to_dict(self) -> dict:
        return {
            "alpha": _jnum(self.alpha),
            "m": self.m,
            "M": self.M,
            "C_M": _jnum(self.cM),
            "log_C_M": _jnum(self.log_cM),
            "C_1+m": _jnum(self.c1m),
            "log_C_1+m": _jnum(self.log_c1m),
            "alpha_fit": self.alpha_fit.to_dict() if self.alpha_fit else None,
        }


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return INF


def _log_sup_ratio(logd: np.ndarray, diffs: list, alpha: float) -> float:
    best = -INF
    for ld, v in zip(logd, diffs):
        if v == 0 or ld == -INF:
            continue
        if alpha == INF:
            return INF
        best = max(best, log_abs(v) - alpha * ld)
    return best


def estimate_constants(trace: SpectrumTrace, alpha: float | None = None) -> Constants:
    """``C_(4m^2+2)`` and ``C_(1+m)`` as sups over pairs of the grid and witness families.

    ``alpha`` defaults to the exponent of the :func:`p2_modulus` regression.
    """
    fit = None
    if alpha is None:
        fit = p2_modulus(trace)
        alpha = fit.alpha
    m = trace.m
    exact = trace.exact
    M = 4 * Fraction(m) ** 2 + 2 if exact else 4 * m * m + 2
    pairs = _pairs(len(trace))
    logd = _pair_logd(trace, pairs)
    grid_M = _pair_sup_diff([poly_norms(F, polynomial_family(M, exact)) for F in trace.spectra], pairs)
    wit = witness_diffs(trace, pairs)
    diff_M = [max(a, b) for a, b in zip(grid_M, wit)]
    grid_1m = _pair_sup_diff([poly_norms(F, polynomial_family(1 + Fraction(m) if exact else 1 + m, exact)) for F in trace.spectra], pairs)
    diff_1m = [max(a, b) for a, b in zip(grid_1m, edge_diffs(trace, pairs))]
    return Constants(
        alpha=float(alpha),
        m=float(m),
        M=float(M),
        log_cM=float(_log_sup_ratio(logd, diff_M, alpha)),
        log_c1m=float(_log_sup_ratio(logd, diff_1m, alpha)),
        alpha_fit=fit,
    )


# ---------------------------------------------------------------------------
# gap tracking
# ---------------------------------------------------------------------------


@dataclass
class GapTrack:
    """A gap followed across consecutive grid points.

    ``samples`` holds ``(grid_index, t, Gap)``.  ``status`` is ``open``,
    ``closing`` (width shrinking towards a grid boundary) or ``closed`` (the
    gap disappears at ``tip = (t_star, c)``).
    """

    samples: list = field(default_factory=list)
    status: str = "open"
    tip: tuple | None = None
    tip_index: int | None = None

    @property
    def widths(self) -> list:
        return [g.width for _, _, g in self.samples]

    @property
    def first(self) -> int:
        return self.samples[0][0]

    @property
    def last(self) -> int:
        return self.samples[-1][0]

    def to_dict(self) -> dict:
        out = {
            "status": self.status,
            "samples": [
                {"t": fmt_param(t), "a": float(g.a), "b": float(g.b), "width": float(g.width)}
                for _, t, g in self.samples
            ],
        }
        if self.tip is not None:
            out["tip"] = {"t": fmt_param(self.tip[0]), "c": float(self.tip[1])}
        return out


def _tracked_gaps(F: CompactSet, width_tol) -> list[Gap]:
    return [g for g in gaps(F) if g.width >= width_tol and g.width > 0]


def default_width_tol(trace: SpectrumTrace) -> float:
    return 10 * trace.merge_tol if trace.merge_tol else 0.0


def default_match_radius(trace: SpectrumTrace, width_tol) -> float:
    """Half the smallest centre separation of adjacent gaps in the first spectrum with two gaps."""
    for F in trace.spectra:
        gs = _tracked_gaps(F, width_tol)
        if len(gs) >= 2:
            return float(min(b.center - a.center for a, b in zip(gs, gs[1:]))) / 2
    return INF


def _match(prev: list[Gap], cur: list[Gap], radius) -> dict:
    cands = []
    for i, g in enumerate(prev):
        for j, h in enumerate(cur):
            dc = abs(g.center - h.center)
            overlap = g.a < h.b and h.a < g.b
            ratio_ok = max(g.width, h.width) <= 8 * min(g.width, h.width)
            if (overlap or dc < radius) and ratio_ok:
                cands.append((dc, h.center, g.center, i, j))
    cands.sort()
    seen_i: set = set()
    seen_j: set = set()
    out = {}
    count_i: dict = {}
    for _, _, _, i, _ in cands:
        count_i[i] = count_i.get(i, 0) + 1
    for _, _, _, i, j in cands:
        if i in seen_i or j in seen_j:
            continue
        out[i] = j
        seen_i.add(i)
        seen_j.add(j)
    amb = sum(1 for v in count_i.values() if v > 1)
    if amb:
        log.debug("gap matching: %d gaps had several candidates, nearest centre kept", amb)
    return out


def track_gaps(trace: SpectrumTrace, match_radius: float | None = None, width_tol=None) -> list[GapTrack]:
    """Follow gaps of width ``>= width_tol`` across adjacent grid points.

    Gaps match when they overlap or their centres are closer than
    ``match_radius`` and their widths are within a factor 8; among several
    candidates the nearest centre wins (ties: lower centre), one to one.
    """
    if len(trace) == 0:
        raise ValueError("empty trace")
    if width_tol is None:
        width_tol = default_width_tol(trace)
    if match_radius is None:
        match_radius = default_match_radius(trace, width_tol)
    ts = trace.params
    tracks: list[GapTrack] = []
    active: dict = {}
    prev: list[Gap] = []
    for k, F in enumerate(trace.spectra):
        cur = _tracked_gaps(F, width_tol)
        mapping = _match(prev, cur, match_radius) if prev else {}
        new_active = {}
        for j, g in enumerate(cur):
            i = next((i for i, jj in mapping.items() if jj == j), None)
            tr = active[i] if i is not None else None
            if tr is None:
                tr = GapTrack()
                tracks.append(tr)
            tr.samples.append((k, ts[k], g))
            new_active[j] = tr
        active = new_active
        prev = cur
    for tr in tracks:
        _classify(tr, trace, width_tol)
    tracks.sort(key=lambda tr: (tr.first, tr.samples[0][2].a))
    return tracks


def _tip_center(samples) -> object:
    tail = samples[-4:]
    return _lsq_intercept([g.width for _, _, g in tail], [g.center for _, _, g in tail])


def _classify(tr: GapTrack, trace: SpectrumTrace, width_tol) -> None:
    n = len(trace)
    ends = []
    # end of track: the gap is gone at the next grid point
    if tr.last + 1 < n:
        ends.append((tr.samples, tr.last + 1))
    if tr.first > 0:
        ends.append((list(reversed(tr.samples)), tr.first - 1))
    for seq, k_star in ends:
        if len(seq) < 2 or not seq[-1][2].width < seq[-2][2].width:
            continue
        c = _tip_center(seq)
        F_star = trace.spectra[k_star]
        if dist_point(c, F_star) <= max(width_tol, 2 * seq[-1][2].width):
            tr.status = "closed"
            tr.tip = (trace.params[k_star], c)
            tr.tip_index = k_star
            return
    w = tr.widths
    if len(w) >= 3:
        head, tail = w[:3], w[-3:]
        if (tail[0] > tail[1] > tail[2]) or (head[0] < head[1] < head[2]):
            tr.status = "closing"


# ---------------------------------------------------------------------------
# gap tips
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapTip:
    c: float
    t0: object
    isolated: bool
    source: str = "closed-track"
    # (t, width) at the birth of each gap in an accumulation
    births: tuple = ()

    def to_dict(self) -> dict:
        return {"c": float(self.c), "t0": fmt_param(self.t0), "isolated": self.isolated, "source": self.source, "n_births": len(self.births)}


def _isolated(c, F: CompactSet, delta) -> bool:
    return any(lo <= c - delta and c + delta <= hi for lo, hi in F.intervals)


def detect_gap_tips(tracks: list[GapTrack], trace: SpectrumTrace, isolation_delta: float) -> list[GapTip]:
    """Gap tips ``(c, t0, isolated)``.

    Two sources: closed tracks, and accumulations of births (at least three
    tracks born at consecutive grid points with shrinking widths, the new gaps
    converging to ``c`` as the grid runs to its last point ``t0``).
    """
    tips: list[GapTip] = []

    def add(c, k, source, members=()):
        t0 = trace.params[k]
        for tp in tips:
            if tp.t0 == t0 and abs(float(tp.c) - float(c)) < isolation_delta:
                return
        widths = tuple((tr.samples[0][1], tr.samples[0][2].width) for tr in members)
        tips.append(GapTip(float(c), t0, _isolated(c, trace.spectra[k], isolation_delta), source, widths))

    for tr in tracks:
        if tr.status == "closed":
            add(tr.tip[1], tr.tip_index, "closed-track")

    births = {}
    last = len(trace) - 1
    for tr in tracks:
        # persistent gaps opened at interior grid points
        if tr.first > 0 and tr.last == last and tr.status != "closed":
            births.setdefault(tr.first, []).append(tr)
    run: list[GapTrack] = []
    for k in range(1, len(trace)):
        cand = births.get(k, [])
        nxt = min(cand, key=lambda tr: tr.samples[0][2].width) if cand else None
        if nxt is not None and (not run or nxt.samples[0][2].width < run[-1].samples[0][2].width):
            run.append(nxt)
            continue
        _flush_births(run, trace, add)
        run = [nxt] if nxt is not None else []
    _flush_births(run, trace, add)
    return tips


def _flush_births(run, trace, add):
    if len(run) < 3:
        return
    tail = run[-4:]
    c = _lsq_intercept([tr.samples[0][2].width for tr in tail], [tr.samples[0][2].center for tr in tail])
    # the new gaps must close in on c
    dist = [abs(tr.samples[0][2].center - c) for tr in run]
    if not all(y < x for x, y in zip(dist, dist[1:])):
        return
    add(c, len(trace) - 1, "birth-accumulation", run)


# ---------------------------------------------------------------------------
# edge continuity (G1-G3)
# ---------------------------------------------------------------------------


def check_edge_continuity(trace: SpectrumTrace, eps: float, modulus=None, tracks=None) -> dict:
    """Sampled checks of the edge-continuity conditions.

    G1: adjacent jumps of min and max stay below ``modulus(d)`` (default ``eps``).
    G2: each gap wider than ``2 eps`` has a gap in each neighbouring spectrum
    with both edges within ``eps``.  G3: a track that ends before the grid does
    extrapolates (linearly) to a gap of the next spectrum or to a detected tip.
    """
    ts = trace.params
    S = trace.spectra
    out = {"G1": [], "G2": [], "G3": []}
    for k in range(len(S) - 1):
        d = _safe_exp(trace.space.log_distance(ts[k], ts[k + 1]))
        bound = modulus(d) if modulus else eps
        for name, x, y in (("min", S[k].intervals[0][0], S[k + 1].intervals[0][0]), ("max", S[k].intervals[-1][1], S[k + 1].intervals[-1][1])):
            if abs(x - y) > bound:
                out["G1"].append({"t": fmt_param(ts[k]), "t_next": fmt_param(ts[k + 1]), "edge": name, "jump": float(abs(x - y))})
    for k in range(len(S)):
        for g in gaps(S[k]):
            if not g.width > 2 * eps:
                continue
            for nb in (k - 1, k + 1):
                if not 0 <= nb < len(S):
                    continue
                if not any(abs(h.a - g.a) < eps and abs(h.b - g.b) < eps for h in gaps(S[nb])):
                    out["G2"].append({"t": fmt_param(ts[k]), "neighbour": fmt_param(ts[nb]), "gap": [float(g.a), float(g.b)]})
    if tracks is None:
        tracks = track_gaps(trace)
    for tr in tracks:
        if tr.status == "closed" or len(tr.samples) < 2:
            continue
        for seq, k_lim in ((tr.samples, tr.last + 1), (list(reversed(tr.samples)), tr.first - 1)):
            if not 0 <= k_lim < len(S):
                continue
            (k1, _, g1), (k2, _, g2) = seq[-2], seq[-1]
            x1, x2, x3 = _coord(trace, k1), _coord(trace, k2), _coord(trace, k_lim)
            s = (x3 - x2) / (x2 - x1)
            a = float(g2.a) + s * (float(g2.a) - float(g1.a))
            b = float(g2.b) + s * (float(g2.b) - float(g1.b))
            if b - a <= eps:
                continue  # converging pair without a registered tip: not conclusive at this resolution
            if not any(abs(float(h.a) - a) < eps and abs(float(h.b) - b) < eps for h in gaps(S[k_lim])):
                out["G3"].append({"t_limit": fmt_param(ts[k_lim]), "extrapolated_gap": [a, b]})
    out["passed"] = {key: not out[key] for key in ("G1", "G2", "G3")}
    return out


def _coord(trace: SpectrumTrace, k: int) -> float:
    t = trace.params[k]
    if trace.space.metric == "euclidean":
        return float(t)
    return float(k)


# ---------------------------------------------------------------------------
# bound verification
# ---------------------------------------------------------------------------


def _check(value, log_bound: float) -> tuple[bool, float]:
    """``value <= exp(log_bound) (1 + slack)`` and the log-margin ``log bound - log value``."""
    if value == 0:
        return True, INF
    lv = log_abs(value)
    margin = log_bound - lv
    return margin >= -LOG_SLACK, margin


def width_exponent(track: GapTrack, trace: SpectrumTrace, t0) -> HolderEstimate:
    """Power law of the width of a track against ``d(t, t0)``."""
    ld, lw = [], []
    for _, t, g in track.samples:
        if t == t0:
            continue
        ld.append(trace.space.log_distance(t, t0))
        lw.append(log_abs(g.width))
    return fit_loglog(ld, lw)


def verify_bounds(trace: SpectrumTrace, tracks: list[GapTrack], consts: Constants, tips: list[GapTip] | None = None) -> dict:
    """Check the four Hoelder bounds pairwise over the trace.

    (i)   ``d_H <= sqrt(C_M) d^(alpha/2)`` for every pair,
    (ii)  ``|d min|, |d max| <= C_(1+m) d^alpha`` for every pair,
    (iii) on open tracks, adjacent edge increments ``<= 3 C_M / width d^alpha``,
          applied where both edges stay within ``width / 6`` (the local regime),
    (iv)  on tracks closing at an isolated tip, ``width <= 2 sqrt(C_M) d(t, t*)^(alpha/2)``.
    """
    alpha = consts.alpha
    lcM, lc1 = consts.log_cM, consts.log_c1m
    ts = trace.params
    S = trace.spectra
    pairs = _pairs(len(trace))
    logd = _pair_logd(trace, pairs)
    report: dict = {"constants": consts.to_dict(), "checks": {}, "violations": []}

    def record(name, ok, margin, where):
        chk = report["checks"].setdefault(name, {"n_checked": 0, "n_violations": 0, "min_log_margin": INF})
        chk["n_checked"] += 1
        chk["min_log_margin"] = min(chk["min_log_margin"], margin)
        if not ok:
            chk["n_violations"] += 1
            report["violations"].append({"check": name, **where, "log_margin": margin})

    def term(logc, scale, ld):
        # log(c * d^scale), with 0 * log 0 treated as 0
        if alpha == INF:
            return -INF if ld < 0 else logc
        return logc + scale * alpha * ld

    for (i, j), ld in zip(pairs, logd):
        where = {"s": fmt_param(ts[i]), "t": fmt_param(ts[j])}
        ok, mg = _check(hausdorff(S[i], S[j]), 0.5 * lcM + (term(0.0, 0.5, ld)))
        record("i_hausdorff", ok, mg, where)
        for name, x, y in (("min", S[i].intervals[0][0], S[j].intervals[0][0]), ("max", S[i].intervals[-1][1], S[j].intervals[-1][1])):
            ok, mg = _check(abs(x - y), term(lc1, 1.0, ld))
            record("ii_extreme_edges", ok, mg, {**where, "edge": name})

    tip_iso = {}
    for tp in tips or []:
        tip_iso[(tp.t0, round(float(tp.c), 9))] = tp.isolated

    exponents = []
    for n_tr, tr in enumerate(tracks):
        if tr.status != "closed":
            for (k1, t1, g1), (k2, t2, g2) in zip(tr.samples, tr.samples[1:]):
                r = g1.width / 6
                if not (abs(g2.a - g1.a) < r and abs(g2.b - g1.b) < r):
                    continue
                ld = trace.space.log_distance(t1, t2)
                lb = math.log(3) + lcM - log_abs(g1.width) + (alpha * ld if alpha != INF else -INF)
                for name, x, y in (("a", g1.a, g2.a), ("b", g1.b, g2.b)):
                    ok, mg = _check(abs(x - y), lb)
                    record("iii_open_gap_edges", ok, mg, {"track": n_tr, "s": fmt_param(t1), "t": fmt_param(t2), "edge": name})
            continue
        t_star, c = tr.tip
        isolated = tip_iso.get((t_star, round(float(c), 9)))
        if isolated is None:
            isolated = _isolated(c, S[tr.tip_index], default_width_tol(trace) or NOISE_FLOOR)
        try:
            est = width_exponent(tr, trace, t_star)
            exponents.append({"track": n_tr, "t_star": fmt_param(t_star), "c": float(c), "isolated": isolated, **est.to_dict()})
        except InsufficientData:
            pass
        if not isolated:
            continue
        for _, t, g in tr.samples:
            ld = trace.space.log_distance(t, t_star)
            ok, mg = _check(g.width, math.log(2) + 0.5 * lcM + term(0.0, 0.5, ld))
            record("iv_closing_width", ok, mg, {"track": n_tr, "t": fmt_param(t), "t_star": fmt_param(t_star)})

    # births accumulating at a non-isolated tip: the bound need not hold, report the law
    for tp in tips or []:
        if tp.source != "birth-accumulation":
            continue
        born = list(tp.births)
        try:
            est = fit_loglog([trace.space.log_distance(t, tp.t0) for t, _ in born if t != tp.t0], [log_abs(w) for t, w in born if t != tp.t0])
            exponents.append({"tip_c": tp.c, "t_star": fmt_param(tp.t0), "isolated": tp.isolated, "source": tp.source, **est.to_dict()})
        except InsufficientData:
            pass

    for chk in report["checks"].values():
        chk["min_log_margin"] = _jnum(chk["min_log_margin"])
    for v in report["violations"]:
        v["log_margin"] = _jnum(v["log_margin"])
    report["closing_exponents"] = exponents
    report["n_violations"] = len(report["violations"])
    return report


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(f"not serializable: {type(x).__name__}")


def report_text(report: dict) -> str:
    """Aligned-column summary of a :func:`verify_bounds` report."""
    rows = [("check", "checked", "violations", "min log margin")]
    for name in sorted(report.get("checks", {})):
        c = report["checks"][name]
        rows.append((name, str(c["n_checked"]), str(c["n_violations"]), str(c["min_log_margin"])))
    widths = [max(len(r[k]) for r in rows) for k in range(4)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    exps = report.get("closing_exponents", [])
    alphas = [e["alpha"] for e in exps if isinstance(e["alpha"], float)]
    if alphas:
        lines.append(f"closing-width exponents: {len(alphas)} fits, range [{min(alphas):.4g}, {max(alphas):.4g}]")
    for e in exps:
        if e.get("source") == "birth-accumulation":
            lines.append(f"birth accumulation at c={e['tip_c']!r}, t*={e['t_star']}: width exponent {e['alpha']!r}")
    return "\n".join(lines) + "\n"
