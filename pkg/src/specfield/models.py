"""Built-in operator fields and set-valued families over sampled parameter spaces."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

import mpmath

from .hyperspace import CompactSet
from .operators import PeriodicJacobi, SymTridiag, eigenvalues, op_norm, spectrum

log = logging.getLogger(__name__)

INF = math.inf


# ---------------------------------------------------------------------------
# rationals and continued fractions
# ---------------------------------------------------------------------------


def as_fraction(t) -> Fraction:
    """Parse a rational parameter: Fraction, int, ``"p/q"`` or ``(p, q)``.

    A non-reduced pair is reduced and the reduction is logged.
    """
    if isinstance(t, Fraction):
        return t
    if isinstance(t, bool):
        raise TypeError("boolean is not a parameter")
    if isinstance(t, int):
        return Fraction(t)
    if isinstance(t, tuple):
        p, q = t
        if q == 0:
            raise ValueError("t has denominator q = 0")
        g = math.gcd(p, q)
        if g != 1:
            log.warning("t = %d/%d is not reduced; using %d/%d", p, q, p // g, q // g)
        return Fraction(p, q)
    if isinstance(t, str):
        s = t.strip()
        if "/" in s:
            p, q = (int(x) for x in s.split("/"))
            return as_fraction((p, q))
        return Fraction(s)
    if isinstance(t, float):
        raise TypeError("pass rational parameters exactly (Fraction or 'p/q'), not float")
    raise TypeError(f"cannot read {t!r} as a rational parameter")


def continued_fraction(x, depth: int) -> list[int]:
    """First ``depth`` partial quotients of ``x`` (mpmath number, Fraction or float)."""
    if isinstance(x, Fraction):
        out = []
        for _ in range(depth):
            a = math.floor(x)
            out.append(a)
            x -= a
            if x == 0:
                break
            x = 1 / x
        return out
    with mpmath.workdps(60 + 2 * depth):
        y = mpmath.mpf(x)
        out = []
        for _ in range(depth):
            a = int(mpmath.floor(y))
            out.append(a)
            y -= a
            if y == 0:
                break
            y = 1 / y
        return out


def convergents(cf: Iterable[int]) -> list[Fraction]:
    """Convergents ``p_k / q_k`` of a continued fraction."""
    out = []
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    for a in cf:
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        out.append(Fraction(h1, k1))
    return out


def golden_mean_convergents(depth: int) -> list[Fraction]:
    """Convergents of ``(sqrt 5 - 1) / 2`` (ratios of Fibonacci numbers)."""
    return convergents([0] + [1] * depth)


def silver_convergents(depth: int) -> list[Fraction]:
    """Convergents of ``sqrt 2 - 1``."""
    return convergents([0] + [2] * depth)


def farey(lo, hi, qmax: int) -> list[Fraction]:
    """All reduced fractions in ``[lo, hi]`` with denominator at most ``qmax``, ascending."""
    lo, hi = as_fraction(lo), as_fraction(hi)
    pts = set()
    for q in range(1, qmax + 1):
        for p in range(math.ceil(lo * q), math.floor(hi * q) + 1):
            pts.add(Fraction(p, q))
    return sorted(pts)


def mpf_to_fraction(x) -> Fraction:
    """Exact value of a binary mpmath number."""
    man, exp = mpmath.mpf(x).man_exp
    man = int(man)
    return Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2 ** (-exp))


# ---------------------------------------------------------------------------
# parameter spaces and fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParameterSpace:
    """Ordered sample of a metric parameter space.

    ``metric="euclidean"``: ``d(s, t) = |s - t|`` on rationals (exact Fractions).
    ``metric="ultrametric"``: points in ``N ∪ {inf}`` with
    ``d(n, m) = exp(-kappa ** min(n, m))`` for ``n != m`` and ``d(n, inf) = exp(-kappa ** n)``.
    """

    points: tuple
    metric: str = "euclidean"
    kappa: float | None = None

    def __post_init__(self):
        if self.metric == "euclidean":
            pts = tuple(as_fraction(p) for p in self.points)
        elif self.metric == "ultrametric":
            if self.kappa is None or not self.kappa > 1:
                raise ValueError("ultrametric needs kappa > 1")
            pts = tuple(INF if p == INF or p == "inf" else int(p) for p in self.points)
            if any(p != INF and p < 0 for p in pts):
                raise ValueError("ultrametric points must be natural numbers or inf")
        else:
            raise ValueError(f"unknown metric {self.metric!r}")
        if len(set(pts)) != len(pts):
            raise ValueError("grid points must be distinct")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def log_distance(self, s, t) -> float:
        """``log d(s, t)``; ``-inf`` on the diagonal."""
        if s == t:
            return -INF
        if self.metric == "euclidean":
            d = abs(Fraction(s) - Fraction(t))
            return math.log(d.numerator) - math.log(d.denominator)
        return -(float(self.kappa) ** min(s, t))

    def distance(self, s, t):
        """Exact distance: a Fraction (ultrametric values rounded at 80 digits)."""
        if s == t:
            return Fraction(0)
        if self.metric == "euclidean":
            return abs(Fraction(s) - Fraction(t))
        with mpmath.workdps(80):
            return mpf_to_fraction(mpmath.exp(-mpmath.mpf(self.kappa) ** min(s, t)))

    def to_dict(self) -> dict:
        pts = [("inf" if p == INF else p) if self.metric == "ultrametric" else str(p) for p in self.points]
        out = {"metric": self.metric, "points": pts}
        if self.kappa is not None:
            out["kappa"] = self.kappa
        return out


@dataclass(frozen=True)
class OperatorField:
    """``t -> A_t`` (or ``t -> F_t`` for set-valued families, ``kind="set"``)."""

    generator: Callable
    name: str = "field"
    params: dict = field(default_factory=dict)
    kind: str = "operator"

    def __call__(self, t):
        return self.generator(t)

    def spectrum_at(self, t, merge_tol: float | None = None) -> CompactSet:
        x = self.generator(t)
        return x if self.kind == "set" else spectrum(x, merge_tol)


def field_bound(fld: OperatorField, grid: ParameterSpace, merge_tol: float | None = None) -> float:
    """``max_t ||A_t|| + 1`` over the grid, the ``m`` handed to norm probes."""
    if len(grid) == 0:
        raise ValueError("empty grid")
    if fld.kind == "set":
        norms = []
        for t in grid:
            F = fld(t)
            norms.append(float(max(abs(F.intervals[0][0]), abs(F.intervals[-1][1]))))
    else:
        norms = [op_norm(fld(t)) for t in grid]
    return max(norms) + 1.0


# ---------------------------------------------------------------------------
# quasiperiodic models
# ---------------------------------------------------------------------------


def _am_potential(mu: float, theta: float, t: Fraction) -> tuple:
    p, q = t.numerator, t.denominator
    return tuple(2.0 * mu * math.cos(2.0 * math.pi * (((n * p) % q) / q + theta)) for n in range(q))


def almost_mathieu(mu: float, theta: float | None, t) -> PeriodicJacobi:
    """Almost Mathieu operator ``psi(n+1) + psi(n-1) + 2 mu cos(2 pi (n t + theta)) psi(n)`` at rational t.

    With a numeric ``theta`` this is the single periodic operator.  With
    ``theta=None`` it is the phase hull: the union over all theta of the
    spectra.  Because the discriminant depends on theta only through the
    additive term ``-2 mu^q cos(2 pi q theta)`` (up to sign), that union is
    ``{|D(E)| <= 2 + 2 mu^q}`` with ``D`` the discriminant at ``theta = 1/(4q)``,
    and it is returned in exactly that form.
    """
    if not mu >= 0:
        raise ValueError("mu must be non-negative")
    t = as_fraction(t)
    q = t.denominator
    if theta is None:
        return PeriodicJacobi(_am_potential(mu, 1.0 / (4 * q), t), level=2.0 + 2.0 * mu**q)
    return PeriodicJacobi(_am_potential(mu, float(theta), t))


def _kohmoto_values(lam: float, theta, t: Fraction, ns: Iterable[int], closed_right: bool = False):
    p, q = t.numerator, t.denominator
    th = Fraction(theta)
    out = []
    for n in ns:
        x = Fraction((n * p) % q, q) + th
        x -= math.floor(x)
        inside = (0 < x <= t) if closed_right else (0 <= x < t)
        out.append(float(lam) if inside else 0.0)
    return out


def kohmoto(lam: float, theta: float, t) -> PeriodicJacobi:
    """Kohmoto operator with potential ``lam * chi_[0,t)(frac(n t + theta))`` at rational t."""
    t = as_fraction(t)
    return PeriodicJacobi(tuple(_kohmoto_values(lam, theta, t, range(t.denominator))))


def kohmoto_interface(lam: float, theta: float, t, cells: int = 40) -> SymTridiag:
    """Open-boundary truncation of the Kohmoto hull element joining the two half-open conventions.

    Sites ``n < 0`` use ``chi_(0,t]``, sites ``n >= 0`` use ``chi_[0,t)``.  Both
    sides are q-periodic, so away from the junction the operator looks like
    the periodic one; states bound to the junction are the isolated points
    the hull spectrum acquires inside gaps at rational t.
    """
    t = as_fraction(t)
    q = t.denominator
    left = _kohmoto_values(lam, theta, t, range(-cells * q, 0), closed_right=True)
    right = _kohmoto_values(lam, theta, t, range(0, cells * q))
    v = left + right
    return SymTridiag(tuple(v), (1.0,) * (len(v) - 1))


def kohmoto_defect_levels(lam: float, theta: float, t, cells: int = 40, tol: float = 1e-6) -> list[float]:
    """Junction-bound levels lying in gaps of the periodic Kohmoto bands.

    Eigenvalues of the interface truncation inside a band gap are either
    junction states or states at the two open ends; end states are removed by
    comparing with the pure truncations of each convention.
    """
    t = as_fraction(t)
    q = t.denominator
    bands = spectrum(kohmoto(lam, theta, t))
    inter = eigenvalues(kohmoto_interface(lam, theta, t, cells))

    def pure(closed_right):
        v = _kohmoto_values(lam, theta, t, range(-cells * q, cells * q), closed_right)
        return eigenvalues(SymTridiag(tuple(v), (1.0,) * (len(v) - 1)))

    ends = list(pure(False)) + list(pure(True))
    out = []
    for e in inter:
        if float(e) in bands or any(abs(float(e) - lo) < tol or abs(float(e) - hi) < tol for lo, hi in bands.intervals):
            continue
        if any(abs(e - x) < tol for x in ends):
            continue
        out.append(float(e))
    return out


# ---------------------------------------------------------------------------
# substitution potentials
# ---------------------------------------------------------------------------

SUBSTITUTIONS = {
    "fibonacci": {"a": "ab", "b": "a"},
    "thue_morse": {"a": "ab", "b": "ba"},
    "period_doubling": {"a": "ab", "b": "aa"},
}


def substitution_word(word: str, level: int) -> str:
    """``sigma^(level-1)(a)``."""
    if word not in SUBSTITUTIONS:
        raise ValueError(f"unknown substitution {word!r}; choose from {sorted(SUBSTITUTIONS)}")
    if level < 1:
        raise ValueError("level must be >= 1")
    rule = SUBSTITUTIONS[word]
    w = "a"
    for _ in range(level - 1):
        w = "".join(rule[c] for c in w)
    return w


def substitution_field(lam: float, word: str, level: int) -> PeriodicJacobi:
    """Periodic operator whose potential repeats the level-th word, ``a -> lam``, ``b -> 0``."""
    w = substitution_word(word, level)
    return PeriodicJacobi(tuple(float(lam) if c == "a" else 0.0 for c in w))


# ---------------------------------------------------------------------------
# slow-closing family on N ∪ {inf}
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CounterexampleConfig:
    c: float = 2.0
    m: float = 3.0
    kappa: float = 2.0
    alpha: float = 1.0
    C: float = 1.0
    N: int = 12

    def __post_init__(self):
        if not self.m > self.c > 0:
            raise ValueError("need m > c > 0")
        if not self.kappa > 1:
            raise ValueError("kappa must exceed 1")
        if not (self.alpha > 0 and self.C > 0):
            raise ValueError("alpha and C must be positive")
        if self.N < 1:
            raise ValueError("N must be >= 1")

    def widths(self) -> list[Fraction]:
        """``w_n = C exp(-(alpha/2) kappa^(n-1))``, n = 1..N, as Fractions."""
        with mpmath.workdps(80):
            C = mpmath.mpf(self.C)
            return [
                mpf_to_fraction(C * mpmath.exp(-mpmath.mpf(self.alpha) / 2 * mpmath.mpf(self.kappa) ** (n - 1)))
                for n in range(1, self.N + 1)
            ]

    def space(self) -> ParameterSpace:
        return ParameterSpace(tuple(range(self.N + 1)) + (INF,), "ultrametric", self.kappa)


def counterexample_gaps(cfg: CounterexampleConfig) -> list[tuple[Fraction, Fraction]]:
    """Gaps ``(a_n, b_n)``, n = 1..N, ascending towards c.

    Centers sit at ``c - 2 w_n``; where that would collide with the next gap
    the gap is pushed down so that ``b_n = a_(n+1) - w_(n+1) / 2``.
    """
    c = Fraction(cfg.c)
    w = cfg.widths()
    out: list = [None] * cfg.N
    for n in range(cfg.N - 1, -1, -1):
        a, b = c - Fraction(5, 2) * w[n], c - Fraction(3, 2) * w[n]
        if n + 1 < cfg.N:
            nxt_a = out[n + 1][0]
            if not b < nxt_a:
                b = nxt_a - w[n + 1] / 2
                a = b - w[n]
        out[n] = (a, b)
    for n, (a, b) in enumerate(out, start=1):
        if not (0 < a < b < c):
            raise ValueError(f"infeasible counterexample config: gap n={n} is ({float(a)}, {float(b)})")
    return out


def counterexample_family(cfg: CounterexampleConfig) -> dict:
    """``{n: F_n}`` for n = 0..N and ``inf``; ``F_0 = [0, m]``, ``F_(n+1) = F_n minus (a_(n+1), b_(n+1))``.

    ``F_inf`` is the set with all N gaps removed (it coincides with ``F_N``).
    All endpoints are exact Fractions.
    """
    gp = counterexample_gaps(cfg)
    zero, c, m = Fraction(0), Fraction(cfg.c), Fraction(cfg.m)
    out = {}
    for n in range(cfg.N + 1):
        cuts = gp[:n]
        ivs = []
        lo = zero
        for a, b in cuts:
            ivs.append((lo, a))
            lo = b
        ivs.append((lo, m))
        out[n] = CompactSet(tuple(ivs))
    out[INF] = out[cfg.N]
    assert all(c in F for F in out.values())
    return out


def counterexample_field(cfg: CounterexampleConfig) -> OperatorField:
    fam = counterexample_family(cfg)
    return OperatorField(fam.__getitem__, name="counterexample", params=_cfg_dict(cfg), kind="set")


def _cfg_dict(cfg: CounterexampleConfig) -> dict:
    return {k: getattr(cfg, k) for k in ("c", "m", "kappa", "alpha", "C", "N")}
