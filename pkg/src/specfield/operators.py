"""Finite self-adjoint operators, their spectra, and the norm probes.

Three representations are supported:

* :class:`DenseHermitian`  -- an n x n complex Hermitian matrix,
* :class:`SymTridiag`      -- a real symmetric tridiagonal matrix,
* :class:`PeriodicJacobi`  -- the discrete Schroedinger operator on l^2(Z)
  with unit hopping and a q-periodic potential.  Its spectrum is the band set
  ``{E : |Delta(E)| <= level}`` where ``Delta`` is the discriminant (trace of the
  one-period transfer matrix).  ``level = 2`` is the operator itself; a larger
  level describes the union over a phase family (see
  :func:`specfield.models.almost_mathieu`).

Spectra are never obtained from a library eigensolver: dense matrices are
reduced to tridiagonal form by Householder reflections and all eigenvalues are
found by Sturm-sequence bisection.  Norms of polynomials and resolvents are
read off the spectrum.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .hyperspace import CompactSet, dist_point, from_points, max_abs, poly_image

# absolute convergence threshold for eigenvalues and band edges
BISECTION_TOL = 1e-12
# gaps whose discriminant overshoot is below this fraction of the level are
# tangencies at floating resolution and count as closed
TANGENCY_RTOL = 1e-9


class BandEdgeError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DenseHermitian:
    matrix: np.ndarray

    def __post_init__(self):
        a = np.array(self.matrix, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        scale = max(1.0, float(np.abs(a).max(initial=0.0)))
        if np.abs(a - a.conj().T).max(initial=0.0) > 1e-12 * scale:
            raise ValueError("matrix is not Hermitian")
        a = (a + a.conj().T) / 2
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def __eq__(self, other):
        return isinstance(other, DenseHermitian) and np.array_equal(self.matrix, other.matrix)


@dataclass(frozen=True)
class SymTridiag:
    diag: tuple
    off: tuple = ()

    def __post_init__(self):
        d = tuple(float(x) for x in self.diag)
        e = tuple(self.off)
        if any(isinstance(x, complex) for x in e):
            raise ValueError("off-diagonal entries must be real")
        e = tuple(float(x) for x in e)
        if len(d) == 0:
            raise ValueError("empty matrix")
        if len(e) != len(d) - 1:
            raise ValueError("need n-1 off-diagonal entries")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "off", e)

    @property
    def n(self) -> int:
        return len(self.diag)

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)


@dataclass(frozen=True)
class PeriodicJacobi:
    potential: tuple
    level: float = 2.0

    def __post_init__(self):
        v = tuple(float(x) for x in self.potential)
        if len(v) < 1:
            raise ValueError("period q must be >= 1")
        if not self.level >= 2.0:
            raise ValueError("discriminant level must be >= 2")
        object.__setattr__(self, "potential", v)
        object.__setattr__(self, "level", float(self.level))

    @property
    def q(self) -> int:
        return len(self.potential)


Operator = Union[DenseHermitian, SymTridiag, PeriodicJacobi]


@dataclass(frozen=True)
class Poly2:
    """``p(z) = p0 + p1 z + p2 z^2`` with real coefficients."""

    p0: float = 0
    p1: float = 0
    p2: float = 0

    def __call__(self, z):
        return self.p0 + (self.p1 + self.p2 * z) * z

    @property
    def norm1(self):
        return abs(self.p0) + abs(self.p1) + abs(self.p2)

    @property
    def critical_point(self):
        return None if self.p2 == 0 else -self.p1 / (2 * self.p2)

    def as_tuple(self) -> tuple:
        return (self.p0, self.p1, self.p2)


@dataclass(frozen=True)
class UnitaryDiag:
    """``diag(exp(i phi_k))`` with phases reduced to [0, 2 pi)."""

    phases: tuple = field(default=())

    def __post_init__(self):
        ph = tuple(math.fmod(float(x), 2 * math.pi) for x in self.phases)
        ph = tuple(x + 2 * math.pi if x < 0 else x for x in ph)
        ph = tuple(0.0 if x >= 2 * math.pi else x for x in ph)
        object.__setattr__(self, "phases", ph)


# ---------------------------------------------------------------------------
# tridiagonal kernels
# ---------------------------------------------------------------------------


def householder_tridiagonal(matrix) -> tuple[np.ndarray, np.ndarray]:
    """Reduce a Hermitian matrix to a real symmetric tridiagonal with the same spectrum.

    Returns ``(diag, off)``.  The complex subdiagonal produced by the
    reflections is replaced by its modulus, a diagonal unitary similarity.
    """
    a = np.array(matrix, dtype=complex)
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1 :, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        vn = np.linalg.norm(v)
        if vn == 0.0:
            continue
        v /= vn
        # a <- P a P with P = I - 2 v v^*, acting on rows/cols k+1..n-1
        a[k + 1 :, :] -= 2.0 * np.outer(v, v.conj() @ a[k + 1 :, :])
        a[:, k + 1 :] -= 2.0 * np.outer(a[:, k + 1 :] @ v, v.conj())
    diag = a.diagonal().real.copy()
    off = np.abs(a.diagonal(1)).copy()
    return diag, off


def _pivmin(off: np.ndarray) -> float:
    big = float(np.max(off * off)) if len(off) else 0.0
    return np.finfo(float).tiny * max(1.0, big)


def _sturm_counts(diag: np.ndarray, off: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Number of eigenvalues strictly below each entry of ``E``."""
    E = np.asarray(E, dtype=float)
    e2 = np.asarray(off, dtype=float) ** 2
    pivmin = _pivmin(np.asarray(off, dtype=float))
    q = diag[0] - E
    q = np.where(np.abs(q) < pivmin, pivmin, q)
    count = (q < 0).astype(int)
    for i in range(1, len(diag)):
        q = diag[i] - E - e2[i - 1] / q
        # a vanishing pivot means E is an eigenvalue of the leading block;
        # the positive replacement keeps the count strict
        q = np.where(np.abs(q) < pivmin, pivmin, q)
        count += q < 0
    return count


def sturm_count(A: SymTridiag, E: float) -> int:
    """Eigenvalues of ``A`` strictly below ``E`` (sign changes of the Sturm sequence)."""
    d = np.asarray(A.diag, dtype=float)
    e = np.asarray(A.off, dtype=float)
    return int(_sturm_counts(d, e, np.array([E], dtype=float))[0])


def tridiagonal_eigenvalues(diag, off) -> np.ndarray:
    """All eigenvalues of a real symmetric tridiagonal matrix, ascending, by bisection."""
    d = np.asarray(diag, dtype=float)
    e = np.asarray(off, dtype=float)
    n = len(d)
    r = np.zeros(n)
    r[:-1] += np.abs(e)
    r[1:] += np.abs(e)
    lo_b = float(np.min(d - r))
    hi_b = float(np.max(d + r))
    pad = 1e-9 * max(1.0, abs(lo_b), abs(hi_b)) + 1e-12
    lo = np.full(n, lo_b - pad)
    hi = np.full(n, hi_b + pad)
    k = np.arange(n)
    scale = max(1.0, abs(lo_b), abs(hi_b))
    tol = max(BISECTION_TOL, 8 * np.finfo(float).eps * scale)
    while True:
        width = hi - lo
        if width.max() <= tol:
            break
        mid = 0.5 * (lo + hi)
        stuck = (mid <= lo) | (mid >= hi)
        if stuck.all():
            break
        c = _sturm_counts(d, e, mid)
        below = c <= k
        lo = np.where(below & ~stuck, mid, lo)
        hi = np.where(~below & ~stuck, mid, hi)
    return 0.5 * (lo + hi)


def eigenvalues(A: Operator) -> np.ndarray:
    """Eigenvalues of a matrix operator, ascending."""
    if isinstance(A, SymTridiag):
        return tridiagonal_eigenvalues(A.diag, A.off)
    if isinstance(A, DenseHermitian):
        if A.n == 1:
            return np.array([A.matrix[0, 0].real])
        d, e = householder_tridiagonal(A.matrix)
        return tridiagonal_eigenvalues(d, e)
    raise TypeError("periodic operators have band spectra, use band_edges")


# ---------------------------------------------------------------------------
# periodic Jacobi operators
# ---------------------------------------------------------------------------


def _transfer_trace(V, E: np.ndarray, derivative: bool = False):
    """Discriminant (and its E-derivative) at each energy, with running rescaling."""
    E = np.asarray(E, dtype=float)
    # product matrix [[a, b], [c, d]] and its derivative
    a = np.ones_like(E)
    b = np.zeros_like(E)
    c = np.zeros_like(E)
    d = np.ones_like(E)
    da = np.zeros_like(E)
    db = np.zeros_like(E)
    dc = np.zeros_like(E)
    dd = np.zeros_like(E)
    logscale = np.zeros_like(E)
    for v in V:
        x = E - v
        # [[x, -1], [1, 0]] @ [[a, b], [c, d]]
        na, nb, nc, nd = x * a - c, x * b - d, a, b
        if derivative:
            da, db, dc, dd = a + x * da - dc, b + x * db - dd, da, db
        a, b, c, d = na, nb, nc, nd
        s = np.maximum(np.maximum(np.abs(a), np.abs(b)), np.maximum(np.abs(c), np.abs(d)))
        big = s > 1e100
        if big.any():
            f = np.where(big, s, 1.0)
            a, b, c, d = a / f, b / f, c / f, d / f
            if derivative:
                da, db, dc, dd = da / f, db / f, dc / f, dd / f
            logscale += np.log(f)
    with np.errstate(over="ignore", invalid="ignore"):
        tr = (a + d) * np.exp(logscale)
        if derivative:
            return tr, (da + dd) * np.exp(logscale)
    return tr


def discriminant(A: PeriodicJacobi, E):
    """``Delta(E)`` = trace of the ordered product of ``[[E - V(j), -1], [1, 0]]``."""
    scalar = np.isscalar(E)
    out = _transfer_trace(A.potential, np.atleast_1d(np.asarray(E, dtype=float)))
    return float(out[0]) if scalar else out


def bloch_matrix(A: PeriodicJacobi, k: float) -> np.ndarray:
    """q x q matrix of the operator on Bloch vectors ``psi(n + q) = e^{ik} psi(n)``."""
    q = A.q
    if q == 1:
        return np.array([[A.potential[0] + 2 * math.cos(k)]], dtype=complex)
    h = np.diag(np.array(A.potential, dtype=complex))
    for i in range(q - 1):
        h[i, i + 1] = h[i + 1, i] = 1.0
    h[0, q - 1] += cmath.exp(-1j * k)
    h[q - 1, 0] += cmath.exp(1j * k)
    return h


def _bisect(f, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Vectorised bisection; ``f(lo) < 0 <= f(hi)`` is assumed for each entry."""
    lo = lo.copy()
    hi = hi.copy()
    scale = max(1.0, float(np.max(np.abs(np.concatenate([lo, hi])))))
    tol = max(BISECTION_TOL, 8 * np.finfo(float).eps * scale)
    for _ in range(200):
        if (np.abs(hi - lo) <= tol).all():
            break
        mid = 0.5 * (lo + hi)
        neg = f(mid) < 0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    return 0.5 * (lo + hi)


def discriminant_zeros(A: PeriodicJacobi) -> np.ndarray:
    """Zeros of the discriminant, ascending: the Bloch eigenvalues at quasi-momentum pi/2."""
    return np.sort(eigenvalues(DenseHermitian(bloch_matrix(A, math.pi / 2))))


def _log_abs_disc(zeros: np.ndarray, E: np.ndarray) -> np.ndarray:
    # Delta is monic of degree q, so Delta(E) = prod (E - z_i)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(E[:, None] - zeros[None, :])).sum(axis=1)


def _log_derivative(zeros: np.ndarray, E: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return (1.0 / (E[:, None] - zeros[None, :])).sum(axis=1)


def band_list(A: PeriodicJacobi) -> list[tuple[float, float]]:
    """The q bands ``[lo, hi]`` of a periodic operator in increasing order (may touch).

    The discriminant is handled in factored form ``prod (E - z_i)``: each band
    holds exactly one zero ``z_i``, each pair of consecutive zeros brackets one
    critical point (the root of the decreasing function ``sum 1/(E - z_i)``), and
    ``log|Delta|`` is monotone between a zero and a critical point.  Everything
    is bisection on monotone functions, so the band count is exactly q and the
    accuracy is that of the zeros, even for bands far narrower than machine
    resolution (their two edges then coincide).
    """
    q = A.q
    logL = math.log(A.level)
    z = discriminant_zeros(A)

    def excess(E):
        return _log_abs_disc(z, E) - logL

    if q > 1:
        zl, zr = z[:-1], z[1:]
        same = zr <= zl
        crit = _bisect(lambda E: -_log_derivative(z, E), zl, np.where(same, zl + 1.0, zr))
        crit = np.where(same, zl, np.clip(crit, zl, zr))
        peak = np.where(same, -np.inf, excess(crit))
        closed = peak <= TANGENCY_RTOL
    else:
        crit = np.array([])
        closed = np.array([], dtype=bool)

    reach = A.level + 1.0
    left_br = np.concatenate([[z[0] - reach], crit])
    right_br = np.concatenate([crit, [z[-1] + reach]])
    lo_open = np.concatenate([[True], ~closed])
    hi_open = np.concatenate([~closed, [True]])
    lows = _bisect(lambda E: -excess(E), left_br, z)
    highs = _bisect(excess, z, right_br)
    lows = np.where(lo_open, np.minimum(lows, z), left_br)
    highs = np.where(hi_open, np.maximum(highs, z), right_br)
    if not (np.all(np.isfinite(lows)) and np.all(np.isfinite(highs))):
        good = int(np.sum(np.isfinite(lows) & np.isfinite(highs)))
        raise BandEdgeError(f"bracketed {good} of {q} bands (discriminant level {A.level}, period {q})")
    return [(float(lo), float(hi)) for lo, hi in zip(lows, highs)]


def band_edges(A: PeriodicJacobi) -> CompactSet:
    """Exact band spectrum ``{E : |Delta(E)| <= level}`` as a compact set."""
    return CompactSet.from_intervals(band_list(A))


# ---------------------------------------------------------------------------
# spectra and norms
# ---------------------------------------------------------------------------


def spectrum(A: Operator, merge_tol: float | None = None) -> CompactSet:
    """Spectrum as a compact set.

    Matrix operators give a point cloud grouped with ``merge_tol``; with
    ``merge_tol=None`` only exactly repeated eigenvalues are merged.  Periodic
    operators give their exact band set and ignore ``merge_tol``.
    """
    if isinstance(A, PeriodicJacobi):
        return band_edges(A)
    ev = eigenvalues(A)
    if merge_tol is None:
        return CompactSet.from_intervals((float(x), float(x)) for x in ev)
    return from_points([float(x) for x in ev], merge_tol)


def op_norm(A: Operator) -> float:
    """Operator norm, ``max |lambda|`` over the spectrum."""
    return float(max_abs(spectrum(A)))


def poly_norm(A: Operator, p: Poly2) -> float:
    """``||p(A)||`` read off the spectrum by spectral mapping."""
    return float(max_abs(poly_image(spectrum(A), p)))


def probe_ball(A: Operator, x: float, r: float, m: float) -> bool:
    """Decide whether the open ball ``B_r(x)`` misses the spectrum, using a norm only.

    With ``p(z) = m^2 - (z - x)^2`` and ``m > ||A - x||``, ``m > r > 0``, the ball
    misses the spectrum exactly when ``||p(A)|| <= m^2 - r^2``.
    """
    S = spectrum(A)
    lo, hi = S.intervals[0][0], S.intervals[-1][1]
    shifted_norm = max(abs(lo - x), abs(hi - x))
    if not m > shifted_norm:
        raise ValueError(f"probe needs m > ||A - x|| = {shifted_norm}, got m = {m}")
    if not (m > r > 0):
        raise ValueError(f"probe needs m > r > 0, got m = {m}, r = {r}")
    p = Poly2(m * m - x * x, 2 * x, -1.0)
    return float(max_abs(poly_image(S, p))) <= m * m - r * r


def resolvent_norm(A: Operator, z: complex) -> float:
    """``||(A - z)^{-1}|| = 1 / dist(z, spectrum)``."""
    z = complex(z)
    d = float(dist_point(z.real, spectrum(A)))
    dist = math.hypot(d, z.imag)
    # within eigenvalue precision counts as on the spectrum
    if dist <= 2 * BISECTION_TOL:
        raise ZeroDivisionError("resolvent unbounded: z lies on the spectrum")
    return 1.0 / dist


def upper_edge_from_resolvent(A: Operator, x: float, y: float) -> float:
    """Recover the upper edge ``b`` of the gap containing ``x`` from one resolvent norm.

    Valid when ``x`` sits in the upper half of a gap ``(a, b)``:
    ``||(A - x - iy)^{-1}|| = ((b - x)^2 + y^2)^{-1/2}``.
    """
    if y == 0:
        raise ValueError("need a non-real spectral parameter")
    r = resolvent_norm(A, complex(x, y))
    return x + math.sqrt(max(0.0, 1.0 / (r * r) - y * y))


def probe_unitary_arc(U: UnitaryDiag, theta: float, r: float) -> bool:
    """Decide whether the chordal ball ``B_r(e^{i theta})`` misses ``sigma(U)``.

    Uses only ``||1 + e^{-i theta} U|| <= sqrt(4 - r^2)``.
    """
    if not 0 < r < 2:
        raise ValueError("r must lie in (0, 2)")
    if not U.phases:
        return True
    norm = max(abs(1 + cmath.exp(1j * (phi - theta))) for phi in U.phases)
    return norm <= math.sqrt(4 - r * r)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def operator_to_dict(A) -> dict:
    if isinstance(A, SymTridiag):
        return {"variant": "sym_tridiag", "diag": list(A.diag), "off": list(A.off)}
    if isinstance(A, DenseHermitian):
        return {
            "variant": "dense_hermitian",
            "real": A.matrix.real.tolist(),
            "imag": A.matrix.imag.tolist(),
        }
    if isinstance(A, PeriodicJacobi):
        return {"variant": "periodic_jacobi", "potential": list(A.potential), "level": A.level}
    if isinstance(A, UnitaryDiag):
        return {"variant": "unitary_diag", "phases": list(A.phases)}
    raise TypeError(f"cannot serialize {type(A).__name__}")


def operator_from_dict(data: dict):
    kind = data.get("variant")
    if kind == "sym_tridiag":
        return SymTridiag(tuple(data["diag"]), tuple(data["off"]))
    if kind == "dense_hermitian":
        return DenseHermitian(np.array(data["real"]) + 1j * np.array(data.get("imag", 0.0)))
    if kind == "periodic_jacobi":
        return PeriodicJacobi(tuple(data["potential"]), data.get("level", 2.0))
    if kind == "unitary_diag":
        return UnitaryDiag(tuple(data["phases"]))
    raise ValueError(f"unknown operator variant {kind!r}")
