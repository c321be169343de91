"""Two-dimensional criterion engine.

With ``Lambda0 = (lam, lam)``, ``Y = h'(lam^2)`` and ``f = f_{sqrt2 lam}``::

    G1(Lambda) = f(|Lambda - Lambda0|) + Y (l1 - lam)(l2 - lam)
    G2(Lambda) = lam Y (l1 + l2 - 2 lam)

``G1 >= 0`` on the open positive quadrant once
``C2 / (Y lam^(2-q)) >= e_max(q)``; this module evaluates that condition, finds
the largest load satisfying it, and certifies / refutes it on polar grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import zhang
from .parallel import argmin_reduce, chunk_bounds, ordered_map
from .search import bisect_predicate
from .volumetric import DomainError, Material2D

STATED = "stated"
CORRECTED = "corrected"


class ConditionNotStrict(ValueError):
    pass


class BracketError(ValueError):
    pass


def lemma_factor(q: float, constants: str = STATED) -> float:
    """Multiplier applied to ``C1, C2``.

    ``"stated"`` uses the constants exactly as defined above.  ``"corrected"`` restores the
    ``q(q-1)`` factor of the second-derivative bound when it is below one,
    without which the two-branch inequality fails for ``q < (1 + sqrt 5)/2``.
    """
    if constants == STATED:
        return 1.0
    if constants == CORRECTED:
        return min(1.0, q * (q - 1.0))
    raise ValueError(f"unknown constants mode {constants!r}")


def _consts(lam, q, constants):
    k = lemma_factor(q, constants)
    return k * float(zhang.c1(math.sqrt(2.0) * lam, q)), k * float(zhang.c2(q))


def _check_quadrant(Lam):
    Lam = np.asarray(Lam, dtype=float)
    if np.any(Lam <= 0):
        raise DomainError("singular values must be positive")
    return Lam


def g1(Lam, lam: float, material: Material2D, constants: str = STATED):
    Lam = _check_quadrant(Lam)
    q = material.q
    Y = float(material.law.hprime(lam * lam))
    C1, C2 = _consts(lam, q, constants)
    d = Lam - lam
    rho = np.sqrt(np.sum(d * d, axis=-1))
    f = np.minimum(C1 * rho * rho, C2 * rho**q)
    return f + Y * d[..., 0] * d[..., 1]


def g2(Lam, lam: float, material: Material2D):
    Lam = _check_quadrant(Lam)
    Y = float(material.law.hprime(lam * lam))
    return lam * Y * (Lam[..., 0] + Lam[..., 1] - 2.0 * lam)


def e_mu(mu, q):
    mu = np.asarray(mu, dtype=float)
    return np.cos(mu) * np.abs(np.sin(mu)) ** (q - 1.0)


def e_max(q):
    q = np.asarray(q, dtype=float)
    return (q - 1.0) ** ((q - 1.0) / 2.0) * q ** (-q / 2.0)


def e_argmax(q: float) -> float:
    """Maximizer of ``e`` on ``(-pi/4, 0)``: ``cos^2 mu = 1/q``."""
    return -math.acos(1.0 / math.sqrt(q))


def y_q(q):
    q = np.asarray(q, dtype=float)
    return np.sqrt((q - 1.0) ** (q - 1.0) * q ** (-q) / 2.0 ** (2.0 - q))


def g_growth(t, q):
    """Convex growth profile: ``t^2/2`` on ``[0,1]``, ``t^q/q + 1/2 - 1/q`` beyond."""
    t = np.asarray(t, dtype=float)
    return np.where(t <= 1.0, 0.5 * t * t, t**q / q + 0.5 - 1.0 / q)


@dataclass(frozen=True)
class PolarPoint:
    rho: float
    mu: float

    def spectrum(self, lam: float) -> np.ndarray:
        return np.array([lam + self.rho * math.cos(self.mu), lam + self.rho * math.sin(self.mu)])


@dataclass(frozen=True)
class Criterion2DReport:
    lam: float
    q: float
    hprime_at_lambda_sq: float
    lhs_second: float
    rhs_second: float
    lhs_first: float
    rhs_first: float
    satisfied: bool
    strict: bool
    branch: str
    first_holds: bool
    second_holds: bool
    constants: str = STATED

    @property
    def second_implies_first(self) -> bool:
        return (not self.second_holds) or self.first_holds

    def row(self) -> dict:
        return {
            "lambda": self.lam,
            "q": self.q,
            "lhs_first": self.lhs_first,
            "rhs_first": self.rhs_first,
            "lhs_second": self.lhs_second,
            "rhs_second": self.rhs_second,
            "satisfied": self.satisfied,
            "strict": self.strict,
        }


CSV_COLUMNS = ["lambda", "q", "lhs_first", "rhs_first", "lhs_second", "rhs_second", "satisfied", "strict"]


def check_sufficient_2d(lam: float, material: Material2D, constants: str = STATED) -> Criterion2DReport:
    if not lam > 0:
        raise ValueError("lambda must be positive")
    q = material.q
    Y = float(material.law.hprime(lam * lam))
    C1, C2 = _consts(lam, q, constants)
    rhs_second = float(e_max(q))
    scale = Y * lam ** (2.0 - q)
    lhs_second = math.inf if scale == 0 else C2 / scale
    second = Y <= 0 and lhs_second == math.inf or (Y > 0 and lhs_second >= rhs_second)
    first = C1 >= Y / 2.0
    if Y <= 0:
        branch = "hprime_nonpositive"
        satisfied = True
        strict = Y == 0
    else:
        branch = "condition_checked"
        satisfied = lhs_second >= rhs_second
        strict = lhs_second > rhs_second
    return Criterion2DReport(lam, q, Y, lhs_second, rhs_second, C1, Y / 2.0, satisfied, strict, branch,
                             first, bool(second), constants)


@dataclass(frozen=True)
class CriticalLoad:
    lam_star: float
    bracket: tuple
    monotone: bool
    conservative: bool
    never_violated: bool


def _threshold_scan(pred, lo, hi, n=1001):
    lams = np.linspace(lo, hi, n)
    flags = np.array([pred(x) for x in lams])
    return lams, flags


def solve_threshold(pred, monitor, lo: float, hi: float, tol: float = 1e-10, n_scan: int = 1001) -> CriticalLoad:
    """Largest ``lam`` in ``[lo, hi]`` with ``pred`` true, via scan + bisection.

    ``monitor`` is the scalar whose monotonicity makes the root unique; if the
    scan shows it decreasing somewhere, the first sign change is returned and
    flagged conservative.
    """
    if not pred(lo):
        raise BracketError(f"criterion not satisfied at bracket low end {lo}")
    lams, flags = _threshold_scan(pred, lo, hi, n_scan)
    vals = np.array([monitor(x) for x in lams])
    monotone = bool(np.all(np.diff(vals) >= -1e-14 * (1.0 + np.abs(vals[:-1]))))
    if flags.all():
        return CriticalLoad(float(hi), (lo, hi), monotone, not monotone, True)
    k = int(np.argmin(flags))  # first violated scan point
    root = bisect_predicate(pred, float(lams[k - 1]), float(lams[k]), tol)
    return CriticalLoad(root, (lo, hi), monotone, not monotone, False)


def critical_load_2d(material: Material2D, bracket=(1e-3, 10.0), constants: str = STATED, tol: float = 1e-10) -> CriticalLoad:
    q = material.q

    def pred(x):
        return check_sufficient_2d(x, material, constants).satisfied

    def monitor(x):
        return float(material.law.hprime(x * x)) * x ** (2.0 - q)

    return solve_threshold(pred, monitor, float(bracket[0]), float(bracket[1]), tol)


@dataclass
class GridCertificate:
    lam: float
    min_value: float
    argmin: Optional[np.ndarray]
    argmin_polar: Optional[PolarPoint]
    n_points: int
    rho_max: float
    tail_radius: float
    tail_certified: bool
    lemma_applicable: bool

    @property
    def certified(self) -> bool:
        return self.min_value >= 0.0 and self.tail_certified

    @property
    def counterexample(self) -> Optional[np.ndarray]:
        return self.argmin if self.min_value < 0 else None


def tail_radius_2d(lam: float, material: Material2D, constants: str = STATED) -> float:
    """Radius beyond which ``G1 >= 0`` on the quadrant, from ``G1 >= C2 rho^q - Y lam rho``.

    On the open quadrant a negative product ``(l1-lam)(l2-lam)`` needs exactly
    one factor in ``(-lam, 0)``, so it is bounded by ``lam * rho``.  Infinite
    when ``Y < 0`` (then both-positive directions are unbounded and negative).
    """
    Y = float(material.law.hprime(lam * lam))
    if Y < 0:
        return math.inf
    _, C2 = _consts(lam, material.q, constants)
    return max(math.sqrt(2.0) * lam, (Y * lam / C2) ** (1.0 / (material.q - 1.0)) if Y > 0 else 0.0)


def grid_verify_g1(lam: float, material: Material2D, n_rho: int = 1000, n_mu: int = 1000,
                   rho_max_factor: float = 1e3, rho_min_factor: float = 1e-6,
                   constants: str = STATED, workers: int = 1, chunk_rows: int = 50) -> GridCertificate:
    """Exhaustive polar-grid minimum of ``G1`` over the open positive quadrant."""
    rho = np.geomspace(rho_min_factor * lam, rho_max_factor * lam, n_rho)
    mu = np.arange(n_mu) * (2.0 * math.pi / n_mu)
    cm, sm = np.cos(mu), np.sin(mu)
    Y = float(material.law.hprime(lam * lam))
    C1, C2 = _consts(lam, material.q, constants)
    q = material.q

    def block(bounds):
        a, b = bounds
        r = rho[a:b, None]
        d1 = r * cm[None, :]
        d2 = r * sm[None, :]
        inside = (lam + d1 > 0) & (lam + d2 > 0)
        rr = np.broadcast_to(r, d1.shape)
        val = np.minimum(C1 * rr * rr, C2 * rr**q) + Y * d1 * d2
        val = np.where(inside, val, np.inf)
        i = int(np.argmin(val))
        return float(val.flat[i]), a * n_mu + i, int(inside.sum())

    parts = ordered_map(block, chunk_bounds(n_rho, chunk_rows), workers)
    vmin, idx = argmin_reduce([(v, i) for v, i, _ in parts])
    count = sum(c for _, _, c in parts)
    if idx >= 0:
        ir, im = divmod(idx, n_mu)
        pp = PolarPoint(float(rho[ir]), float(mu[im]))
        arg = pp.spectrum(lam)
    else:
        pp, arg = None, None
    tail = tail_radius_2d(lam, material, constants)
    return GridCertificate(lam, vmin, arg, pp, count, float(rho[-1]), tail, bool(rho[-1] >= tail), Y > 0)


def counterexample_2d(lam: float, material: Material2D, constants: str = STATED, bump: float = 1e-3):
    """Point of the open quadrant with ``G1 < 0`` built from the failing condition, or None.

    If the inner condition fails the point sits on the diagonal ``mu = -pi/4``
    close to ``Lambda0``; otherwise it is just past the outer root along the
    maximizing direction of ``e``.
    """
    q = material.q
    Y = float(material.law.hprime(lam * lam))
    if Y <= 0:
        # both-positive diagonal: G1 = f(sqrt2 t) + Y t^2 is eventually negative when Y < 0
        if Y == 0:
            return None
        _, C2 = _consts(lam, q, constants)
        t = 2.0 * max((C2 * 2.0 ** (q / 2.0) / -Y) ** (1.0 / (2.0 - q)), lam)
        Lam = np.array([lam + t, lam + t])
        return Lam if g1(Lam, lam, material, constants) < 0 else None
    C1, C2 = _consts(lam, q, constants)
    if C1 < Y / 2.0:
        r = 0.5 * lam
        mu = -math.pi / 4.0
    else:
        mu = e_argmax(q)
        sc = abs(math.sin(mu) * math.cos(mu))
        r = (C2 / (Y * sc)) ** (1.0 / (2.0 - q)) * (1.0 + bump)
        r = max(r, math.sqrt(2.0) * lam * (1.0 + bump))
    Lam = PolarPoint(r, mu).spectrum(lam)
    if np.any(Lam <= 0):
        return None
    return Lam if g1(Lam, lam, material, constants) < 0 else None


def c0_lower_bound(lam: float, material: Material2D, constants: str = STATED) -> float:
    """Constant ``c0 > 0`` with ``G1(Lambda) >= c0 g(|Lambda - Lambda0|)`` on the quadrant.

    Inner disc: ``G1 >= (C1 - Y/2) rho^2 >= 2 (C1 - Y/2) g``.
    Outside: ``G1 >= eps rho^q >= q eps g`` with ``eps = C2 - Y lam^(2-q) e_max``.
    """
    rep = check_sufficient_2d(lam, material, constants)
    Y = rep.hprime_at_lambda_sq
    if not rep.strict or Y < 0:
        raise ConditionNotStrict(f"strict sufficient condition fails at lambda={lam} (h'={Y:.6g})")
    q = material.q
    C1, C2 = _consts(lam, q, constants)
    inner = 2.0 * (C1 - Y / 2.0)
    eps = C2 - Y * lam ** (2.0 - q) * float(e_max(q))
    c0 = min(inner, q * eps)
    if not c0 > 0:
        raise ConditionNotStrict(f"degenerate constants at lambda={lam}: inner={inner}, eps={eps}")
    return c0
