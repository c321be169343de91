"""Three-dimensional criterion engine.

With ``Lambda0 = (lam, lam, lam)``, ``Y = h'(lam^3)`` and ``l = Lambda - Lambda0``::

    F1(Lambda) = kappa |l|^q + Y l1 l2 l3
    F2(Lambda) = gamma |l|^2 + lam Y (l1 l2 + l1 l3 + l2 l3)

Along a ray ``l = rho (cos phi sin theta, sin phi sin theta, cos theta)`` the
cubic term can only win before the ray leaves the positive orthant, which gives
the angular suprema ``s1, s2, s3`` and the main condition
``kappa / (Y lam^(3-q)) >= (q-2)^((q-2)/2) q^(-q/2)``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import zhang
from .critload2d import BracketError, CriticalLoad, solve_threshold
from .parallel import argmin_reduce, chunk_bounds, ordered_map
from .search import golden_section_max
from .svcalc import singular_values
from .volumetric import DomainError, Material3D

KAPPA_LOWER = "lower_bound"
KAPPA_NUMERIC = "numeric"


@functools.lru_cache(maxsize=64)
def _kappa_numeric_cached(q: float) -> float:
    return zhang.kappa_numeric(q)[0]


def kappa_value(q: float, mode: str = KAPPA_LOWER) -> float:
    if mode == KAPPA_LOWER:
        return float(zhang.kappa_lower(q))
    if mode == KAPPA_NUMERIC:
        return _kappa_numeric_cached(float(q))
    raise ValueError(f"unknown kappa mode {mode!r}")


def _check_orthant(Lam):
    Lam = np.asarray(Lam, dtype=float)
    if np.any(Lam <= 0):
        raise DomainError("singular values must be positive")
    return Lam


def f1(Lam, lam: float, material: Material3D, kappa: Optional[float] = None):
    Lam = _check_orthant(Lam)
    k = kappa_value(material.q) if kappa is None else kappa
    Y = float(material.law.hprime(lam**3))
    d = Lam - lam
    rho = np.sqrt(np.sum(d * d, axis=-1))
    return k * rho**material.q + Y * d[..., 0] * d[..., 1] * d[..., 2]


def f2(Lam, lam: float, material: Material3D):
    Lam = _check_orthant(Lam)
    Y = float(material.law.hprime(lam**3))
    d = Lam - lam
    pairs = d[..., 0] * d[..., 1] + d[..., 0] * d[..., 2] + d[..., 1] * d[..., 2]
    return material.gamma * np.sum(d * d, axis=-1) + lam * Y * pairs


def direction(theta, phi):
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([np.cos(phi) * st, np.sin(phi) * st, np.cos(theta) + 0.0 * phi], axis=-1)


@dataclass(frozen=True)
class SphericalPoint:
    rho: float
    theta: float
    phi: float

    def spectrum(self, lam: float) -> np.ndarray:
        return lam + self.rho * direction(self.theta, self.phi)


def exit_radii(theta: float, phi: float, lam: float):
    """Radii at which each coordinate of ``Lambda0 + rho l`` hits zero; None if never."""
    out = []
    for c in direction(theta, phi):
        out.append(lam / -c if c < -1e-15 else None)
    return tuple(out)


# --- angular suprema -----------------------------------------------------------

def m1(theta, phi, q):
    return 4.0 * np.abs(np.sin(phi)) * np.abs(np.cos(phi)) ** (q - 2.0) * np.abs(np.cos(theta)) * np.abs(np.sin(theta)) ** (q - 1.0)


def m2(theta, phi, q):
    return 4.0 * np.abs(np.sin(phi)) ** (q - 2.0) * np.abs(np.cos(phi)) * np.abs(np.sin(theta)) ** (q - 1.0) * np.abs(np.cos(theta))


def m3(theta, phi, q):
    return 2.0 * np.abs(np.sin(2.0 * phi)) * np.abs(np.cos(theta)) ** (q - 2.0) * np.sin(theta) ** 2


def in_S(theta, phi):
    """Sector where the product of the three coordinates is negative."""
    return (np.sin(2.0 * phi) * np.cos(theta) < 0) & (phi >= math.pi / 4) & (phi <= 5 * math.pi / 4)


def in_S1(theta, phi):
    ct = np.cos(theta)
    up = (ct > 0) & (phi >= math.pi / 2) & (phi <= math.pi)
    down = (ct < 0) & (phi >= math.pi) & (phi <= 5 * math.pi / 4)
    return in_S(theta, phi) & (up | down)


def in_S2(theta, phi):
    return in_S(theta, phi) & (np.cos(theta) < 0) & (phi > math.pi) & (phi <= 5 * math.pi / 4)


def in_S3(theta, phi):
    lo = (phi >= math.pi / 4) & (phi <= math.pi / 2)
    hi = (phi >= math.pi) & (phi <= 5 * math.pi / 4)
    return in_S(theta, phi) & (np.cos(theta) < 0) & (lo | hi)


def s_closed(q):
    q = np.asarray(q, dtype=float)
    return 4.0 * (q - 2.0) ** ((q - 2.0) / 2.0) * q ** (-q / 2.0)


def rhs_main(q):
    return s_closed(q) / 4.0


def _masked_max(fn, mask, th, ph, q):
    T, P = np.meshgrid(th, ph, indexing="ij")
    V = np.where(mask(T, P), fn(T, P, q), -np.inf)
    i, j = np.unravel_index(int(np.argmax(V)), V.shape)
    return float(V[i, j]), i, j


def _zoom_max(fn, mask, q, theta_range, phi_range, n=401, levels=8, n_zoom=41):
    th = np.linspace(*theta_range, n)
    ph = np.linspace(*phi_range, n)
    best, i, j = _masked_max(fn, mask, th, ph, q)
    bt, bp = th[i], ph[j]
    dt, dp = th[1] - th[0], ph[1] - ph[0]
    for _ in range(levels):
        th = np.clip(np.linspace(bt - 2 * dt, bt + 2 * dt, n_zoom), *theta_range)
        ph = np.clip(np.linspace(bp - 2 * dp, bp + 2 * dp, n_zoom), *phi_range)
        v, i, j = _masked_max(fn, mask, th, ph, q)
        if v >= best:
            best, bt, bp = v, th[i], ph[j]
        dt, dp = th[1] - th[0], ph[1] - ph[0]
    return best, (float(bt), float(bp))


def s_numeric(q: float, n: int = 401):
    """Brute-force suprema ``(s1, s2, s3)`` of ``m_i`` over their angle sets."""
    if not 2.0 < q < 3.0:
        raise ValueError("q must lie in (2, 3)")
    rng_t = (0.0, math.pi)
    rng_p = (math.pi / 4, 5 * math.pi / 4)
    s1, _ = _zoom_max(m1, in_S1, q, rng_t, rng_p, n)
    s2, _ = _zoom_max(m2, in_S2, q, rng_t, rng_p, n)
    s3, _ = _zoom_max(m3, in_S3, q, rng_t, rng_p, n)
    return s1, s2, s3


def f_phi(phi, q):
    """``|sin phi| |cos phi|^(q-2)``, the angular factor of ``m1``."""
    phi = np.asarray(phi, dtype=float)
    return np.abs(np.sin(phi)) * np.abs(np.cos(phi)) ** (q - 2.0)


def f_max_closed(q):
    """True maximum of :func:`f_phi`, attained at ``cos^2 phi = (q-2)/(q-1)``."""
    q = np.asarray(q, dtype=float)
    return (q - 1.0) ** -0.5 * ((q - 2.0) / (q - 1.0)) ** ((q - 2.0) / 2.0)


def f_max_reciprocal(q):
    """Reciprocal of :func:`f_max_closed`, the other closed form in circulation; exceeds 1 and is never attained."""
    q = np.asarray(q, dtype=float)
    return (q - 1.0) ** 0.5 * ((q - 1.0) / (q - 2.0)) ** ((q - 2.0) / 2.0)


def f_phi_grid_max(q: float, n: int = 100001):
    phi = np.linspace(math.pi / 2, 5 * math.pi / 4, n)
    v = f_phi(phi, q)
    k = int(np.argmax(v))
    lo, hi = phi[max(k - 1, 0)], phi[min(k + 1, n - 1)]
    x, fx = golden_section_max(lambda t: float(f_phi(t, q)), lo, hi, tol=1e-14)
    return max(fx, float(v[k])), x


def r_theta(theta, q):
    theta = np.asarray(theta, dtype=float)
    return np.abs(np.cos(theta)) ** (q - 2.0) * np.sin(theta) ** 2


# --- criterion -----------------------------------------------------------------

@dataclass(frozen=True)
class Criterion3DReport:
    lam: float
    q: float
    gamma: float
    kappa_used: float
    kappa_provenance: str
    hprime_at_lambda_cubed: float
    lhs_main: float
    rhs_main: float
    lhs_gamma: float
    satisfied: bool
    strict_main: bool
    branch: str
    main_holds: bool
    gamma_holds: bool

    def row(self) -> dict:
        return {
            "lambda": self.lam,
            "q": self.q,
            "gamma": self.gamma,
            "kappa_used": self.kappa_used,
            "kappa_provenance": self.kappa_provenance,
            "lhs_main": self.lhs_main,
            "rhs_main": self.rhs_main,
            "lhs_gamma": self.lhs_gamma,
            "satisfied": self.satisfied,
            "strict_main": self.strict_main,
            "branch": self.branch,
        }


CSV_COLUMNS = ["lambda", "q", "gamma", "kappa_used", "kappa_provenance", "lhs_main", "rhs_main",
               "lhs_gamma", "satisfied", "strict_main", "branch"]


def check_sufficient_3d(lam: float, material: Material3D, kappa_mode: str = KAPPA_LOWER) -> Criterion3DReport:
    if not lam > 0:
        raise ValueError("lambda must be positive")
    q = material.q
    k = kappa_value(q, kappa_mode)
    Y = float(material.law.hprime(lam**3))
    rhs = float(rhs_main(q))
    if Y == 0:
        lhs_m, lhs_g = math.inf, math.inf
    else:
        lhs_m = k / (Y * lam ** (3.0 - q))
        lhs_g = material.gamma / (lam * Y)
    main = Y <= 0 or lhs_m >= rhs
    gam = Y <= 0 or lhs_g >= 0.5
    if Y <= 0:
        branch, satisfied, strict = "hprime_nonpositive", True, Y == 0
    else:
        branch, satisfied, strict = "condition_checked", main and gam, lhs_m > rhs
    return Criterion3DReport(lam, q, material.gamma, k, kappa_mode, Y, lhs_m, rhs, lhs_g,
                             bool(satisfied), bool(strict), branch, bool(main), bool(gam))


@dataclass(frozen=True)
class CriticalLoad3D:
    lam_star: float
    main: CriticalLoad
    gamma: CriticalLoad
    binding: str
    kappa_mode: str


def critical_load_3d(material: Material3D, bracket=(1e-3, 10.0), kappa_mode: str = KAPPA_LOWER,
                     tol: float = 1e-10) -> CriticalLoad3D:
    q = material.q
    lo, hi = float(bracket[0]), float(bracket[1])

    def y(x):
        return float(material.law.hprime(x**3))

    main = solve_threshold(lambda x: check_sufficient_3d(x, material, kappa_mode).main_holds,
                           lambda x: y(x) * x ** (3.0 - q), lo, hi, tol)
    gam = solve_threshold(lambda x: check_sufficient_3d(x, material, kappa_mode).gamma_holds,
                          lambda x: y(x) * x, lo, hi, tol)
    binding = "main" if main.lam_star <= gam.lam_star else "gamma"
    return CriticalLoad3D(min(main.lam_star, gam.lam_star), main, gam, binding, kappa_mode)


# --- grid certification --------------------------------------------------------

@dataclass
class GridCertificate3D:
    lam: float
    min_f1: float
    argmin_f1: Optional[np.ndarray]
    min_f2: float
    argmin_f2: Optional[np.ndarray]
    min_pair_sum: float
    tail_radius: float
    rho_max: float
    kappa_used: float

    @property
    def tail_certified(self) -> bool:
        return self.rho_max >= self.tail_radius

    @property
    def certified(self) -> bool:
        return self.min_f1 >= 0 and self.min_f2 >= 0 and self.tail_certified


def tail_radius_3d(lam: float, material: Material3D, kappa: float) -> float:
    """Radius beyond which ``F1 >= 0`` on the orthant, from ``F1 >= kappa rho^q - Y lam rho^2 / 2``.

    All three coordinates negative forces ``rho < sqrt3 lam``; with one negative
    coordinate it lies in ``(-lam, 0)`` and the other two multiply to at most ``rho^2/2``.
    """
    Y = float(material.law.hprime(lam**3))
    if Y < 0:
        return math.inf
    base = math.sqrt(3.0) * lam
    if Y == 0:
        return base
    return max(base, (Y * lam / (2.0 * kappa)) ** (1.0 / (material.q - 2.0)))


def grid_verify_f(lam: float, material: Material3D, n_rho: int = 200, n_theta: int = 181, n_phi: int = 361,
                  rho_max_factor: float = 1e3, rho_min_factor: float = 1e-6, kappa_mode: str = KAPPA_LOWER,
                  ordered: bool = True, workers: int = 1, chunk_rows: int = 10) -> GridCertificate3D:
    """Spherical-grid minima of ``F1`` and ``F2`` over the positive orthant.

    ``ordered`` keeps only directions with ``l1 <= l2 <= l3`` (both functions are
    symmetric, so this loses nothing).  ``F2`` is homogeneous of degree two, so
    its sign on a ray is that of ``gamma + lam Y sum_{i<j} l_i l_j``.
    """
    k = kappa_value(material.q, kappa_mode)
    Y = float(material.law.hprime(lam**3))
    q = material.q
    rho = np.geomspace(rho_min_factor * lam, rho_max_factor * lam, n_rho)
    th = np.linspace(0.0, math.pi, n_theta)
    ph = np.linspace(0.0, 2 * math.pi, n_phi, endpoint=False)
    T, P = np.meshgrid(th, ph, indexing="ij")
    L = direction(T, P).reshape(-1, 3)
    if ordered:
        L = L[(L[:, 0] <= L[:, 1] + 1e-15) & (L[:, 1] <= L[:, 2] + 1e-15)]
    prod = L[:, 0] * L[:, 1] * L[:, 2]
    pairs = L[:, 0] * L[:, 1] + L[:, 0] * L[:, 2] + L[:, 1] * L[:, 2]
    nd = L.shape[0]

    def block(bounds):
        a, b = bounds
        r = rho[a:b, None]
        inside = np.all(lam + r[:, :, None] * L[None, :, :] > 0, axis=-1)
        v1 = np.where(inside, k * r**q + Y * prod[None, :] * r**3, np.inf)
        v2 = np.where(inside, (material.gamma + lam * Y * pairs[None, :]) * r * r, np.inf)
        i1, i2 = int(np.argmin(v1)), int(np.argmin(v2))
        return (float(v1.flat[i1]), a * nd + i1), (float(v2.flat[i2]), a * nd + i2)

    parts = ordered_map(block, chunk_bounds(n_rho, chunk_rows), workers)
    v1, j1 = argmin_reduce([p[0] for p in parts])
    v2, j2 = argmin_reduce([p[1] for p in parts])

    def point(j):
        if j < 0:
            return None
        ir, idir = divmod(j, nd)
        return lam + rho[ir] * L[idir]

    return GridCertificate3D(lam, v1, point(j1), v2, point(j2), float(pairs.min()),
                             tail_radius_3d(lam, material, k), float(rho[-1]), k)


def counterexample_f1(lam: float, material: Material3D, kappa_mode: str = KAPPA_LOWER, bump: float = 1e-3):
    """Orthant point with ``F1 < 0`` when the main condition fails (pointwise only), else None.

    Uses the maximizing direction of ``m1`` (``sin^2 theta = (q-1)/q`` with
    ``cos theta > 0``, ``cos^2 phi = (q-2)/(q-1)`` with ``phi`` in ``(pi/2, pi)``).
    Only the first coordinate decreases along it, so its exit radius is the
    true one and the construction is sharp.
    """
    rep = check_sufficient_3d(lam, material, kappa_mode)
    if rep.main_holds:
        return None
    q = material.q
    theta = math.asin(math.sqrt((q - 1.0) / q))
    phi = math.pi - math.acos(math.sqrt((q - 2.0) / (q - 1.0)))
    l = direction(theta, phi)
    rho_exit = lam / -l[0]
    Lam = lam + rho_exit * (1.0 - bump) * l
    if np.any(Lam <= 0):
        return None
    return Lam if f1(Lam, lam, material, rep.kappa_used) < 0 else None


# --- conjecture probe ----------------------------------------------------------

def p_function(A, lam: float):
    """``sum_{i<j} s_i s_j - lam sum_i s_i`` from the singular values of ``A``."""
    s = singular_values(A)
    e1 = np.sum(s, axis=-1)
    pairs = 0.5 * (e1 * e1 - np.sum(s * s, axis=-1))
    return pairs - lam * e1


def p_bound(A, lam: float):
    n = np.sqrt(np.sum(np.asarray(A, dtype=float) ** 2, axis=(-2, -1)))
    return n * n + 3.0 * lam * n


@dataclass
class ConjectureReport:
    lam: float
    trials: int
    values: np.ndarray
    min_value: float
    mean_value: float
    argmin_trial: int
    histogram: tuple
    specs: list

    @property
    def counterexample_candidate(self) -> bool:
        return self.min_value < -1e-6


def conjecture_probe(lam: float, trials: int, rng: np.random.Generator, families=("bump", "divfree"),
                     max_freq: int = 2, amp_range=(0.01, 0.3), cells_per_freq: int = 4,
                     order: int = 3, workers: int = 1) -> ConjectureReport:
    """Integrals of ``P(lam I + grad phi)`` over the unit cube for random smooth ``phi``.

    All trial parameters are drawn up front from ``rng`` so the result does not
    depend on ``workers``.  Evidence only: a nonnegative minimum proves nothing.
    """
    from .fields import PerturbationSpec, make_field

    specs = []
    for _ in range(trials):
        fam = families[int(rng.integers(len(families)))]
        freq = tuple(int(v) for v in rng.integers(1, max_freq + 1, size=3))
        amp = float(rng.uniform(*amp_range))
        vec = rng.normal(size=3)
        vec /= np.linalg.norm(vec)
        specs.append(PerturbationSpec(fam, amp, freq, tuple(float(v) for v in vec)))

    def run(spec):
        res = max(8, cells_per_freq * max(spec.freq))
        fld = make_field(spec, lam, res, dim=3, admissible=False, order=order)
        return fld.integrate(p_function(fld.grads, lam))

    vals = np.array(ordered_map(run, specs, workers))
    i = int(np.argmin(vals))
    counts, edges = np.histogram(vals, bins=10)
    return ConjectureReport(lam, trials, vals, float(vals[i]), float(np.mean(vals)), i,
                            (counts.tolist(), edges.tolist()), specs)


__all__ = [
    "BracketError", "Criterion3DReport", "CriticalLoad3D", "ConjectureReport", "SphericalPoint",
    "check_sufficient_3d", "critical_load_3d", "grid_verify_f", "counterexample_f1", "exit_radii",
    "f1", "f2", "s_closed", "s_numeric", "f_max_closed", "f_max_reciprocal", "p_function", "conjecture_probe",
]
