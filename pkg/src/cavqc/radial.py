"""Radial maps ``u(x) = r(|x|) x/|x|`` on the unit ball and their energies.

For a radial map the gradient has singular values ``r'`` and ``r/R`` (the
latter with multiplicity ``n-1``), so ``|grad u|^2 = r'^2 + (n-1)(r/R)^2`` and
``det grad u = r' (r/R)^(n-1)``.  The trial family

    r(R) = (lt^n R^n + a^n)^(1/n),   lt^n = lam^n - a^n

opens a cavity of radius ``a`` at constant determinant ``lt^n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .fields import composite_rule
from .search import golden_section_min
from .volumetric import energy_density

TRIAL = "trial_family"
PIECEWISE = "piecewise_linear"
MAX_KNOTS = 200
MAX_ITERATIONS = 500


class NonpositiveDeterminant(ValueError):
    pass


class BracketError(ValueError):
    pass


def ball_volume(n: int) -> float:
    return math.pi if n == 2 else 4.0 * math.pi / 3.0


def _sphere_area(n: int) -> float:
    return 2.0 * math.pi if n == 2 else 4.0 * math.pi


@dataclass(frozen=True)
class RadialProfile:
    kind: str
    a: float
    lam: float
    n: int
    values: Optional[tuple] = None  # knot values r_0..r_N on a uniform grid of [0, 1]

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError("n must be 2 or 3")
        if self.a < 0:
            raise ValueError("cavity radius must be nonnegative")
        if self.kind == TRIAL:
            if not self.lam**self.n > self.a**self.n:
                raise ValueError("trial family needs lam > a")
        elif self.kind == PIECEWISE:
            v = np.asarray(self.values, dtype=float)
            if v.size < 2 or v.size > MAX_KNOTS + 1:
                raise ValueError(f"piecewise profile needs 2..{MAX_KNOTS + 1} knot values")
            if abs(v[-1] - self.lam) > 1e-14 * max(1.0, self.lam) or abs(v[0] - self.a) > 1e-14 * max(1.0, self.a):
                raise ValueError("knot values must start at a and end at lam")
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")

    @property
    def knots(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, len(self.values))

    def r(self, R):
        R = np.asarray(R, dtype=float)
        if self.kind == TRIAL:
            lt = self.lam**self.n - self.a**self.n
            return (lt * R**self.n + self.a**self.n) ** (1.0 / self.n)
        return np.interp(R, self.knots, np.asarray(self.values, dtype=float))

    def dr(self, R):
        R = np.asarray(R, dtype=float)
        if self.kind == TRIAL:
            lt = self.lam**self.n - self.a**self.n
            return lt * R ** (self.n - 1) / self.r(R) ** (self.n - 1)
        v = np.asarray(self.values, dtype=float)
        m = v.size - 1
        k = np.clip(np.floor(R * m).astype(int), 0, m - 1)
        return (v[k + 1] - v[k]) * m


def trial_profile(lam: float, a: float, n: int) -> RadialProfile:
    return RadialProfile(TRIAL, float(a), float(lam), n)


def to_piecewise(profile: RadialProfile, knots: int = 40) -> RadialProfile:
    R = np.linspace(0.0, 1.0, knots + 1)
    v = profile.r(R)
    v[0], v[-1] = profile.a, profile.lam
    return RadialProfile(PIECEWISE, profile.a, profile.lam, profile.n, tuple(float(x) for x in v))


def _density(material, n: int, r, dr, R):
    """Energy density of the radial map at radii ``R`` (vectorized, via diagonal representatives)."""
    hoop = r / R
    diag = np.zeros(R.shape + (n, n))
    diag[..., 0, 0] = dr
    for i in range(1, n):
        diag[..., i, i] = hoop
    return energy_density(material, diag)


def _integrate_segment(fn, lo: float, hi: float, power: float, rtol: float, max_panels: int = 4096):
    """``int_lo^hi fn(R) dR`` after ``R = lo + (hi-lo) x^power``; panels doubled until converged."""
    def rule(panels):
        x, w = composite_rule(panels, 8)
        R = lo + (hi - lo) * x**power
        jac = (hi - lo) * power * x ** (power - 1.0)
        return float(np.sum(w * jac * fn(R)))

    panels = 4
    prev = rule(panels)
    while panels < max_panels:
        panels *= 2
        cur = rule(panels)
        if abs(cur - prev) <= rtol * (abs(cur) + 1e-300):
            return cur
        prev = cur
    return prev


def radial_energy_fn(r: Callable, dr: Callable, material, n: int, cavity: bool,
                     breaks=None, rtol: float = 1e-12) -> float:
    """``|S^(n-1)| int_0^1 W(grad u) R^(n-1) dR`` for a radial map with profile ``r``.

    With a cavity the integrand behaves like ``R^(n-1-q)`` at the origin; the
    substitution ``R = x^(2/(n-q))`` removes the singularity.
    """
    if material.dim != n:
        raise ValueError("material dimension does not match n")
    q = material.q

    def fn(R):
        R = np.maximum(R, 1e-300)
        d = dr(R)
        if np.any(d <= 0):
            raise NonpositiveDeterminant("r' <= 0 on (0, 1]")
        return _density(material, n, r(R), d, R) * R ** (n - 1)

    breaks = [0.0, 1.0] if breaks is None else list(breaks)
    total = 0.0
    for i, (lo, hi) in enumerate(zip(breaks[:-1], breaks[1:])):
        power = 2.0 / (n - q) if (cavity and i == 0) else 1.0
        total += _integrate_segment(fn, lo, hi, power, rtol)
    return _sphere_area(n) * total


def _piecewise_energy(values: np.ndarray, material, n: int, panels: int = 4, order: int = 8) -> float:
    """Energy of a piecewise-linear profile with one fixed Gauss rule per segment.

    The integrand is smooth inside each segment; only the first one needs the
    cavity substitution.
    """
    m = values.size - 1
    slopes = np.diff(values) * m
    if np.any(slopes <= 0):
        raise NonpositiveDeterminant("piecewise profile is not strictly increasing")
    x, w = composite_rule(panels, order)
    h = 1.0 / m
    power = 2.0 / (n - material.q) if values[0] > 0 else 1.0
    R0 = h * x**power
    J0 = h * power * x ** (power - 1.0)
    left = np.arange(1, m) * h
    R = np.concatenate([R0, (left[:, None] + h * x[None, :]).ravel()])
    J = np.concatenate([J0, np.full((m - 1) * x.size, h)])
    W = np.concatenate([w, np.tile(w, m - 1)]) * J
    seg = np.concatenate([np.zeros(x.size, dtype=int), np.repeat(np.arange(1, m), x.size)])
    r = values[seg] + slopes[seg] * (R - seg * h)
    dens = _density(material, n, r, slopes[seg], np.maximum(R, 1e-300))
    return _sphere_area(n) * float(np.sum(W * dens * R ** (n - 1)))


def radial_energy(profile: RadialProfile, material, n: Optional[int] = None) -> float:
    n = profile.n if n is None else n
    if n != profile.n:
        raise ValueError("profile dimension does not match n")
    if material.dim != n:
        raise ValueError("material dimension does not match n")
    if profile.kind == PIECEWISE:
        return _piecewise_energy(np.asarray(profile.values, dtype=float), material, n)
    return radial_energy_fn(profile.r, profile.dr, material, n, profile.a > 0)


def homogeneous_energy(lam: float, material) -> float:
    n = material.dim
    return float(energy_density(material, lam * np.eye(n))) * ball_volume(n)


@dataclass(frozen=True)
class TrialResult:
    lam: float
    a_star: float
    I_star: float
    I_homogeneous: float
    cavitated: bool

    def row(self) -> dict:
        return {"lambda": self.lam, "a_star": self.a_star, "I_star": self.I_star,
                "I_homogeneous": self.I_homogeneous, "cavitated": self.cavitated}


CSV_COLUMNS = ["lambda", "a_star", "I_star", "I_homogeneous", "cavitated"]


def default_a_grid(lam: float, points: int = 41) -> np.ndarray:
    return lam * (1.0 - 1e-6) * np.linspace(0.0, 1.0, points)


def minimize_trial_family(lam: float, material, n: Optional[int] = None, a_grid=None,
                          rel_tol: float = 1e-10) -> TrialResult:
    """Best cavity radius in the trial family: grid scan, then golden section around the best cell."""
    n = material.dim if n is None else n
    a_grid = default_a_grid(lam) if a_grid is None else np.asarray(a_grid, dtype=float)
    if a_grid[0] != 0.0 or np.any(a_grid < 0) or np.any(a_grid >= lam):
        raise ValueError("a_grid must start at 0 and stay below lam")

    def energy_at(a):
        return radial_energy(trial_profile(lam, a, n), material, n)

    vals = np.array([energy_at(a) for a in a_grid])
    I0 = float(vals[0])
    k = int(np.argmin(vals))
    lo = a_grid[max(k - 1, 0)]
    hi = a_grid[min(k + 1, len(a_grid) - 1)]
    a_best, I_best = float(a_grid[k]), float(vals[k])
    if hi > lo:
        a_gs, I_gs = golden_section_min(energy_at, lo, hi, tol=1e-9)
        if I_gs < I_best:
            a_best, I_best = a_gs, I_gs
    cav = I_best < I0 - rel_tol * (1.0 + abs(I0))
    if not cav:
        a_best, I_best = 0.0, I0
    return TrialResult(float(lam), float(a_best), float(I_best), I0, bool(cav))


@dataclass(frozen=True)
class CavitationLoad:
    lam_cav: float
    bracket_error: float
    lower: float
    upper: float


def empirical_critical_load(material, n: Optional[int] = None, bracket=(1.0, 20.0), tol: float = 1e-6,
                            a_grid_points: int = 41) -> CavitationLoad:
    """Smallest stretch at which the trial family beats the homogeneous map (an upper bound on the critical load)."""
    n = material.dim if n is None else n
    lo, hi = float(bracket[0]), float(bracket[1])

    def cav(lam):
        return minimize_trial_family(lam, material, n, default_a_grid(lam, a_grid_points)).cavitated

    if cav(lo):
        raise BracketError(f"trial family already cavitates at {lo}")
    if not cav(hi):
        raise BracketError(f"trial family does not cavitate at {hi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if cav(mid):
            hi = mid
        else:
            lo = mid
    return CavitationLoad(hi, hi - lo, lo, hi)


def refine_piecewise(profile: RadialProfile, material, n: Optional[int] = None, iterations: int = 20,
                     rel_tol: float = 1e-12):
    """Projected coordinate descent on the knot values of a piecewise-linear profile.

    ``r(1) = lam`` stays fixed and each knot moves inside the open interval
    between its neighbours, so monotonicity survives every step.  Returns the
    refined profile and the energy history (nonincreasing).
    """
    n = profile.n if n is None else n
    iterations = min(iterations, MAX_ITERATIONS)
    if profile.kind != PIECEWISE:
        profile = to_piecewise(profile)
    v = np.asarray(profile.values, dtype=float).copy()

    def energy_of(vals):
        if np.any(np.diff(vals) <= 0) or vals[0] < 0:
            return math.inf
        return _piecewise_energy(vals, material, n)

    E = energy_of(v)
    history = [E]
    for _ in range(iterations):
        E_start = E
        for k in range(len(v) - 1):
            lo = 0.0 if k == 0 else v[k - 1]
            hi = v[k + 1]
            span = hi - lo
            lo_k, hi_k = lo + 1e-9 * span, hi - 1e-9 * span
            if k == 0:
                lo_k = 0.0

            def f(x, k=k):
                w = v.copy()
                w[k] = x
                return energy_of(w)

            x, fx = golden_section_min(f, lo_k, hi_k, tol=1e-8)
            if fx < E:
                v[k], E = x, fx
        history.append(E)
        if E_start - E <= rel_tol * (1.0 + abs(E)):
            break
    out = RadialProfile(PIECEWISE, float(v[0]), profile.lam, n, tuple(float(x) for x in v))
    return out, history
