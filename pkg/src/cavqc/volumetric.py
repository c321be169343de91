"""Volumetric laws ``h`` and the 2D / 3D stored-energy densities built on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import svcalc


class DomainError(ValueError):
    """``h`` evaluated at ``t <= 0``, where it is identically ``+inf``."""


ArrayFn = Callable[[np.ndarray], np.ndarray]


def _check_positive(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("volumetric law evaluated at t <= 0")
    return t


@dataclass(frozen=True)
class VolumetricLaw:
    kind: str
    params: dict
    h: ArrayFn = field(repr=False, compare=False)
    hprime: ArrayFn = field(repr=False, compare=False)

    def __call__(self, t):
        return h_eval(self, t)


def power_log(a: float, p: float, b: float, r: float) -> VolumetricLaw:
    """``h(t) = a t^p + b t^-r`` with ``a, b, r > 0`` and ``p >= 1``."""
    if not (a > 0 and b > 0 and r > 0 and p >= 1):
        raise ValueError("power_log needs a, b, r > 0 and p >= 1")
    return VolumetricLaw(
        "power_log",
        {"a": a, "p": p, "b": b, "r": r},
        lambda t: a * t**p + b * t ** (-r),
        lambda t: a * p * t ** (p - 1) - b * r * t ** (-r - 1),
    )


def quad_log(a: float, b: float) -> VolumetricLaw:
    """``h(t) = a (t-1)^2 + b (t - 1 - ln t)``, normalized so ``h(1) = h'(1) = 0``.

    With ``a=1, b=2`` this is ``t^2 - 1 - 2 ln t`` and ``h'(t) = 2t - 2/t``.
    """
    if not (a > 0 and b > 0):
        raise ValueError("quad_log needs a, b > 0")
    return VolumetricLaw(
        "quad_log",
        {"a": a, "b": b},
        lambda t: a * (t - 1.0) ** 2 + b * (t - 1.0 - np.log(t)),
        lambda t: 2.0 * a * (t - 1.0) + b * (1.0 - 1.0 / t),
    )


def custom(h: ArrayFn, hprime: ArrayFn, name: str = "custom") -> VolumetricLaw:
    return VolumetricLaw("custom", {"name": name}, h, hprime)


def h_eval(law: VolumetricLaw, t):
    t = _check_positive(t)
    return law.h(t)


def hprime_eval(law: VolumetricLaw, t):
    t = _check_positive(t)
    return law.hprime(t)


@dataclass
class HypothesisReport:
    failures: list = field(default_factory=list)
    checked: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def _record(self, name: str, passed: bool, detail: str = "") -> None:
        self.checked.append(name)
        if not passed:
            self.failures.append(f"{name}: {detail}" if detail else name)


# thresholds for the asymptotic proxies; toolkit conventions
BLOWUP_T = 1e-8
BLOWUP_MARGIN = 10.0
GROWTH_POINTS = (1e2, 1e4, 1e6)
GROWTH_EPS = 1e-3


def check_hypotheses(law: VolumetricLaw, t_min: float = 1e-3, t_max: float = 1e3, n: int = 2001) -> HypothesisReport:
    """Sampled diagnostics for convexity, regularity, blow-up at 0 and growth at infinity.

    Never raises on a failed check; failures are collected in the report.
    """
    rep = HypothesisReport()
    t = np.geomspace(t_min, t_max, n)
    with np.errstate(all="ignore"):
        try:
            h = np.asarray(law.h(t), dtype=float)
            hp = np.asarray(law.hprime(t), dtype=float)
        except Exception as exc:  # custom evaluators may raise anything
            rep._record("evaluable", False, repr(exc))
            return rep
        rep._record("finite", bool(np.all(np.isfinite(h)) and np.all(np.isfinite(hp))))

        neg = h < 0
        rep._record("nonnegative", not np.any(neg), f"h({t[neg][0]:.6g}) = {h[neg][0]:.6g}" if np.any(neg) else "")

        # midpoint secant test on consecutive triples of a log grid, plus arithmetic midpoints
        mid = np.sqrt(t[:-1] * t[1:])
        w = (t[1:] - mid) / (t[1:] - t[:-1])
        lhs = np.asarray(law.h(mid))
        rhs = w * h[:-1] + (1 - w) * h[1:]
        bad = lhs > rhs + 1e-12 * (1 + np.abs(rhs))
        rep._record("convex", not np.any(bad), f"secant violated near t={mid[bad][0]:.6g}" if np.any(bad) else "")

        step = 1e-4 * t
        fd = (np.asarray(law.h(t + step)) - np.asarray(law.h(t - step))) / (2 * step)
        dev = np.abs(fd - hp)
        bad = dev > 1e-6 * (1 + np.abs(hp))
        rep._record("hprime_consistent", not np.any(bad),
                    f"|h' - FD| = {dev[bad].max():.3g} at t={t[bad][0]:.6g}" if np.any(bad) else "")

        h_small = np.asarray(law.h(np.array([BLOWUP_T, 1e-6, 1e-4, 1.0])), dtype=float)
        blow = bool(h_small[0] > h_small[1] > h_small[2] and h_small[0] >= h_small[3] + BLOWUP_MARGIN)
        rep._record("blowup_at_zero", blow, f"h({BLOWUP_T}) = {h_small[0]:.6g}, h(1) = {h_small[3]:.6g}")

        T = np.array(GROWTH_POINTS)
        ratio = np.asarray(law.h(T), dtype=float) / T
        rep._record("linear_growth", bool(np.all(ratio >= GROWTH_EPS)), f"min h(T)/T = {np.min(ratio):.6g}")
    return rep


def growth_ratio(law: VolumetricLaw) -> float:
    """``min h(T)/T`` over the large-``T`` probe points."""
    T = np.array(GROWTH_POINTS)
    return float(np.min(np.asarray(law.h(T)) / T))


ZFn = Callable[[np.ndarray], np.ndarray]


def z_zero(M: np.ndarray) -> np.ndarray:
    return np.zeros(np.shape(M)[:-2])


def z_power_of_norm(c: float, s: float) -> ZFn:
    """``Z(M) = c |M|^s``; convex and C^1 for ``c >= 0``, ``s > 1``."""
    if c < 0 or s <= 1:
        raise ValueError("power_of_norm needs c >= 0 and s > 1")

    def Z(M):
        return c * svcalc.frob(M) ** s

    return Z


@dataclass(frozen=True)
class Material2D:
    q: float
    law: VolumetricLaw

    def __post_init__(self):
        if not 1.0 < self.q < 2.0:
            raise ValueError(f"2D growth exponent must lie in (1, 2), got {self.q}")

    @property
    def dim(self) -> int:
        return 2


@dataclass(frozen=True)
class Material3D:
    q: float
    gamma: float
    law: VolumetricLaw
    Z: Optional[ZFn] = field(default=None, compare=False)
    z_spec: tuple = ("zero", ())

    def __post_init__(self):
        if not 2.0 < self.q < 3.0:
            raise ValueError(f"3D growth exponent must lie in (2, 3), got {self.q}")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    @property
    def dim(self) -> int:
        return 3

    def z(self, M):
        return z_zero(M) if self.Z is None else self.Z(M)


def reference_material_2d() -> Material2D:
    """Worked-example material: ``q = 1.5``, ``h(t) = t^2 - 1 - 2 ln t``."""
    return Material2D(1.5, quad_log(1.0, 2.0))


def _w_from_parts(norm2, d, q, law):
    out = np.full(np.shape(d), np.inf)
    pos = d > 0
    out[pos] = norm2[pos] ** (q / 2) + law.h(d[pos])
    return out


def energy_density_2d(material: Material2D, F):
    """``|F|^q + h(det F)``; ``+inf`` where ``det F <= 0``."""
    F = np.asarray(F, dtype=float)
    d = np.atleast_1d(svcalc.det(F))
    n2 = np.atleast_1d(np.sum(F * F, axis=(-2, -1)))
    out = _w_from_parts(n2, d, material.q, material.law)
    return out if F.ndim > 2 else float(out[0])


def energy_density_3d(material: Material3D, F):
    """``|F|^q + gamma |F|^2 + Z(cof F) + h(det F)``; ``+inf`` where ``det F <= 0``."""
    F = np.asarray(F, dtype=float)
    d = np.atleast_1d(svcalc.det(F))
    n2 = np.atleast_1d(np.sum(F * F, axis=(-2, -1)))
    out = _w_from_parts(n2, d, material.q, material.law)
    extra = material.gamma * n2 + np.atleast_1d(material.z(svcalc.cof(F)))
    out = np.where(np.isfinite(out), out + extra, out)
    return out if F.ndim > 2 else float(out[0])


def energy_density(material, F):
    if material.dim == 2:
        return energy_density_2d(material, F)
    return energy_density_3d(material, F)
