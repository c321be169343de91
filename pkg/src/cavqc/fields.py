"""Smooth boundary-compatible deformation fields ``u = lam x + phi`` on the unit square / cube.

Gradients are closed form; integrals use composite tensor Gauss-Legendre rules.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from . import svcalc
from .critload2d import ConditionNotStrict, c0_lower_bound, g_growth, lemma_factor
from .volumetric import Material2D, energy_density
from .zhang import little_f

FAMILIES = ("bump", "trig", "divfree")
MIN_RESOLUTION = 8


class AdmissibilityError(ValueError):
    pass


class DegeneratePathError(ValueError):
    pass


@dataclass(frozen=True)
class PerturbationSpec:
    """Closed-form perturbation.

    ``freq`` holds one integer per axis (a scalar is broadcast).  ``vector`` is a
    direction for ``bump``/``divfree`` and a phase vector for ``trig``.
    ``truncated`` deliberately breaks boundary vanishing.
    """

    family: str
    amp: float
    freq: tuple = (1,)
    vector: tuple = ()
    truncated: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown perturbation family {self.family!r}")


@functools.lru_cache(maxsize=16)
def _gauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def composite_rule(resolution: int, order: int = 4):
    """1D nodes and weights on ``[0, 1]`` with ``resolution`` cells."""
    x, w = _gauss(order)
    h = 1.0 / resolution
    left = np.arange(resolution) * h
    nodes = (left[:, None] + 0.5 * h * (x[None, :] + 1.0)).ravel()
    weights = np.tile(0.5 * h * w, resolution)
    return nodes, weights


@functools.lru_cache(maxsize=8)
def _tensor_rule(resolution: int, order: int, dim: int):
    x1, w1 = composite_rule(resolution, order)
    grids = np.meshgrid(*([x1] * dim), indexing="ij")
    X = np.stack([g.ravel() for g in grids], axis=1)
    wg = np.meshgrid(*([w1] * dim), indexing="ij")
    W = np.prod(np.stack([g.ravel() for g in wg], axis=1), axis=1)
    X.setflags(write=False)
    W.setflags(write=False)
    return X, W


def tensor_rule(resolution: int, order: int = 4, dim: int = 2):
    """Nodes ``(N, dim)`` and weights ``(N,)`` of the composite rule on the unit cube (cached, read-only)."""
    return _tensor_rule(int(resolution), int(order), int(dim))


def _freqs(spec: PerturbationSpec, dim: int) -> np.ndarray:
    f = np.asarray(spec.freq, dtype=float).ravel()
    if f.size == 1:
        f = np.repeat(f, dim)
    if f.size != dim:
        raise ValueError("freq must have one entry per axis")
    return f


def _vector(spec: PerturbationSpec, dim: int) -> np.ndarray:
    if not spec.vector:
        v = np.ones(dim)
    else:
        v = np.asarray(spec.vector, dtype=float)[:dim]
    if spec.family != "trig":
        v = v / np.linalg.norm(v)
    return v


def _bump_grad(X, k, d, amp, stretch):
    # phi = amp * d * prod_j sin(k_j pi s x_j)
    a = k * math.pi * stretch
    s = np.sin(a * X)
    c = np.cos(a * X)
    n = X.shape[1]
    dprod = np.empty_like(X)
    for j in range(n):
        others = np.prod(np.delete(s, j, axis=1), axis=1)
        dprod[:, j] = a[j] * c[:, j] * others
    return amp * d[None, :, None] * dprod[:, None, :]


def _trig_grad(X, k, phase, amp):
    # phi_i = amp * B(x) sin(2 pi k.x + phase_i),  B = prod_j sin(pi x_j)
    n = X.shape[1]
    s = np.sin(math.pi * X)
    c = np.cos(math.pi * X)
    B = np.prod(s, axis=1)
    dB = np.empty_like(X)
    for j in range(n):
        dB[:, j] = math.pi * c[:, j] * np.prod(np.delete(s, j, axis=1), axis=1)
    arg = 2.0 * math.pi * (X @ k)[:, None] + phase[None, :n]
    S, C = np.sin(arg), np.cos(arg)
    return amp * (S[:, :, None] * dB[:, None, :] + (B[:, None] * C)[:, :, None] * (2.0 * math.pi * k)[None, None, :])


def _psi_hessian(X, k):
    # psi = prod_j sin^2(k_j pi x_j)
    a = k * math.pi
    f = np.sin(a * X) ** 2
    f1 = a * np.sin(2.0 * a * X)
    f2 = 2.0 * a * a * np.cos(2.0 * a * X)
    n = X.shape[1]
    H = np.empty(X.shape + (n,))
    for j in range(n):
        for m in range(n):
            if j == m:
                H[:, j, j] = f2[:, j] * np.prod(np.delete(f, j, axis=1), axis=1)
            else:
                rest = np.prod(np.delete(f, [j, m], axis=1), axis=1) if n > 2 else 1.0
                H[:, j, m] = f1[:, j] * f1[:, m] * rest
    return H


def _divfree_grad(X, k, d, amp):
    H = _psi_hessian(X, k)
    if X.shape[1] == 2:
        # phi = amp (d2 psi, -d1 psi)
        G = np.empty_like(H)
        G[:, 0, :] = H[:, 1, :]
        G[:, 1, :] = -H[:, 0, :]
        return amp * G
    # phi = amp curl(psi d) = amp grad(psi) x d ; d_j phi_i = eps_ikl H_kj d_l
    G = np.empty_like(H)
    G[:, 0, :] = H[:, 1, :] * d[2] - H[:, 2, :] * d[1]
    G[:, 1, :] = H[:, 2, :] * d[0] - H[:, 0, :] * d[2]
    G[:, 2, :] = H[:, 0, :] * d[1] - H[:, 1, :] * d[0]
    return amp * G


def perturbation_gradient(spec: PerturbationSpec, X: np.ndarray) -> np.ndarray:
    dim = X.shape[1]
    k = _freqs(spec, dim)
    v = _vector(spec, dim)
    if spec.family == "bump":
        return _bump_grad(X, k, v, spec.amp, 0.75 if spec.truncated else 1.0)
    if spec.family == "trig":
        return _trig_grad(X, k, v, spec.amp)
    return _divfree_grad(X, k, v, spec.amp)


@dataclass
class DeformationField:
    dim: int
    lam: float
    resolution: int
    order: int
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    grads: np.ndarray = field(repr=False)
    spec: Optional[PerturbationSpec] = None
    boundary_compatible: bool = True
    volume: float = 1.0

    def integrate(self, values) -> float:
        values = np.asarray(values, dtype=float)
        return float(np.sum(self.weights * values))

    def integrate_tensor(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        return np.tensordot(self.weights, values, axes=(0, 0))


def make_field(spec: Optional[PerturbationSpec], lam: float, resolution: int, dim: int = 2,
               admissible: bool = True, order: int = 4) -> DeformationField:
    """Field ``lam x + phi`` sampled at composite Gauss-Legendre nodes.

    ``spec=None`` gives the homogeneous map.  With ``admissible=True`` a node
    with ``det grad u <= 0`` raises :class:`AdmissibilityError`.
    """
    if dim not in (2, 3):
        raise ValueError("dim must be 2 or 3")
    if resolution < MIN_RESOLUTION:
        raise ValueError(f"resolution must be at least {MIN_RESOLUTION}")
    X, W = tensor_rule(resolution, order, dim)
    G = np.broadcast_to(lam * np.eye(dim), (X.shape[0], dim, dim)).copy()
    if spec is not None and spec.amp != 0:
        G += perturbation_gradient(spec, X)
    if admissible:
        d = svcalc.det(G)
        if np.any(d <= 0):
            raise AdmissibilityError(f"det grad u <= 0 at {int(np.sum(d <= 0))} nodes (min {float(d.min()):.3g})")
    compatible = spec is None or not spec.truncated
    return DeformationField(dim, float(lam), resolution, order, X, W, G, spec, compatible)


def energy(fld: DeformationField, material) -> float:
    return fld.integrate(energy_density(material, fld.grads))


def homogeneous_energy(fld: DeformationField, material) -> float:
    return float(energy_density(material, fld.lam * np.eye(fld.dim))) * fld.volume


def delta(fld: DeformationField, material) -> float:
    return energy(fld, material) - homogeneous_energy(fld, material)


def _perturbation_norm(fld):
    D = fld.grads - fld.lam * np.eye(fld.dim)
    return np.sqrt(np.sum(D * D, axis=(-2, -1)))


def lhs_rig1_2d(fld: DeformationField, q: float) -> float:
    t = _perturbation_norm(fld)
    return fld.integrate(np.minimum(t * t, t**q))


def curl_div_2d(fld: DeformationField):
    return svcalc.antitrace(fld.grads), svcalc.tr(fld.grads)


def lhs_rig2_2d(fld: DeformationField) -> float:
    curl, div = curl_div_2d(fld)
    return fld.integrate(svcalc.psi(curl, div, fld.lam))


def lhs_rig_3d(fld: DeformationField, q: float) -> float:
    return fld.integrate(_perturbation_norm(fld) ** q)


def jacobian_deficit(fld: DeformationField) -> float:
    return fld.integrate(svcalc.det(fld.grads) - fld.lam**fld.dim)


@dataclass(frozen=True)
class NullLagrangianReport:
    grad: float
    det: float
    cof: Optional[float]
    volume: float

    def ok(self, tol_per_volume: float = 1e-8) -> bool:
        vals = [self.grad, self.det] + ([self.cof] if self.cof is not None else [])
        return max(vals) <= tol_per_volume * self.volume


def null_lagrangian_check(fld: DeformationField) -> NullLagrangianReport:
    eye = fld.lam * np.eye(fld.dim)
    g = float(np.max(np.abs(fld.integrate_tensor(fld.grads - eye))))
    d = abs(jacobian_deficit(fld))
    c = None
    if fld.dim == 3:
        c = float(np.max(np.abs(fld.integrate_tensor(svcalc.cof(fld.grads) - svcalc.cof(eye)))))
    return NullLagrangianReport(g, d, c, fld.volume)


@dataclass
class FieldReport:
    I_u: float
    I_ulambda: float
    delta: float
    lhs_rig: float
    g_integral: float
    psi_integral: float
    G1_integral: float
    G2_integral: float
    jacobian_deficit: float
    trace_excess: float
    c0: Optional[float] = None

    @property
    def tolerance(self) -> float:
        return 1e-6 * (1.0 + abs(self.delta))

    @property
    def chain_upper_ok(self) -> bool:
        return self.delta >= self.G1_integral + self.G2_integral - self.tolerance

    @property
    def chain_lower_ok(self) -> bool:
        return self.G1_integral + self.G2_integral >= -self.tolerance

    @property
    def excess_ok(self) -> bool:
        return self.trace_excess >= self.psi_integral - self.tolerance

    @property
    def c0_ok(self) -> bool:
        return self.c0 is not None and self.G1_integral >= self.c0 * self.g_integral - self.tolerance

    @property
    def slack(self) -> float:
        return self.delta - self.G1_integral - self.G2_integral

    def row(self) -> dict:
        return {k: getattr(self, k) for k in CSV_COLUMNS}


CSV_COLUMNS = ["I_u", "I_ulambda", "delta", "lhs_rig", "g_integral", "psi_integral",
               "G1_integral", "G2_integral", "jacobian_deficit", "trace_excess", "c0"]


def decomposition_check_2d(fld: DeformationField, material: Material2D, constants: str = "stated") -> FieldReport:
    """All terms of the 2D energy chain for one field, evaluated nodewise from singular values."""
    if fld.dim != 2:
        raise ValueError("decomposition_check_2d needs a 2D field")
    d = svcalc.det(fld.grads)
    if np.any(d <= 0):
        raise AdmissibilityError("field is not admissible (det <= 0)")
    lam, q = fld.lam, material.q
    Y = float(material.law.hprime(lam * lam))
    sv = svcalc.singular_values(fld.grads)
    dist = np.sqrt(np.sum((sv - lam) ** 2, axis=-1))
    f = lemma_factor(q, constants) * little_f(dist, math.sqrt(2.0) * lam, q)
    l1, l2 = sv[:, 0] - lam, sv[:, 1] - lam
    G1 = f + Y * l1 * l2
    trace_ex = sv[:, 0] + sv[:, 1] - 2.0 * lam
    G2 = lam * Y * trace_ex
    I_u = energy(fld, material)
    I_l = homogeneous_energy(fld, material)
    try:
        c0 = c0_lower_bound(lam, material, constants)
    except ConditionNotStrict:
        c0 = None
    return FieldReport(
        I_u=I_u,
        I_ulambda=I_l,
        delta=I_u - I_l,
        lhs_rig=lhs_rig1_2d(fld, q),
        g_integral=fld.integrate(g_growth(dist, q)),
        psi_integral=lhs_rig2_2d(fld),
        G1_integral=fld.integrate(G1),
        G2_integral=fld.integrate(G2),
        jacobian_deficit=jacobian_deficit(fld),
        trace_excess=fld.integrate(trace_ex),
        c0=c0,
    )


def trace_integral(fld: DeformationField) -> float:
    """``int sum_i sigma_i``; at least ``n lam |Omega|`` for compatible admissible fields."""
    return fld.integrate(np.sum(svcalc.singular_values(fld.grads), axis=-1))


def quadrature_error_estimate(spec, lam: float, resolution: int, material, dim: int = 2) -> float:
    """``|I_4 - I_6|``: energy difference between Gauss-Legendre orders 4 and 6."""
    e4 = energy(make_field(spec, lam, resolution, dim, order=4), material)
    e6 = energy(make_field(spec, lam, resolution, dim, order=6), material)
    return abs(e4 - e6)


# --- excess identity -------------------------------------------------------------

def _path_min_phi_sq(D: np.ndarray, lam: float) -> float:
    # phi2(lam I + s D)^2 = (2 lam + s tr D)^2 + s^2 atr(D)^2, a convex quadratic in s
    a = float(svcalc.tr(D))
    b = float(svcalc.antitrace(D))
    A = a * a + b * b
    cands = [0.0, 1.0]
    if A > 0:
        s = -2.0 * lam * a / A
        if 0.0 < s < 1.0:
            cands.append(s)
    return min((2.0 * lam + s * a) ** 2 + (s * b) ** 2 for s in cands)


def path_det_min(xi: np.ndarray, lam: float) -> float:
    """``min_{s in [0,1]} det(lam I + s (xi - lam I))``."""
    D = np.asarray(xi, dtype=float) - lam * np.eye(2)
    t, d = float(svcalc.tr(D)), float(svcalc.det(D))
    cands = [0.0, 1.0]
    if d != 0:
        s = -lam * t / (2.0 * d)
        if 0.0 < s < 1.0:
            cands.append(s)
    return min(lam * lam + s * lam * t + s * s * d for s in cands)


def excess_identity_check(xi, lam: float, tol: float = 1e-8) -> float:
    """Residual of ``phi(xi) = phi(lam I) + tr(xi - lam I) + int_0^1 (1-s) X(omega(s)) ds``."""
    xi = np.asarray(xi, dtype=float).reshape(2, 2)
    D = xi - lam * np.eye(2)
    if _path_min_phi_sq(D, lam) <= tol:
        raise DegeneratePathError("phi2 vanishes on the segment from lam I to xi")
    eye = lam * np.eye(2)

    def integrand(s):
        return (1.0 - s) * float(svcalc.excess_integrand_X(eye + s * D, D))

    val, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)
    lhs = float(svcalc.phi2(xi))
    rhs = 2.0 * lam + float(svcalc.tr(D)) + val
    return abs(lhs - rhs)


def sample_excess_identity(n: int, rng: np.random.Generator, lam_range=(0.5, 2.0), scale: float = 1.0):
    """Max residual over ``n`` random ``xi`` whose segment keeps ``det > 0``; returns ``(max, count)``."""
    worst = 0.0
    done = 0
    while done < n:
        lam = float(rng.uniform(*lam_range))
        xi = lam * np.eye(2) + scale * lam * rng.normal(size=(2, 2))
        if path_det_min(xi, lam) <= 1e-3 * lam * lam:
            continue
        worst = max(worst, excess_identity_check(xi, lam))
        done += 1
    return worst, done


# --- radial maps on the unit ball -----------------------------------------------

def radial_map_field(r, dr, dim: int = 2, n_r: int = 64, n_ang: int = 64, order: int = 4):
    """Quadrature samples of ``grad u`` for ``u(x) = r(|x|) x/|x|`` on the unit ball.

    Returns ``(weights, grads)``; used as an independent oracle for radial energies.
    """
    R, wR = composite_rule(n_r, order)
    if dim == 2:
        th = np.arange(n_ang) * (2.0 * math.pi / n_ang)
        wt = np.full(n_ang, 2.0 * math.pi / n_ang)
        RR, TT = np.meshgrid(R, th, indexing="ij")
        W = (wR[:, None] * wt[None, :] * RR).ravel()
        e = np.stack([np.cos(TT).ravel(), np.sin(TT).ravel()], axis=1)
    else:
        ct, wc = _gauss(n_ang)
        ph = np.arange(2 * n_ang) * (math.pi / n_ang)
        wp = np.full(2 * n_ang, math.pi / n_ang)
        RR, CC, PP = np.meshgrid(R, ct, ph, indexing="ij")
        W = (wR[:, None, None] * wc[None, :, None] * wp[None, None, :] * RR**2).ravel()
        st = np.sqrt(1.0 - CC**2)
        e = np.stack([(st * np.cos(PP)).ravel(), (st * np.sin(PP)).ravel(), CC.ravel()], axis=1)
    Rf = RR.ravel()
    rr, drr = r(Rf), dr(Rf)
    P = e[:, :, None] * e[:, None, :]
    G = drr[:, None, None] * P + (rr / Rf)[:, None, None] * (np.eye(dim)[None] - P)
    return W, G


def standard_corpus(lam: float, rng: np.random.Generator, count: int = 20, resolution: int = 32,
                    families=("bump", "trig"), max_freq: int = 3):
    """Seeded admissible 2D test fields; amplitudes are halved until every node has ``det > 0``."""
    out = []
    for i in range(count):
        fam = families[i % len(families)]
        freq = tuple(int(v) for v in rng.integers(1, max_freq + 1, size=2))
        amp = float(rng.uniform(0.02, 0.12)) * lam / max(freq)
        vec = tuple(float(v) for v in rng.normal(size=2))
        while True:
            spec = PerturbationSpec(fam, amp, freq, vec)
            try:
                out.append(make_field(spec, lam, resolution))
                break
            except AdmissibilityError:
                amp *= 0.5
    return out
