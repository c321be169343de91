"""Fixed-size (2x2, 3x3) matrix and singular-value calculus.

Every function here is vectorized over leading axes: a "matrix" argument is an
array of shape ``(..., n, n)`` with ``n`` in ``{2, 3}`` and results carry the
same leading shape.  Singular values are returned in nondecreasing order.
"""

from __future__ import annotations

import numpy as np

# radicands this close to zero (from below) are rounding noise
RADICAND_CLAMP = 1e-12
# normalized cubic discriminant below which the trig solve hands over to Jacobi
DISCRIMINANT_TOL = 1e-12
JACOBI_SWEEPS = 50


class DegenerateDenominator(ArithmeticError):
    """Raised when a quotient's denominator vanishes to working tolerance."""


def _as_mats(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2] or M.shape[-1] not in (2, 3):
        raise ValueError(f"expected (..., n, n) with n in {{2, 3}}, got shape {M.shape}")
    return M


def _safe_sqrt(x):
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.where((x < 0) & (x >= -RADICAND_CLAMP), 0.0, x))


def det(M) -> np.ndarray:
    M = _as_mats(M)
    if M.shape[-1] == 2:
        return M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]
    return (
        M[..., 0, 0] * (M[..., 1, 1] * M[..., 2, 2] - M[..., 1, 2] * M[..., 2, 1])
        - M[..., 0, 1] * (M[..., 1, 0] * M[..., 2, 2] - M[..., 1, 2] * M[..., 2, 0])
        + M[..., 0, 2] * (M[..., 1, 0] * M[..., 2, 1] - M[..., 1, 1] * M[..., 2, 0])
    )


def tr(M) -> np.ndarray:
    M = _as_mats(M)
    return np.trace(M, axis1=-2, axis2=-1)


def cof(M) -> np.ndarray:
    """Cofactor matrix, so that ``M @ cof(M).T == det(M) * I``."""
    M = _as_mats(M)
    C = np.empty_like(M)
    if M.shape[-1] == 2:
        C[..., 0, 0] = M[..., 1, 1]
        C[..., 0, 1] = -M[..., 1, 0]
        C[..., 1, 0] = -M[..., 0, 1]
        C[..., 1, 1] = M[..., 0, 0]
        return C
    for i in range(3):
        i1, i2 = (i + 1) % 3, (i + 2) % 3
        for j in range(3):
            j1, j2 = (j + 1) % 3, (j + 2) % 3
            C[..., i, j] = M[..., i1, j1] * M[..., i2, j2] - M[..., i1, j2] * M[..., i2, j1]
    return C


def adj(M) -> np.ndarray:
    return np.swapaxes(cof(M), -1, -2)


def frob(M) -> np.ndarray:
    """Euclidean (Frobenius) norm ``|M| = sqrt(M . M)``."""
    M = np.asarray(M, dtype=float)
    return np.sqrt(np.sum(M * M, axis=(-2, -1)))


def _singular_values_2x2(M: np.ndarray) -> np.ndarray:
    amax = np.max(np.abs(M), axis=(-2, -1))
    unit = np.where(amax > 0, amax, 1.0)
    M = M / unit[..., None, None]
    n2 = np.sum(M * M, axis=(-2, -1))
    d = np.abs(det(M))
    s_sum = _safe_sqrt(n2 + 2.0 * d)
    s_diff = _safe_sqrt(n2 - 2.0 * d)
    return unit[..., None] * np.stack([0.5 * (s_sum - s_diff), 0.5 * (s_sum + s_diff)], axis=-1)


def _jacobi_eigvalsh_3x3(C: np.ndarray) -> np.ndarray:
    """Cyclic Jacobi eigenvalues of a stack of symmetric 3x3 matrices (ascending)."""
    A = C.copy()
    scale = np.sum(A * A, axis=(-2, -1)) + np.finfo(float).tiny
    for _ in range(JACOBI_SWEEPS):
        off = A[:, 0, 1] ** 2 + A[:, 0, 2] ** 2 + A[:, 1, 2] ** 2
        if np.all(off <= 1e-32 * scale):
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = A[:, p, q]
            active = np.abs(apq) > 0.0
            if not np.any(active):
                continue
            # a negligible apq overflows theta to inf, which correctly yields t = 0
            with np.errstate(over="ignore"):
                theta = np.where(active, (A[:, q, q] - A[:, p, p]) / (2.0 * np.where(active, apq, 1.0)), 0.0)
                t = np.where(active, np.sign(theta + (theta == 0)) / (np.abs(theta) + np.sqrt(theta * theta + 1.0)), 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            # A <- J^T A J with J the (p, q) Givens rotation
            Ap = A[:, :, p].copy()
            Aq = A[:, :, q].copy()
            A[:, :, p] = c[:, None] * Ap - s[:, None] * Aq
            A[:, :, q] = s[:, None] * Ap + c[:, None] * Aq
            Ap = A[:, p, :].copy()
            Aq = A[:, q, :].copy()
            A[:, p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[:, q, :] = s[:, None] * Ap + c[:, None] * Aq
    return np.sort(np.stack([A[:, 0, 0], A[:, 1, 1], A[:, 2, 2]], axis=-1), axis=-1)


def _singular_values_3x3(M: np.ndarray) -> np.ndarray:
    lead = M.shape[:-2]
    Mf = M.reshape(-1, 3, 3)
    # singular values are 1-homogeneous; rescaling keeps the cubic clear of under/overflow
    amax = np.max(np.abs(Mf), axis=(1, 2))
    unit = np.where(amax > 0, amax, 1.0)
    Mf = Mf / unit[:, None, None]
    C = np.einsum("kji,kjl->kil", Mf, Mf)
    m = np.trace(C, axis1=1, axis2=2) / 3.0
    K = C - m[:, None, None] * np.eye(3)
    p2 = np.sum(K * K, axis=(1, 2)) / 6.0
    p = np.sqrt(p2)
    half_det = det(K) / 2.0
    safe_p = np.where(p > 0, p, 1.0)
    r = np.clip(half_det / safe_p**3, -1.0, 1.0)
    ang = np.arccos(r) / 3.0
    e_hi = m + 2.0 * p * np.cos(ang)
    e_lo = m + 2.0 * p * np.cos(ang + 2.0 * np.pi / 3.0)
    e_mid = 3.0 * m - e_hi - e_lo
    eig = np.stack([e_lo, e_mid, e_hi], axis=-1)

    scale = m * m + np.finfo(float).tiny
    near_repeated = (1.0 - r * r <= DISCRIMINANT_TOL) | (p2 <= 1e-24 * scale)
    if np.any(near_repeated):
        eig[near_repeated] = _jacobi_eigvalsh_3x3(C[near_repeated])

    sv = _safe_sqrt(np.maximum(eig, -RADICAND_CLAMP))
    sv = np.sort(sv, axis=-1)
    # smallest value from |det| keeps the product exact where the cubic loses digits
    top = sv[:, 1] * sv[:, 2]
    ok = top > 0
    s1 = np.where(ok, np.abs(det(Mf)) / np.where(ok, top, 1.0), sv[:, 0])
    sv[:, 0] = np.minimum(s1, sv[:, 1])
    sv *= unit[:, None]
    return sv.reshape(lead + (3,))


def singular_values(M) -> np.ndarray:
    """Ordered singular values ``0 <= s_1 <= ... <= s_n`` of each matrix in ``M``.

    The 2x2 case is closed form in ``|M|^2`` and ``det M``.  The 3x3 case solves
    the characteristic cubic of ``M^T M`` trigonometrically and falls back to
    Jacobi sweeps where two eigenvalues (nearly) coincide.
    """
    M = _as_mats(M)
    if M.shape[-1] == 2:
        return _singular_values_2x2(M)
    return _singular_values_3x3(M)


def phi2(xi) -> np.ndarray:
    """``sqrt(|xi|^2 + 2 det xi)`` for 2x2 ``xi``; the singular-value sum when det >= 0."""
    xi = _as_mats(xi)
    if xi.shape[-1] != 2:
        raise ValueError("phi2 is defined for 2x2 matrices")
    rad = np.sum(xi * xi, axis=(-2, -1)) + 2.0 * det(xi)
    return _safe_sqrt(rad)


def dist_to_scaled_rotations(F, lam: float) -> np.ndarray:
    """Euclidean distance between the spectrum of ``F`` and ``(lam, ..., lam)``.

    For ``det F >= 0`` this equals ``dist(F, lam SO(n))``; it never exceeds
    ``|F - lam I|``.
    """
    sv = singular_values(F)
    return np.sqrt(np.sum((sv - lam) ** 2, axis=-1))


def antitrace(eta) -> np.ndarray:
    eta = _as_mats(eta)
    if eta.shape[-1] != 2:
        raise ValueError("antitrace is defined for 2x2 matrices")
    return eta[..., 0, 1] - eta[..., 1, 0]


def excess_integrand_X(omega, D, tol: float = 1e-12) -> np.ndarray:
    """Second derivative of ``s -> phi2(omega + s D)``, written via antitraces.

    Raises :class:`DegenerateDenominator` if ``phi2(omega) <= tol`` anywhere.
    """
    omega = _as_mats(omega)
    D = _as_mats(D)
    den = phi2(omega)
    if np.any(den <= tol):
        raise DegenerateDenominator(f"phi2(omega) <= {tol}")
    num = antitrace(omega) * tr(D) - antitrace(D) * tr(omega)
    return num * num / den**3


def psi(curl, div, lam: float) -> np.ndarray:
    """Pointwise excess density in terms of curl and divergence samples."""
    curl = np.asarray(curl, dtype=float)
    div = np.asarray(div, dtype=float)
    c2 = curl * curl
    den = c2 + np.maximum(4.0 * lam * lam, div * div)
    return 2.0 * lam * lam * c2 / (3.0 * den**1.5)
