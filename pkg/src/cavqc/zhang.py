"""Growth constants for ``|A|^q``: the 2D two-branch lower bound and the 3D kappa.

For ``1 < q < 2`` and ``0 < |A| <= M``::

    |A+B|^q - |A|^q - q |A|^(q-2) A.B  >=  C1(M,q) |B|^2   if |B| <= M
                                        >=  C2(q)   |B|^q   if |B| >= M

For ``2 < q < 3`` the excess is bounded below by ``kappa |B|^q`` with
``2^(2-q) <= kappa <= q 2^(1-q)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .search import golden_section_min
from .svcalc import frob


def c1(M, q):
    return 1.0 / (2.0 * (2.0 * np.asarray(M, dtype=float)) ** (2.0 - q))


def c2(q):
    return 1.0 / (2.0 * 2.0 ** (2.0 - np.asarray(q, dtype=float)))


def c2_original(q):
    """The older, smaller constant ``1 / (2 * 3^(2-q))``."""
    return 1.0 / (2.0 * 3.0 ** (2.0 - np.asarray(q, dtype=float)))


def little_f(t, M, q):
    """``min(C1 t^2, C2 t^q)``: quadratic up to ``t = M``, then ``q``-growth."""
    t = np.asarray(t, dtype=float)
    return np.minimum(c1(M, q) * t * t, c2(q) * t**q)


def _two_branch(t, M, q):
    t = np.asarray(t, dtype=float)
    return np.where(t <= M, c1(M, q) * t * t, c2(q) * t**q)


def big_F(B, M, q):
    """Piecewise lower bound as a function of the matrix ``B``; switches at ``|B| = M``."""
    return _two_branch(frob(B), M, q)


def zhang_excess(A, B, q):
    """``|A+B|^q - |A|^q - q |A|^(q-2) A.B`` for stacks of matrices."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    nA = frob(A)
    dot = np.sum(A * B, axis=(-2, -1))
    return frob(A + B) ** q - nA**q - q * nA ** (q - 2.0) * dot


def verify_zhang(A, B, q, factor: float = 1.0):
    """Residual of the two-branch inequality with ``M := |A|`` (nonnegative if it holds).

    ``factor`` scales both constants of the lower bound.
    """
    M = frob(A)
    return zhang_excess(A, B, q) - factor * big_F(B, M, q)


def sample_zhang(q: float, n: int, rng: np.random.Generator, dim: int = 2, chunk: int = 20000,
                 factor: float = 1.0):
    """Brute-force sample of the residual; returns ``(min_residual, A, B)`` at the minimum.

    ``|B|/|A|`` is log-uniform on ``[1e-3, 1e3]``, directions are uniform on the
    sphere of ``dim x dim`` matrices and ``|A|`` is log-uniform on ``[0.5, 2]``
    (the residual is homogeneous of degree ``q``).
    """
    best = (np.inf, None, None)
    done = 0
    while done < n:
        k = min(chunk, n - done)
        dA = rng.normal(size=(k, dim, dim))
        dB = rng.normal(size=(k, dim, dim))
        dA /= frob(dA)[:, None, None]
        dB /= frob(dB)[:, None, None]
        nA = np.exp(rng.uniform(np.log(0.5), np.log(2.0), size=k))
        ratio = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), size=k))
        A = dA * nA[:, None, None]
        B = dB * (nA * ratio)[:, None, None]
        res = verify_zhang(A, B, q, factor)
        i = int(np.argmin(res))
        if res[i] < best[0]:
            best = (float(res[i]), A[i], B[i])
        done += k
    return best


# --- kappa (3D) ---------------------------------------------------------------

def kappa_lower(q):
    return 2.0 ** (2.0 - np.asarray(q, dtype=float))


def kappa_upper(q):
    q = np.asarray(q, dtype=float)
    return q * 2.0 ** (1.0 - q)


def kappa_affine(q):
    q = np.asarray(q, dtype=float)
    return 3.0 - q + (2.0 - np.sqrt(2.0)) * (q - 2.0)


def kappa_objective(t, c, q):
    """Scaled excess ``((1 + 2ct + t^2)^(q/2) - 1 - q c t) / t^q`` with ``t = |B|/|A|``, ``c = cos``."""
    t = np.asarray(t, dtype=float)
    c = np.asarray(c, dtype=float)
    rad = np.maximum(1.0 + 2.0 * c * t + t * t, 0.0)
    return (rad ** (q / 2.0) - 1.0 - q * c * t) / t**q


def kappa_numeric(q: float, resolution: int = 801, log_t_range=(-6.0, 6.0)):
    """Best constant ``inf_{t>0, |c|<=1}`` of :func:`kappa_objective`; returns ``(kappa, t, c)``.

    A ``resolution x resolution`` grid in ``(log t, c)`` locates the best cell,
    then nested golden-section searches refine within its neighbours.
    """
    if not 2.0 < q < 3.0:
        raise ValueError("kappa is defined here for 2 < q < 3")
    s = np.linspace(*log_t_range, resolution)
    cs = np.linspace(-1.0, 1.0, resolution)
    S, Cg = np.meshgrid(s, cs, indexing="ij")
    V = kappa_objective(np.exp(S), Cg, q)
    i, j = np.unravel_index(int(np.argmin(V)), V.shape)
    s_lo, s_hi = s[max(i - 1, 0)], s[min(i + 1, resolution - 1)]
    c_lo, c_hi = cs[max(j - 1, 0)], cs[min(j + 1, resolution - 1)]

    def inner(c):
        return golden_section_min(lambda u: float(kappa_objective(np.exp(u), c, q)), s_lo, s_hi, tol=1e-13)

    c_best, _ = golden_section_min(lambda c: inner(c)[1], c_lo, c_hi, tol=1e-13)
    u_best, k_best = inner(c_best)
    k_best = min(k_best, float(V[i, j]))
    return float(k_best), float(np.exp(u_best)), float(c_best)


@dataclass(frozen=True)
class KappaEstimate:
    q: float
    lower: float
    upper: float
    numeric: float
    affine: float

    @property
    def affine_error(self) -> float:
        return abs(self.numeric - self.affine)

    @property
    def in_bracket(self) -> bool:
        return self.lower <= self.numeric <= self.upper


def kappa_estimate(q: float, resolution: int = 801) -> KappaEstimate:
    k, _, _ = kappa_numeric(q, resolution)
    return KappaEstimate(q, float(kappa_lower(q)), float(kappa_upper(q)), k, float(kappa_affine(q)))
