"""The domain D_p^n = {z in C^n : sum_j |z_j|^{p_j} < 1} and its Minkowski functional."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidDomain, ZeroPoint
from .numerics import as_complex_vector

RHO_TOL = 1e-12


@dataclass(frozen=True)
class DomainSpec:
    """Dimension ``n`` and exponent vector ``p`` (every p_j > 1)."""

    n: int
    p: tuple

    def __post_init__(self):
        p = tuple(float(v) for v in self.p)
        object.__setattr__(self, "p", p)
        if int(self.n) != self.n or self.n < 1:
            raise InvalidDomain(f"n must be a positive integer, got {self.n!r}")
        if len(p) != self.n:
            raise InvalidDomain(f"p has {len(p)} entries, expected n={self.n}")
        if not all(math.isfinite(v) and v > 1.0 for v in p):
            raise InvalidDomain(f"every exponent must be finite and > 1, got {p}")

    @classmethod
    def ball(cls, n: int, p: float) -> "DomainSpec":
        """Equal-exponent domain B^n_p."""
        return cls(n, (p,) * n)

    @property
    def p_array(self) -> np.ndarray:
        return np.asarray(self.p, dtype=float)

    def require_theorem_exponents(self) -> None:
        """Reject domains outside the p_j >= 2 hypothesis of the convexity criterion."""
        bad = [v for v in self.p if v < 2.0]
        if bad:
            raise InvalidDomain(
                f"the convexity criterion requires every p_j >= 2 (got p={list(self.p)})")


@dataclass(frozen=True)
class RhoResult:
    rho: float
    residual: float


def _defining_sum(w, p, t: float) -> float:
    return math.fsum((wj / t) ** pj for wj, pj in zip(w, p))


def minkowski(dom: DomainSpec, z) -> RhoResult:
    """Minkowski functional rho(z), the unique t > 0 with sum_j |z_j / t|^{p_j} = 1.

    The coordinates are rescaled by m = max_j |z_j| so the root lies in
    [1, n^{1/min p}]; bisection narrows the bracket and Newton steps polish it.
    """
    v = as_complex_vector(z, dom.n)
    absz = [abs(c) for c in v.tolist()]
    m = max(absz)
    if m == 0.0:
        return RhoResult(0.0, 0.0)
    pairs = [(a / m, pj) for a, pj in zip(absz, dom.p) if a > 0.0]
    w = [a for a, _ in pairs]
    p = [pj for _, pj in pairs]

    lo, hi = 1.0, float(len(w)) ** (1.0 / min(p))
    t = 1.0
    if hi > lo:
        for _ in range(8):
            mid = 0.5 * (lo + hi)
            if _defining_sum(w, p, mid) > 1.0:
                lo = mid
            else:
                hi = mid
        t = 0.5 * (lo + hi)
        for _ in range(30):
            wp = [(wj / t) ** pj for wj, pj in zip(w, p)]
            g = math.fsum(wp) - 1.0
            if g > 0:
                lo = t
            else:
                hi = t
            t_new = t + g * t / math.fsum(pj * x for pj, x in zip(p, wp))
            if not lo <= t_new <= hi:
                t_new = 0.5 * (lo + hi)
            converged = abs(t_new - t) <= 1e-3 * RHO_TOL * t
            t = t_new
            if converged:
                break
    return RhoResult(m * t, _defining_sum(w, p, t) - 1.0)


def rho(dom: DomainSpec, z) -> float:
    return minkowski(dom, z).rho


def rho_bar_gradient(dom: DomainSpec, z, rho_value: float | None = None) -> np.ndarray:
    """Conjugate-Wirtinger gradient d rho / d conj(z).

    Component l is p_l |z_l|^{p_l} / (2 conj(z_l) rho^{p_l-1} sum_j p_j |z_j/rho|^{p_j}),
    written as p_l |z_l|^{p_l-2} z_l / (...) so that z_l = 0 gives exactly 0.
    """
    zs = as_complex_vector(z, dom.n).tolist()
    r = minkowski(dom, zs).rho if rho_value is None else rho_value
    if r == 0.0:
        raise ZeroPoint("rho_bar_gradient is undefined at z = 0")
    absz = [abs(c) for c in zs]
    weight_sum = math.fsum(pj * (a / r) ** pj for a, pj in zip(absz, dom.p))
    return np.array([
        pj * a ** (pj - 2.0) * c / (2.0 * r ** (pj - 1.0) * weight_sum) if a > 0.0 else 0j
        for c, a, pj in zip(zs, absz, dom.p)], dtype=complex)


def contains(dom: DomainSpec, z) -> bool:
    """Strict membership: sum_j |z_j|^{p_j} < 1."""
    zs = as_complex_vector(z, dom.n).tolist()
    return math.fsum(abs(c) ** pj for c, pj in zip(zs, dom.p)) < 1.0


def sample_interior(dom: DomainSpec, rng: np.random.Generator, rho_floor: float = 0.3) -> np.ndarray:
    """Random interior point with rho uniform on (rho_floor, 1).

    The direction is a normalised complex Gaussian draw, so the law is not
    volume-uniform; it deliberately favours the shell near the boundary.
    """
    if not 0.0 <= rho_floor < 1.0:
        raise ValueError(f"rho_floor must lie in [0, 1), got {rho_floor}")
    while True:
        parts = rng.standard_normal(2 * dom.n)
        u = parts[:dom.n] + 1j * parts[dom.n:]
        ru = minkowski(dom, u).rho
        r = rho_floor + (1.0 - rho_floor) * rng.random()
        if ru == 0.0 or r <= rho_floor:
            continue
        z = u * (r / ru)
        # rho(z) = r by homogeneity; membership guards the rounding at r ~ 1
        if contains(dom, z):
            return z
