"""Targeted minimisation of J over the tangency manifold.

A point x in R^{4n} decodes to an admissible pair (z, b):

* the first 2n reals give a direction u; z = u / rho(u) * r with
  r = rho_floor + (rho_ceiling - rho_floor) * sigmoid(log rho(u)), so the
  radius is squashed into the shell without boundary penalties;
* the last 2n reals give a raw direction that is projected onto the tangent
  hyperplane at z and normalised.

Each restart runs derivative-free simplex descent from its own seeded start.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .criterion import (CriterionEvaluation, ScanReport, evaluate_J, project_tangent, scan,
                        tangency)
from .errors import AllSamplesSingular, DPConvexError, SingularJacobian
from .geometry import DomainSpec, minkowski
from .mappings import MappingSpec, derivatives
from .numerics import make_rng

PENALTY = 1e6
# Jacobians worse conditioned than this count as singular: J blows up near the
# singular set and its value there is dominated by cancellation error
MAX_JACOBIAN_COND = 1e6


@dataclass(frozen=True)
class SearchConfig:
    restarts: int = 50
    iterations: int = 500
    seed: int = 42
    rho_floor: float = 0.05
    rho_ceiling: float = 0.995
    xatol: float = 1e-10
    threads: int = 1

    def __post_init__(self):
        if not 0 < self.rho_floor < self.rho_ceiling < 1:
            raise ValueError("need 0 < rho_floor < rho_ceiling < 1")
        if self.restarts < 1 or self.iterations < 1:
            raise ValueError("restarts and iterations must be positive")


@dataclass
class SearchResult:
    min_j: float
    witness: CriterionEvaluation
    restarts_converged: int
    singular_hits: int
    restarts: int
    evaluations: int


@dataclass
class CampaignReport:
    verdict: str
    min_j: float
    witness: CriterionEvaluation
    scan: ScanReport
    search: SearchResult
    tol: float


def _sigmoid(s: float) -> float:
    if s >= 0:
        return 1.0 / (1.0 + math.exp(-s))
    e = math.exp(s)
    return e / (1.0 + e)


def decode(dom: DomainSpec, cfg: SearchConfig, x):
    """Map 4n reals to an admissible (z, b) with ||b|| = 1."""
    n = dom.n
    x = np.asarray(x, dtype=float)
    u = x[:n] + 1j * x[n:2 * n]
    ru = minkowski(dom, u).rho
    if ru == 0.0:
        raise DPConvexError("direction vanishes")
    r = cfg.rho_floor + (cfg.rho_ceiling - cfg.rho_floor) * _sigmoid(math.log(ru))
    z = u * (r / ru)
    b = project_tangent(tangency(dom, z, r), x[2 * n:3 * n] + 1j * x[3 * n:])
    nb = float(np.linalg.norm(b))
    if nb == 0.0:
        raise DPConvexError("projected direction vanishes")
    return z, b / nb


def encode(dom: DomainSpec, cfg: SearchConfig, z, b) -> np.ndarray:
    """A preimage of (z, b) under ``decode``, with rho(z) clipped into the shell."""
    z = np.asarray(z, dtype=complex)
    b = np.asarray(b, dtype=complex)
    r = minkowski(dom, z).rho
    width = cfg.rho_ceiling - cfg.rho_floor
    q = min(max((r - cfg.rho_floor) / width, 1e-6), 1 - 1e-6)
    u = z / r * math.exp(math.log(q / (1 - q)))
    return np.concatenate([u.real, u.imag, b.real, b.imag])


def _random_start(dom, rng):
    """Gaussian start whose decoded radius is uniform across the shell."""
    n = dom.n
    x = rng.standard_normal(4 * n)
    q = rng.uniform(0.02, 0.98)
    u = x[:2 * n]
    x[:2 * n] = u * (math.exp(math.log(q / (1 - q))) / minkowski(dom, u[:n] + 1j * u[n:]).rho)
    return x


def _run_restart(dom, spec, cfg, x0):
    best = [math.inf, None]
    singular = [0]

    def objective(x):
        try:
            z, b = decode(dom, cfg, x)
            if np.linalg.cond(derivatives(spec, z).jacobian) > MAX_JACOBIAN_COND:
                raise SingularJacobian("ill-conditioned Jacobian")
            ev = evaluate_J(dom, spec, z, b)
        except SingularJacobian:
            singular[0] += 1
            return PENALTY
        except DPConvexError:
            return PENALTY
        if ev.j_value < best[0]:
            best[0], best[1] = ev.j_value, ev
        return ev.j_value

    res = minimize(objective, x0, method="Nelder-Mead",
                   options={"maxiter": cfg.iterations, "xatol": cfg.xatol, "fatol": 1e-14,
                            "adaptive": True})
    return best[0], best[1], bool(res.success), singular[0], int(res.nfev)


def minimize_J(dom: DomainSpec, spec: MappingSpec, cfg: SearchConfig = SearchConfig(),
               starts=None) -> SearchResult:
    """Lowest J found by multi-start simplex descent.

    ``starts`` optionally supplies (z, b) pairs used as the first restarts;
    the remaining restarts start from random points, radius uniform in the
    shell, drawn with generators derived from (seed, restart index).  Ties go to the lowest index.
    """
    dom.require_theorem_exponents()
    x0s = [encode(dom, cfg, z, b) for z, b in (starts or [])]
    for i in range(len(x0s), max(cfg.restarts, len(x0s))):
        x0s.append(_random_start(dom, make_rng(cfg.seed, i)))

    run = lambda x0: _run_restart(dom, spec, cfg, x0)
    if cfg.threads > 1 and len(x0s) > 1:
        with ThreadPoolExecutor(max_workers=min(cfg.threads, len(x0s))) as pool:
            outs = list(pool.map(run, x0s))
    else:
        outs = [run(x0) for x0 in x0s]

    found = [(o[0], i) for i, o in enumerate(outs) if o[1] is not None]
    if not found:
        raise AllSamplesSingular("every objective evaluation hit a singular Jacobian")
    _, idx = min(found)
    return SearchResult(
        min_j=outs[idx][0], witness=outs[idx][1],
        restarts_converged=sum(o[2] for o in outs), singular_hits=sum(o[3] for o in outs),
        restarts=len(x0s), evaluations=sum(o[4] for o in outs))


def certify_campaign(dom: DomainSpec, spec: MappingSpec, budget: int = 10_000, seed: int = 42,
                     tol: float = 1e-8, rho_floor: float = 0.3, threads: int = 1) -> CampaignReport:
    """Scan with 90% of ``budget`` evaluations, then polish the 10 worst samples.

    The verdict is "violation" only for an evaluated admissible witness with
    J < -tol; otherwise "no violation found", which is evidence, not proof.
    """
    if budget < 1000:
        raise ValueError("budget must be at least 1000")
    scan_samples = (budget * 9) // 10
    rep = scan(dom, spec, samples=scan_samples, seed=seed, rho_floor=rho_floor, tol=tol,
               threads=threads, keep=10)
    starts = [(ev.z, ev.b) for ev in rep.worst]
    per_start = max(1, (budget - scan_samples) // len(starts))
    cfg = SearchConfig(restarts=len(starts), iterations=per_start, seed=seed, threads=threads)
    res = minimize_J(dom, spec, cfg, starts=starts)
    if res.min_j < rep.min_j:
        min_j, witness = res.min_j, res.witness
    else:
        min_j, witness = rep.min_j, rep.witness
    verdict = "violation" if min_j < -tol else "no violation found"
    return CampaignReport(verdict, min_j, witness, rep, res, tol)
