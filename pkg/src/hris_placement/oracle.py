"""Exhaustive placement oracle, baseline designs and suboptimality-gap audit."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channels import ChannelSet
from .design import (
    EffectiveChannels,
    HrisDesign,
    SnrBreakdown,
    SystemConfig,
    alternating_solve,
    effective_channels,
    r_max_bound,
    snr,
)

__all__ = [
    "OracleScaleError",
    "BoundViolationError",
    "PlacementCandidate",
    "GapReport",
    "BASELINE_KINDS",
    "exact_coefficients_for_placement",
    "exhaustive_oracle",
    "baseline_design",
    "eta_max_bound",
    "gap_analysis",
]

DEFAULT_MAX_N = 16
DEFAULT_ENUM_CAP = 10**5
GRID_POINTS = 64
REFINE_LEVELS = 2
MAX_SWEEPS = 500

BASELINE_KINDS = ("passive", "fully_active", "no_ris", "arbitrary")


class OracleScaleError(ValueError):
    """Problem too large for exhaustive search."""


class BoundViolationError(AssertionError):
    """The lower/upper SNR bound chain failed on an instance."""


@dataclass(frozen=True)
class PlacementCandidate:
    active_set: tuple
    omega: np.ndarray
    gamma: float


@dataclass(frozen=True)
class GapReport:
    gamma_prop: float
    gamma_opt: float
    gamma_lb: float
    gamma_ub: float
    c_max: float
    epsilon: float
    E: float
    delta: float
    eta_max: float

    @property
    def E_bound(self) -> float:
        return self.epsilon / (1 + self.epsilon)


def _best_on_grid(phi, lo, hi, x0, f0):
    """Grid search for ``phi`` on ``[lo, hi]`` with successive zoom-ins around the best point."""
    best_x, best_f = x0, f0
    a, b = lo, hi
    for _ in range(REFINE_LEVELS + 1):
        xs = np.linspace(a, b, GRID_POINTS)
        vals = phi(xs)
        k = int(np.argmax(vals))
        if vals[k] > best_f:
            best_x, best_f = float(xs[k]), float(vals[k])
        step = (b - a) / (GRID_POINTS - 1)
        a, b = max(lo, best_x - step), min(hi, best_x + step)
    return best_x, best_f


def exact_coefficients_for_placement(
    eff: EffectiveChannels,
    h_ru: np.ndarray,
    active_set: Sequence[int],
    config: SystemConfig,
    max_n: int = DEFAULT_MAX_N,
) -> np.ndarray:
    """Best coefficients for a fixed placement under the exact SNR.

    Phases are co-phased with the direct path, which is optimal because the
    RIS noise does not depend on phase. Active magnitudes ``m_i in [0, eta]``
    maximize ``(K + sum_A m_i |g_i|)^2 / (nu2 sum_A |h_ru,i|^2 m_i^2 + sigma2)``
    by cyclic coordinate ascent on a refining grid, starting from ``m = eta``.
    """
    N = eff.g.shape[0]
    if N > max_n:
        raise OracleScaleError(f"N={N} exceeds the oracle guard N <= {max_n}")
    A = np.asarray(list(active_set), dtype=int)
    mask = np.zeros(N, dtype=bool)
    mask[A] = True
    absg = np.abs(eff.g)
    K = abs(eff.f) + absg[~mask].sum()
    b = absg[A]
    w = config.nu2 * np.abs(h_ru[A]) ** 2
    m = np.full(A.shape[0], float(config.eta))

    for _ in range(MAX_SWEEPS):
        moved = False
        for k in range(A.shape[0]):
            S = K + b @ m - b[k] * m[k]
            D = config.sigma2 + w @ m**2 - w[k] * m[k] ** 2
            bk, wk = b[k], w[k]

            def phi(x):
                return (S + bk * x) ** 2 / (D + wk * x**2)

            cur = float(phi(m[k]))
            x, val = _best_on_grid(phi, 0.0, float(config.eta), m[k], cur)
            if val > cur * (1 + 1e-14):
                m[k] = x
                moved = True
        if not moved:
            break

    omega = np.exp(-1j * (np.angle(eff.g) - np.angle(eff.f)))
    omega[A] *= m
    return omega


def exhaustive_oracle(
    config: SystemConfig,
    channels: ChannelSet,
    p: np.ndarray,
    cap: int = DEFAULT_ENUM_CAP,
    max_n: int = DEFAULT_MAX_N,
) -> PlacementCandidate:
    """Search all ``C(N, L)`` placements for precoder ``p`` and keep the best exact SNR.

    Ties go to the lexicographically smallest active set.
    """
    N, L = config.N, config.L
    count = math.comb(N, L)
    if count > cap:
        raise OracleScaleError(f"C({N},{L}) = {count} placements exceeds the enumeration cap {cap}")
    if N > max_n:
        raise OracleScaleError(f"N={N} exceeds the oracle guard N <= {max_n}")
    eff = effective_channels(channels, p)
    abs_h2 = np.abs(channels.h_ru) ** 2
    best = None
    for A in itertools.combinations(range(N), L):
        omega = exact_coefficients_for_placement(eff, channels.h_ru, A, config, max_n=max_n)
        c = eff.f + omega @ eff.g
        r = config.nu2 * float(np.sum(abs_h2[list(A)] * np.abs(omega[list(A)]) ** 2))
        gamma = config.P_t * abs(c) ** 2 / (r + config.sigma2)
        if best is None or gamma > best.gamma:
            best = PlacementCandidate(active_set=A, omega=omega, gamma=float(gamma))
    return best


def baseline_design(
    kind: str,
    config: SystemConfig,
    channels: ChannelSet,
    seed: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> tuple[HrisDesign, SnrBreakdown]:
    """Reference designs the proposed solver is compared against.

    ``passive`` uses no active elements, ``fully_active`` makes every element
    active, ``no_ris`` ignores the RIS path entirely and ``arbitrary`` draws a
    uniformly random placement of ``L`` active elements (from ``seed`` or
    ``rng``) and then alternates precoder and coefficients with that placement
    frozen. The RIS baselines start from the direct-link MRT precoder.
    """
    N = config.N
    if kind == "no_ris":
        norm = np.linalg.norm(channels.h_bu)
        p = channels.h_bu / norm
        gamma = config.P_t * norm**2 / config.sigma2
        design = HrisDesign(p=p, omega=np.zeros(N, dtype=complex), active_set=())
        return design, SnrBreakdown(
            gamma=gamma, gamma_min=gamma, c_abs=float(norm), r=0.0, r_max=0.0, p_ris=0.0,
            se=float(np.log2(1 + gamma)),
        )

    start = np.zeros(N, dtype=complex)
    if kind == "passive":
        res = alternating_solve(config.replace(L=0), channels, initial_omega=start)
    elif kind == "fully_active":
        res = alternating_solve(config.replace(L=N), channels, initial_omega=start)
    elif kind == "arbitrary":
        if rng is None:
            if seed is None:
                raise ValueError("arbitrary baseline needs a seed or rng")
            rng = np.random.default_rng(seed)
        A = tuple(sorted(int(i) for i in rng.choice(N, size=config.L, replace=False)))
        res = alternating_solve(config, channels, initial_omega=start, fixed_active_set=A)
    else:
        raise ValueError(f"unknown baseline kind {kind!r}; expected one of {BASELINE_KINDS}")
    return res.design, res.breakdown


def eta_max_bound(h_ru: np.ndarray, L: int, delta: float, sigma2: float, nu2: float) -> float:
    """Largest amplification for which the normalized gap stays below ``delta``.

    Returns ``inf`` when there is no RIS noise (``L == 0`` or ``nu2 == 0``).
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if L == 0 or nu2 == 0:
        return math.inf
    top = r_max_bound(h_ru, L, 1.0, 1.0)
    if top == 0:
        return math.inf
    return math.sqrt(delta * sigma2 / ((1 - delta) * nu2 * top))


def gap_analysis(
    config: SystemConfig,
    channels: ChannelSet,
    delta: float,
    cap: int = DEFAULT_ENUM_CAP,
    max_n: int = DEFAULT_MAX_N,
    rtol: float = 1e-9,
) -> GapReport:
    """Compare the proposed design with the exhaustive oracle at the same precoder.

    The RIS power budget is treated as inactive here (the bounds assume
    full-gain active elements).

    Raises
    ------
    BoundViolationError
        If ``gamma_lb <= gamma_prop <= gamma_opt <= gamma_ub`` or
        ``E <= eps / (1 + eps)`` fails beyond ``rtol``.
    """
    res = alternating_solve(config, channels, enforce_power=False)
    p = res.design.p
    gamma_prop = res.breakdown.gamma
    gamma_opt = exhaustive_oracle(config, channels, p, cap=cap, max_n=max_n).gamma

    eff = effective_channels(channels, p)
    mags = np.sort(np.abs(eff.g))[::-1]
    L = config.L
    amp = abs(eff.f) + config.eta * mags[:L].sum() + mags[L:].sum()
    c_max = config.P_t * amp**2
    r_max = r_max_bound(channels.h_ru, L, config.eta, config.nu2)
    eps = r_max / config.sigma2
    gamma_ub = c_max / config.sigma2
    gamma_lb = c_max / (config.sigma2 * (1 + eps))
    E = config.sigma2 / c_max * abs(gamma_opt - gamma_prop)
    report = GapReport(
        gamma_prop=float(gamma_prop),
        gamma_opt=float(gamma_opt),
        gamma_lb=float(gamma_lb),
        gamma_ub=float(gamma_ub),
        c_max=float(c_max),
        epsilon=float(eps),
        E=float(E),
        delta=delta,
        eta_max=eta_max_bound(channels.h_ru, L, delta, config.sigma2, config.nu2),
    )
    chain = [("gamma_lb", gamma_lb), ("gamma_prop", gamma_prop), ("gamma_opt", gamma_opt), ("gamma_ub", gamma_ub)]
    for (na, a), (nb, b) in zip(chain, chain[1:]):
        if a > b * (1 + rtol):
            raise BoundViolationError(f"{na} = {a!r} > {nb} = {b!r}")
    if E > report.E_bound + rtol:
        raise BoundViolationError(f"E = {E!r} > eps/(1+eps) = {report.E_bound!r}")
    return report
