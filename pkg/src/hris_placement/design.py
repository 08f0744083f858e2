"""Joint precoder / coefficient / placement design for a hybrid RIS.

All quantities are linear. For a fixed precoder ``p`` the received signal
amplitude is ``c = f + omega^T g`` with ``f = h_bu^H p`` and
``g_i = conj(h_ru[i]) * (H_br p)[i]``; everything below is phrased in terms
of these effective channels.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .channels import ChannelSet

__all__ = [
    "SystemConfig",
    "EffectiveChannels",
    "HrisDesign",
    "SnrBreakdown",
    "SolveResult",
    "InfeasibleDesignError",
    "DegenerateChannelError",
    "overall_channel",
    "mrt_precoder",
    "effective_channels",
    "optimal_placement",
    "optimal_coefficients",
    "ris_noise_power",
    "r_max_bound",
    "snr",
    "ris_power",
    "enforce_ris_power",
    "alternating_solve",
]

# slack used when checking |omega_i| and ||p|| constraints
FEAS_TOL = 1e-9


class InfeasibleDesignError(ValueError):
    pass


class DegenerateChannelError(ValueError):
    pass


@dataclass(frozen=True)
class SystemConfig:
    """Scalar system parameters, all linear (powers in mW, ``eta`` as amplitude)."""

    M: int = 8
    N: int = 100
    L: int = 20
    eta: float = 10 ** (10 / 20)
    P_t: float = 10.0
    P_ris_max: float = 1.0
    sigma2: float = 1e-8
    nu2: float = 1e-8
    max_iter: int = 50
    conv_tol: float = 1e-8

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise ValueError(f"M and N must be positive, got M={self.M}, N={self.N}")
        if not 0 <= self.L <= self.N:
            raise ValueError(f"need 0 <= L <= N, got L={self.L}, N={self.N}")
        if not self.eta >= 1:
            raise ValueError(f"eta must be >= 1, got {self.eta}")
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be > 0, got {self.sigma2}")
        if not self.nu2 >= 0:
            raise ValueError(f"nu2 must be >= 0, got {self.nu2}")
        if not self.P_t > 0:
            raise ValueError(f"P_t must be > 0, got {self.P_t}")
        if not self.P_ris_max >= 0:
            raise ValueError(f"P_ris_max must be >= 0, got {self.P_ris_max}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class EffectiveChannels:
    f: complex
    g: np.ndarray


@dataclass(frozen=True)
class HrisDesign:
    p: np.ndarray
    omega: np.ndarray
    active_set: tuple

    def __post_init__(self):
        object.__setattr__(self, "active_set", tuple(int(i) for i in self.active_set))

    @property
    def active_mask(self) -> np.ndarray:
        mask = np.zeros(self.omega.shape[0], dtype=bool)
        mask[list(self.active_set)] = True
        return mask


@dataclass(frozen=True)
class SnrBreakdown:
    gamma: float
    gamma_min: float
    c_abs: float
    r: float
    r_max: float
    p_ris: float
    se: float


class SolveResult(NamedTuple):
    design: HrisDesign
    breakdown: SnrBreakdown
    trace: list
    converged: bool


def overall_channel(channels: ChannelSet, omega: np.ndarray) -> np.ndarray:
    """Row vector ``h^H = h_bu^H + h_ru^H diag(omega) H_br`` (length M)."""
    return np.conj(channels.h_bu) + (np.conj(channels.h_ru) * omega) @ channels.H_br


def mrt_precoder(channels: ChannelSet, omega: np.ndarray) -> np.ndarray:
    """Maximal ratio transmission ``p = h / ||h||`` for the given coefficients."""
    h = np.conj(overall_channel(channels, np.asarray(omega, dtype=complex)))
    norm = np.linalg.norm(h)
    if not norm > 0:
        raise DegenerateChannelError("overall channel is identically zero; MRT undefined")
    return h / norm


def effective_channels(channels: ChannelSet, p: np.ndarray) -> EffectiveChannels:
    f = complex(np.vdot(channels.h_bu, p))
    g = np.conj(channels.h_ru) * (channels.H_br @ p)
    return EffectiveChannels(f=f, g=g)


def _rank_desc(x: np.ndarray) -> np.ndarray:
    # stable: equal magnitudes keep the lower index first
    return np.argsort(-np.abs(x), kind="stable")


def optimal_placement(eff: EffectiveChannels, L: int) -> tuple:
    """Indices of the ``L`` strongest cascaded channels, strongest first."""
    if not 0 <= L <= eff.g.shape[0]:
        raise ValueError(f"need 0 <= L <= N, got L={L}")
    return tuple(int(i) for i in _rank_desc(eff.g)[:L])


def optimal_coefficients(eff: EffectiveChannels, active_set: Sequence[int], eta: float) -> np.ndarray:
    """Co-phase every element with the direct path; active elements at full gain ``eta``."""
    # np.angle(0) == 0, so zero channels still get a well-defined phase
    omega = np.exp(-1j * (np.angle(eff.g) - np.angle(eff.f)))
    omega[list(active_set)] *= eta
    return omega


def ris_noise_power(h_ru: np.ndarray, omega: np.ndarray, active_set: Sequence[int], nu2: float) -> float:
    idx = list(active_set)
    return float(nu2 * np.sum(np.abs(h_ru[idx]) ** 2 * np.abs(omega[idx]) ** 2))


def r_max_bound(h_ru: np.ndarray, L: int, eta: float, nu2: float) -> float:
    """Worst-case RIS noise at the UE: ``nu2 eta^2`` times the ``L`` largest ``|h_ru|^2``."""
    if not 0 <= L <= h_ru.shape[0]:
        raise ValueError(f"need 0 <= L <= N, got L={L}")
    top = np.abs(h_ru[_rank_desc(h_ru)[:L]]) ** 2
    return float(nu2 * eta**2 * np.sum(top))


def _check_feasible(config: SystemConfig, design: HrisDesign) -> None:
    violations = []
    N = design.omega.shape[0]
    A = design.active_set
    if len(set(A)) != len(A) or any(not 0 <= i < N for i in A):
        violations.append(f"active set must hold distinct indices in [0, {N}), got {A}")
    if len(A) != config.L:
        violations.append(f"active set size {len(A)} != L={config.L}")
    pnorm = np.linalg.norm(design.p)
    if pnorm > 1 + FEAS_TOL:
        violations.append(f"||p||_2 = {pnorm:.12g} > 1")
    if not violations:
        mag = np.abs(design.omega)
        mask = design.active_mask
        if np.any(mag[mask] > config.eta * (1 + FEAS_TOL)):
            violations.append(f"|omega_i| = {mag[mask].max():.12g} > eta = {config.eta:.12g} on active elements")
        if np.any(np.abs(mag[~mask] - 1) > FEAS_TOL):
            worst = mag[~mask][np.argmax(np.abs(mag[~mask] - 1))]
            violations.append(f"|omega_i| = {worst:.12g} != 1 on passive elements")
    if violations:
        raise InfeasibleDesignError("; ".join(violations))


def ris_power(config: SystemConfig, channels: ChannelSet, design: HrisDesign) -> float:
    """Power drawn by the active elements: incident signal power plus amplified noise."""
    idx = list(design.active_set)
    incident = config.P_t * np.abs((channels.H_br @ design.p)[idx]) ** 2
    return float(np.sum(np.abs(design.omega[idx]) ** 2 * (incident + config.nu2)))


def snr(config: SystemConfig, channels: ChannelSet, design: HrisDesign) -> SnrBreakdown:
    """Exact received SNR of ``design`` together with its lower bound ``gamma_min``.

    Raises
    ------
    InfeasibleDesignError
        If ``design`` violates the precoder norm or coefficient magnitude constraints.
    """
    _check_feasible(config, design)
    c = complex(overall_channel(channels, design.omega) @ design.p)
    sig = config.P_t * abs(c) ** 2
    r = ris_noise_power(channels.h_ru, design.omega, design.active_set, config.nu2)
    r_max = r_max_bound(channels.h_ru, config.L, config.eta, config.nu2)
    gamma = sig / (r + config.sigma2)
    return SnrBreakdown(
        gamma=gamma,
        gamma_min=sig / (r_max + config.sigma2),
        c_abs=abs(c),
        r=r,
        r_max=r_max,
        p_ris=ris_power(config, channels, design),
        se=float(np.log2(1 + gamma)),
    )


def enforce_ris_power(design: HrisDesign, config: SystemConfig, channels: ChannelSet) -> HrisDesign:
    """Scale the active coefficients down so the RIS power budget is met exactly.

    Designs already within budget are returned unchanged.
    """
    p_ris = ris_power(config, channels, design)
    if p_ris <= config.P_ris_max:
        return design
    omega = design.omega.copy()
    idx = list(design.active_set)
    omega[idx] *= np.sqrt(config.P_ris_max / p_ris)
    return HrisDesign(p=design.p, omega=omega, active_set=design.active_set)


def alternating_solve(
    config: SystemConfig,
    channels: ChannelSet,
    *,
    initial_omega: Optional[np.ndarray] = None,
    fixed_active_set: Optional[Sequence[int]] = None,
    enforce_power: bool = True,
) -> SolveResult:
    """Alternate MRT precoding with closed-form placement and coefficients.

    Each iteration sets ``p`` to MRT on the current coefficients, then picks
    the ``L`` elements with the largest ``|g_i|`` as active and co-phases all
    elements. The objective is the SNR lower bound ``gamma_min``, which never
    decreases from one iteration to the next. Iteration stops once the
    relative change of ``gamma_min`` drops below ``config.conv_tol``
    (the first iteration is compared with the starting point) or after
    ``config.max_iter`` iterations.

    Parameters
    ----------
    initial_omega : array, optional
        Starting coefficients. Defaults to ``[eta, 0, ..., 0]``.
    fixed_active_set : sequence of int, optional
        Freeze the placement instead of optimizing it (must have ``L`` entries).
    enforce_power : bool
        Rescale the final design to the RIS power budget.

    Returns
    -------
    SolveResult
        Final design, its SNR breakdown, the per-iteration ``gamma_min``
        trace and whether the tolerance was reached.
    """
    N, L, eta = config.N, config.L, config.eta
    if channels.N != N or channels.M != config.M:
        raise ValueError(f"channels are {channels.N}x{channels.M}, config expects {N}x{config.M}")
    if fixed_active_set is not None and len(fixed_active_set) != L:
        raise ValueError(f"fixed active set has {len(fixed_active_set)} entries, expected L={L}")

    if initial_omega is None:
        omega = np.zeros(N, dtype=complex)
        omega[0] = eta
    else:
        omega = np.asarray(initial_omega, dtype=complex).copy()

    r_max = r_max_bound(channels.h_ru, L, eta, config.nu2)
    scale = config.P_t / (r_max + config.sigma2)

    p = mrt_precoder(channels, omega)
    prev = scale * abs(overall_channel(channels, omega) @ p) ** 2
    trace = []
    converged = False
    for _ in range(config.max_iter):
        p = mrt_precoder(channels, omega)
        eff = effective_channels(channels, p)
        A = tuple(fixed_active_set) if fixed_active_set is not None else optimal_placement(eff, L)
        omega = optimal_coefficients(eff, A, eta)
        cur = scale * abs(eff.f + omega @ eff.g) ** 2
        trace.append(cur)
        if abs(cur - prev) <= config.conv_tol * max(abs(prev), np.finfo(float).tiny):
            converged = True
            break
        prev = cur

    design = HrisDesign(p=p, omega=omega, active_set=A)
    if enforce_power:
        design = enforce_ris_power(design, config, channels)
    return SolveResult(design, snr(config, channels, design), trace, converged)
