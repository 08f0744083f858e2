"""Statistical channel model: log-distance pathloss with Rician fading.

Three links are generated per realization: BS->RIS (``H_br``, N x M),
RIS->UE (``h_ru``, N) and BS->UE (``h_bu``, M). Channel vectors follow the
conjugate convention of the signal model, i.e. the overall channel is
``h^H = h_bu^H + h_ru^H diag(omega) H_br``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Geometry",
    "FadingSpec",
    "ChannelSet",
    "sample_ue_position",
    "pathloss_linear",
    "rician_matrix",
    "generate_channels",
    "trial_rng",
]


def _vec(x, n):
    arr = np.asarray(x, dtype=float).reshape(-1)
    if arr.shape != (n,):
        raise ValueError(f"expected a {n}-vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class Geometry:
    """Node positions in meters. The UE is dropped uniformly in a horizontal
    rectangle anchored at ``ue_region_corner``."""

    bs_position: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 0.0]))
    ris_position: np.ndarray = field(default_factory=lambda: np.array([20.0, 13.0, 3.0]))
    ue_region_corner: np.ndarray = field(default_factory=lambda: np.array([18.0, 8.0, 0.0]))
    ue_region_extent: np.ndarray = field(default_factory=lambda: np.array([3.0, 10.0]))

    def __post_init__(self):
        object.__setattr__(self, "bs_position", _vec(self.bs_position, 3))
        object.__setattr__(self, "ris_position", _vec(self.ris_position, 3))
        object.__setattr__(self, "ue_region_corner", _vec(self.ue_region_corner, 3))
        object.__setattr__(self, "ue_region_extent", _vec(self.ue_region_extent, 2))
        if np.any(self.ue_region_extent < 0):
            raise ValueError("UE region extent must be non-negative")
        if np.linalg.norm(self.bs_position - self.ris_position) <= 0:
            raise ValueError("BS and RIS positions coincide")


@dataclass(frozen=True)
class FadingSpec:
    """Per-link Rician factors (linear) and the pathloss law
    ``PL_dB(d) = intercept + coeff * log10(d)``."""

    rho_bu: float = 10.0
    rho_br: float = 10.0
    rho_ru: float = 0.0
    pathloss_intercept_db: float = 30.0
    pathloss_exponent_coeff_db: float = 22.0

    def __post_init__(self):
        for name in ("rho_bu", "rho_br", "rho_ru"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class ChannelSet:
    H_br: np.ndarray
    h_ru: np.ndarray
    h_bu: np.ndarray
    ue_position: np.ndarray

    @property
    def N(self) -> int:
        return self.H_br.shape[0]

    @property
    def M(self) -> int:
        return self.H_br.shape[1]

    def __post_init__(self):
        N, M = self.H_br.shape
        if self.h_ru.shape != (N,) or self.h_bu.shape != (M,):
            raise ValueError(
                f"inconsistent channel shapes: H_br {self.H_br.shape}, "
                f"h_ru {self.h_ru.shape}, h_bu {self.h_bu.shape}"
            )
        for name in ("H_br", "h_ru", "h_bu"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} has non-finite entries")


def trial_rng(root_seed: int, *key: int) -> np.random.Generator:
    """Generator for one work item.

    Trial ``t`` of a sweep seeded with ``root_seed`` uses
    ``SeedSequence(root_seed, spawn_key=(t, *rest))``; the stream depends only
    on ``(root_seed, key)``, never on execution order.
    """
    return np.random.default_rng(np.random.SeedSequence(int(root_seed), spawn_key=tuple(int(k) for k in key)))


def sample_ue_position(geometry: Geometry, rng: np.random.Generator) -> np.ndarray:
    """Uniform point in the UE rectangle; z is fixed to the corner height."""
    u = rng.random(2)
    pos = geometry.ue_region_corner.copy()
    pos[:2] += u * geometry.ue_region_extent
    return pos


def pathloss_linear(d: float, spec: FadingSpec = FadingSpec()) -> float:
    """Amplitude gain of the log-distance pathloss at distance ``d`` meters."""
    if not d > 0:
        raise ValueError(f"distance must be positive, got {d}")
    pl_db = spec.pathloss_intercept_db + spec.pathloss_exponent_coeff_db * np.log10(d)
    return float(10.0 ** (-pl_db / 20.0))


def rician_matrix(rows: int, cols: int, rho: float, rng: np.random.Generator) -> np.ndarray:
    """Rician fading matrix with unit average power per entry.

    The LOS part has unit-modulus entries with i.i.d. uniform phases; the
    NLOS part is i.i.d. CN(0, 1). Both are always drawn so that the random
    stream does not depend on ``rho``.
    """
    if not rho >= 0:
        raise ValueError(f"Rician factor must be >= 0, got {rho}")
    los = np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=(rows, cols)))
    nlos = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)
    if np.isinf(rho):
        return los
    return np.sqrt(rho / (1 + rho)) * los + np.sqrt(1 / (1 + rho)) * nlos


def generate_channels(config, geometry: Geometry, spec: FadingSpec, rng: np.random.Generator) -> ChannelSet:
    """Draw one channel realization for ``config.M`` antennas and ``config.N`` elements.

    The draw order (UE position, then BS-RIS, RIS-UE, BS-UE) is fixed, so a
    given generator state always yields the same ``ChannelSet``.
    """
    M, N = int(config.M), int(config.N)
    if M <= 0 or N <= 0:
        raise ValueError(f"M and N must be positive, got M={M}, N={N}")
    ue = sample_ue_position(geometry, rng)
    d_br = float(np.linalg.norm(geometry.ris_position - geometry.bs_position))
    d_ru = float(np.linalg.norm(ue - geometry.ris_position))
    d_bu = float(np.linalg.norm(ue - geometry.bs_position))

    H_br = pathloss_linear(d_br, spec) * rician_matrix(N, M, spec.rho_br, rng)
    h_ru = pathloss_linear(d_ru, spec) * rician_matrix(N, 1, spec.rho_ru, rng)[:, 0]
    h_bu = pathloss_linear(d_bu, spec) * rician_matrix(M, 1, spec.rho_bu, rng)[:, 0]
    return ChannelSet(H_br=H_br, h_ru=h_ru, h_bu=h_bu, ue_position=ue)
