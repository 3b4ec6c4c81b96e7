"""Cloaking scenario description shared by the solvers and sweep runners."""

from __future__ import annotations

from dataclasses import dataclass, replace

ACOUSTIC_VARIANTS = ("fixed_lossy", "rho_lossy", "no_loss", "drude_lorentz")
MAXWELL_VARIANTS = ("maxwell_no_loss", "maxwell_lossy")
ALL_VARIANTS = ACOUSTIC_VARIANTS + MAXWELL_VARIANTS


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CloakConfig:
    """A named cloaking scenario.

    Acoustic objects are isotropic (lam1, lam2) pairs (matrix part lam1*I,
    scalar part lam2); electromagnetic objects are scalar (eps_o, mu_o).
    ``gamma`` sets the rho-dependent loss exponent (loss parameter
    rho^(1+gamma)); the dispersive variant uses (sigma_n, sigma_d) with
    model resonance frequency rho^(-omega_c_exponent).
    """

    dimension: int
    rho: float
    variant: str
    lam1: float = 1.0
    lam2: float = 1.0
    eps_o: float = 1.0
    mu_o: float = 1.0
    gamma: float = 0.5
    sigma_n: float = 1.0
    sigma_d: float = 1.0
    omega_c_exponent: float = 1.5

    def __post_init__(self):
        if not 0.0 < self.rho < 0.5:
            raise ConfigError(f"rho must lie in (0, 1/2), got {self.rho}")
        if self.variant not in ALL_VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.is_maxwell:
            if self.dimension != 3:
                raise ConfigError("Maxwell variants are three-dimensional")
            if self.eps_o <= 0 or self.mu_o <= 0:
                raise ConfigError("object permittivity/permeability must be positive")
        else:
            if self.dimension not in (2, 3):
                raise ConfigError("dimension must be 2 or 3")
            if self.lam1 <= 0 or self.lam2 <= 0:
                raise ConfigError("object coefficients must be positive")
        if self.variant == "rho_lossy" and self.gamma <= 0:
            raise ConfigError("rho_lossy requires gamma > 0")
        if self.variant == "drude_lorentz":
            if self.sigma_n < 0 or self.sigma_d <= 0:
                raise ConfigError("dispersive model needs sigma_n >= 0, sigma_d > 0")

    @property
    def is_maxwell(self) -> bool:
        return self.variant in MAXWELL_VARIANTS

    @property
    def omega_c(self) -> float:
        """Resonance frequency of the dispersive cloak model."""
        return self.rho ** (-self.omega_c_exponent)

    def with_rho(self, rho: float) -> "CloakConfig":
        return replace(self, rho=rho)


def matched_object(dimension: int, rho: float) -> tuple[float, float]:
    """Object pair that continues the transformation medium into the core.

    With (lam1, lam2) = (rho^(d-2), rho^d) the pulled-back configuration is
    exactly the homogeneous background, so the scattered field vanishes
    identically for every source.
    """
    return rho ** (dimension - 2), rho ** dimension
