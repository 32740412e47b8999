"""Physical parameters and the strong-surface-tension scaling regime."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigurationError

#: Largest scaling parameter accepted by the small-amplitude machinery.
#: Diagnostics (series decay, solver iteration counts) degrade beyond this.
EPS_MAX_DEFAULT = 0.3


@dataclass(frozen=True)
class PhysParams:
    """Gravity g, depth h, surface tension sigma, wave speed c and the
    scaling parameter eps of the small-amplitude family.

    Derived quantities: lam = g*h/c^2, bond = sigma/(h*c^2) and
    B = sigma*(1+eps^2) - 1/3 (positive in the strong-tension regime).
    """

    g: float
    h: float
    sigma: float
    c: float
    eps: float = 0.0

    def __post_init__(self):
        if self.g <= 0 or self.h <= 0 or self.sigma <= 0:
            raise ConfigurationError("g, h, sigma must be positive")
        if self.c <= 0:
            raise ConfigurationError("wave speed c must be positive")
        if self.eps < 0:
            raise ConfigurationError("eps must be nonnegative")

    @classmethod
    def kp_regime(cls, sigma: float, eps: float,
                  eps_max: float = EPS_MAX_DEFAULT) -> "PhysParams":
        """Normalized regime g = h = 1 with c = (1+eps^2)^{-1/2}.

        Requires sigma > 1/3 so that B > 0.
        """
        if not (0.0 < eps <= eps_max):
            raise ConfigurationError(f"eps must lie in (0, {eps_max}], got {eps}")
        if sigma <= 1.0 / 3.0:
            raise ConfigurationError(f"regime needs sigma > 1/3, got {sigma}")
        return cls(g=1.0, h=1.0, sigma=float(sigma),
                   c=(1.0 + eps**2) ** -0.5, eps=float(eps))

    @property
    def lam(self) -> float:
        return self.g * self.h / self.c**2

    @property
    def bond(self) -> float:
        return self.sigma / (self.h * self.c**2)

    @property
    def B(self) -> float:
        return self.sigma * (1.0 + self.eps**2) - 1.0 / 3.0
