"""Physical parameters and closed-form doublon band analytics.

All energies are in units of the hopping rate J. Cavity and coupling-point
indices are 1-based at this level; the basis module converts to 0-based.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field


class ConfigError(ValueError):
    """Raised when a parameter record violates a physical constraint."""


class NoDFModeError(ValueError):
    """Raised when no decoherence-free wavevector lies in the Brillouin zone."""


class CouplingVariant(str, enum.Enum):
    SINGLE_PHOTON = "single_photon"
    TWO_PHOTON = "two_photon"


@dataclass(frozen=True)
class WaveguideParams:
    N: int
    J: float = 1.0
    U: float = 10.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ConfigError(f"waveguide.N must be an integer >= 2, got {self.N!r}")
        if not self.J > 0:
            raise ConfigError(f"waveguide.J must be positive, got {self.J!r}")


@dataclass(frozen=True)
class AtomSpec:
    delta1: float
    coupling_points: tuple[int, ...]
    g: float
    delta2: float = 0.0

    def __post_init__(self):
        pts = tuple(int(p) for p in self.coupling_points)
        object.__setattr__(self, "coupling_points", pts)
        if len(pts) < 1:
            raise ConfigError("atom needs at least one coupling point")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ConfigError(f"coupling points must be strictly increasing: {pts}")


@dataclass(frozen=True)
class SystemConfig:
    waveguide: WaveguideParams
    atoms: tuple[AtomSpec, ...]
    coupling_variant: CouplingVariant = CouplingVariant.SINGLE_PHOTON
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "coupling_variant", CouplingVariant(self.coupling_variant))
        if len(self.atoms) < 1:
            raise ConfigError("at least one atom is required")
        N = self.waveguide.N
        for n, atom in enumerate(self.atoms):
            for p in atom.coupling_points:
                if not 1 <= p <= N:
                    raise ConfigError(
                        f"atoms[{n}].coupling_points: {p} outside [1, {N}]"
                    )

    @property
    def N(self) -> int:
        return self.waveguide.N

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def replace_atom(self, index: int, **changes) -> "SystemConfig":
        """Copy of the config with one atom's fields changed."""
        from dataclasses import replace

        atoms = list(self.atoms)
        atoms[index] = replace(atoms[index], **changes)
        return replace(self, atoms=tuple(atoms))


def doublon_dispersion(U: float, J: float, k: float) -> float:
    """Doublon band energy sign(U) * sqrt(U^2 + 16 J^2 cos^2(k/2))."""
    if U == 0:
        raise ValueError("doublon dispersion undefined for U = 0")
    if not J > 0:
        raise ValueError("J must be positive")
    return math.copysign(math.sqrt(U * U + 16.0 * J * J * math.cos(k / 2) ** 2), U)


def localization_length(U: float, J: float, k: float) -> float:
    """Relative-coordinate decay length of a repulsive doublon with momentum k.

    The pair amplitude falls off as exp(-|m - n| / length). At the zone
    boundary the length is taken as its limit, 0.
    """
    if not U > 0:
        raise ValueError("localization length is defined for U > 0 only")
    if abs(k) > math.pi:
        raise ValueError(f"k={k} outside [-pi, pi]")
    c = math.cos(k / 2)
    if abs(k) == math.pi or c <= 0:
        return 0.0
    ratio = (math.sqrt(U * U + 16.0 * J * J * c * c) - U) / (4.0 * J * c)
    if ratio <= 0.0:
        # cos(k/2) so small that the ratio underflows: deep in the limit
        return 0.0
    return -1.0 / math.log(ratio)


def df_wavevector(delta_x: int, n: int = 0) -> float:
    """Decoherence-free wavevector (2n+1) pi / delta_x folded into (0, pi]."""
    if delta_x < 1:
        raise ValueError("delta_x must be >= 1")
    if n < 0:
        raise ValueError("n must be non-negative")
    k = (2 * n + 1) * math.pi / delta_x
    # reflect into [-pi, pi], then use evenness of the band
    k = math.remainder(k, 2 * math.pi)
    k = abs(k)
    if not 0.0 < k <= math.pi:
        raise NoDFModeError(f"no DF mode for delta_x={delta_x}, n={n}")
    return k


def df_frequency(params: WaveguideParams, delta_x: int, n: int = 0) -> float:
    """Doublon energy at the decoherence-free wavevector."""
    return doublon_dispersion(params.U, params.J, df_wavevector(delta_x, n))


def doublon_band_edges(U: float, J: float) -> tuple[float, float]:
    lo, hi = abs(U), math.sqrt(U * U + 16.0 * J * J)
    return (lo, hi) if U > 0 else (-hi, -lo)


def doublon_band_separated(U: float, J: float) -> bool:
    """True when the doublon band does not overlap the free two-photon band [-4J, 4J]."""
    return abs(U) >= 4.0 * J
