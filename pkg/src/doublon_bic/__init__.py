"""Giant atoms on a Kerr-nonlinear cavity array in the two-excitation sector."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    AtomSpec,
    ConfigError,
    CouplingVariant,
    SystemConfig,
    WaveguideParams,
    df_frequency,
    df_wavevector,
    doublon_dispersion,
    localization_length,
)
from .basis import build_basis  # noqa: E402
from .hamiltonian import build_hamiltonian, build_sector_hamiltonian  # noqa: E402

__all__ = [
    "AtomSpec",
    "ConfigError",
    "CouplingVariant",
    "SystemConfig",
    "WaveguideParams",
    "build_basis",
    "build_hamiltonian",
    "build_sector_hamiltonian",
    "df_frequency",
    "df_wavevector",
    "doublon_dispersion",
    "localization_length",
]
