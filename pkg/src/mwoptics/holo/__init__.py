"""Condensate holography: Thomas-Fermi writing, matter-wave readout,
angular-spectrum propagation and image reconstruction."""

from .diffraction import AliasingError, ImprintModel, phase_imprint, propagate, raman_nath_valid
from .fields import (
    Grid,
    PotentialMap,
    ScalarField,
    de_broglie_wavelength,
    plane_wave,
    read_field_binary,
    read_field_csv,
    rectangle_aperture,
    write_field_binary,
    write_field_csv,
)
from .gp import GPConvergenceError, gp_energy, gp_ground_state
from .pipeline import (
    Hologram,
    HolographyRun,
    HolographyScenario,
    ReconstructionResult,
    compose_hologram,
    reconstruct,
    run_holography,
)
from .thomas_fermi import TFProfile, solve_chemical_potential, thomas_fermi_density

__all__ = [
    "AliasingError",
    "GPConvergenceError",
    "Grid",
    "Hologram",
    "HolographyRun",
    "HolographyScenario",
    "ImprintModel",
    "PotentialMap",
    "ReconstructionResult",
    "ScalarField",
    "TFProfile",
    "compose_hologram",
    "de_broglie_wavelength",
    "gp_energy",
    "gp_ground_state",
    "phase_imprint",
    "plane_wave",
    "propagate",
    "raman_nath_valid",
    "read_field_binary",
    "read_field_csv",
    "reconstruct",
    "rectangle_aperture",
    "run_holography",
    "solve_chemical_potential",
    "thomas_fermi_density",
    "write_field_binary",
    "write_field_csv",
]
