"""Thin-hologram phase imprint and exact angular-spectrum propagation."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .fields import ScalarField
from .thomas_fermi import TFProfile

EVANESCENT_POWER_TOL = 1e-8


class AliasingError(ValueError):
    """The propagation kernel is undersampled for this field and distance."""


@dataclass(frozen=True)
class ImprintModel:
    """Phase per column density of the reading interaction.

    ``eta`` carries the s-wave interaction and traversal time; the
    incidence angle stretches the column by 1/cos.  ``thickness`` is the
    hologram extent along the beam, used only for the thin-grating
    (Raman-Nath) validity check; zero means ideally thin.
    """

    eta: float
    incidence_angle: float = 0.0
    thickness: float = 0.0

    def __post_init__(self):
        if not -math.pi / 2 < self.incidence_angle < math.pi / 2:
            raise ValueError("incidence angle must keep the beam crossing the hologram")
        if self.thickness < 0:
            raise ValueError("thickness must be nonnegative")


def column_density(profile: TFProfile, model: ImprintModel) -> np.ndarray:
    """Column density seen by the tilted beam (path stretched by 1/cos)."""
    return profile.density / math.cos(model.incidence_angle)


def raman_nath_valid(profile: TFProfile, model: ImprintModel, field: ScalarField) -> bool:
    """Thin-grating check: transverse displacement inside the hologram
    stays below one grid cell."""
    if model.thickness == 0.0:
        return True
    if field.wavelength is None:
        raise ValueError("reading field needs a wavelength")
    phase = model.eta * column_density(profile, model)
    grad = np.gradient(phase, *profile.grid.spacing)
    gmax = float(np.max(np.abs(grad))) if profile.grid.dim == 1 else float(
        max(np.max(np.abs(g)) for g in grad)
    )
    k = 2.0 * np.pi / field.wavelength
    displacement = model.thickness * gmax / k
    return displacement <= min(field.grid.spacing)


def phase_imprint(field_in: ScalarField, profile: TFProfile,
                  model: ImprintModel) -> ScalarField:
    """Multiply the field by exp(i eta rho_col); a pure phase object."""
    if profile.grid != field_in.grid:
        raise ValueError(
            f"grid mismatch: field {field_in.grid.shape}/{field_in.grid.spacing} vs "
            f"profile {profile.grid.shape}/{profile.grid.spacing}"
        )
    if not raman_nath_valid(profile, model, field_in):
        warnings.warn(
            "thin-hologram (Raman-Nath) condition violated: transverse motion "
            "during traversal exceeds one grid cell",
            stacklevel=2,
        )
    phase = model.eta * column_density(profile, model)
    return field_in.with_values(field_in.values * np.exp(1j * phase))


def _kernel_band_limit(k: float, domain: float, distance: float) -> float:
    """Largest transverse wavenumber whose kernel phase is Nyquist-sampled."""
    if distance == 0.0:
        return k
    return k * domain / math.sqrt(4.0 * distance ** 2 + domain ** 2)


def propagate(field: ScalarField, distance: float) -> ScalarField:
    """Exact scalar propagation by the angular-spectrum method.

    Propagating plane-wave components advance by exp(i d sqrt(k^2 -
    k_perp^2)); evanescent components decay regardless of the sign of the
    distance.  Raises AliasingError, naming the required domain, when the
    field has spectral weight where the sampled kernel phase aliases.
    """
    if field.wavelength is None:
        raise ValueError("field needs a wavelength to propagate")
    grid = field.grid
    k = 2.0 * np.pi / field.wavelength
    k2perp = grid.transverse_k_squared()
    spectrum = np.fft.fftn(field.values) if grid.dim == 2 else np.fft.fft(field.values)

    domain = min(grid.extents)
    s_ok = _kernel_band_limit(k, domain, distance)
    power = np.abs(spectrum) ** 2
    kabs = np.sqrt(k2perp)
    propagating = kabs <= k
    total = float(np.sum(power[propagating]))
    bad = propagating & (kabs > s_ok)
    if total > 0 and float(np.sum(power[bad])) > EVANESCENT_POWER_TOL * total:
        occupied = float(np.max(kabs[propagating & (power > EVANESCENT_POWER_TOL * power.max())]))
        needed = (
            2.0 * abs(distance) * occupied / math.sqrt(max(k ** 2 - occupied ** 2, 1e-300))
        )
        raise AliasingError(
            f"angular-spectrum kernel aliases at |k_perp| > {s_ok:.4g} rad/m while the "
            f"field occupies {occupied:.4g} rad/m; enlarge the domain to at least "
            f"{needed:.4g} m (now {domain:.4g} m), e.g. by zero padding"
        )

    kz = np.sqrt(np.maximum(k ** 2 - k2perp, 0.0))
    decay = np.sqrt(np.maximum(k2perp - k ** 2, 0.0))
    kernel = np.where(
        propagating,
        np.exp(1j * distance * kz),
        np.exp(-abs(distance) * decay),
    )
    out = np.fft.ifftn(kernel * spectrum) if grid.dim == 2 else np.fft.ifft(kernel * spectrum)
    return field.with_values(out)
