"""Write a hologram into a condensate, read it out, refocus the conjugate
image and score the reconstruction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diffraction import ImprintModel, phase_imprint, propagate
from .fields import (
    Grid,
    PotentialMap,
    ScalarField,
    de_broglie_wavelength,
    plane_wave,
    rectangle_aperture,
)
from .thomas_fermi import TFProfile, thomas_fermi_density


@dataclass(frozen=True)
class Hologram:
    """Density hologram plus the metadata needed to read it back."""

    profile: TFProfile
    carrier: float              # reference-tilt spatial frequency, rad/m
    clipping_fraction: float    # trap-core fraction where the writing light empties the cloud
    fragmented: bool            # density support split into disconnected pieces


def _dominant_frequency(field: ScalarField) -> float:
    spectrum = np.abs(np.fft.fft(field.values.ravel())) ** 2
    k = 2.0 * np.pi * np.fft.fftfreq(field.values.size, d=field.grid.spacing[0])
    return float(k[int(np.argmax(spectrum))])


def _support_fragmented(density: np.ndarray) -> bool:
    support = density > 0
    if density.ndim == 1:
        runs = np.diff(support.astype(int))
        return int(np.sum(runs == 1) + (1 if support[0] else 0)) > 1
    from scipy import ndimage

    _, pieces = ndimage.label(support)
    return pieces > 1


def compose_hologram(object_field: ScalarField, reference: ScalarField,
                     trap: PotentialMap, writing_strength: float,
                     g: float, n_atoms: float) -> Hologram:
    """Imprint the object/reference interference into the condensate density.

    The writing light adds writing_strength * |object + reference|^2 to the
    trap; the Thomas-Fermi cloud then carries the fringes as density
    modulations.  Reports the fraction of the bare trap core where the
    total potential exceeds the chemical potential (information clipped)
    and whether the cloud fragments.
    """
    if object_field.grid != reference.grid or object_field.grid != trap.grid:
        raise ValueError("object, reference and trap must share one grid")
    light = np.abs(object_field.values + reference.values) ** 2
    total = PotentialMap(grid=trap.grid, values=trap.values + writing_strength * light)
    profile = thomas_fermi_density(total, g, n_atoms)

    core = trap.values <= profile.mu
    clipped = core & (total.values > profile.mu)
    clipping_fraction = float(np.sum(clipped)) / max(int(np.sum(core)), 1)
    return Hologram(
        profile=profile,
        carrier=_dominant_frequency(reference),
        clipping_fraction=clipping_fraction,
        fragmented=_support_fragmented(profile.density),
    )


@dataclass(frozen=True)
class ReconstructionResult:
    distance: float
    image: ScalarField
    score: float
    distances: np.ndarray
    scores: np.ndarray
    conjugate_center: float
    real_center: float


def _best_lag_correlation(signal: np.ndarray, template: np.ndarray) -> float:
    """Max Pearson correlation of the template slid along the signal."""
    tc = template - template.mean()
    tn = float(np.sqrt(np.sum(tc * tc)))
    if tn == 0.0:
        raise ValueError("degenerate (zero-variance) object intensity")
    n, m = len(signal), len(template)
    if n < m:
        return 0.0
    best = 0.0
    floor = 1e-12 * float(np.max(signal) ** 2) * m + 1e-300
    for lag in range(n - m + 1):
        seg = signal[lag:lag + m]
        sc = seg - seg.mean()
        sn2 = float(np.sum(sc * sc))
        if sn2 <= floor:
            continue
        r = float(np.sum(sc * tc)) / (math.sqrt(sn2) * tn)
        best = max(best, r)
    return max(best, 0.0)


def _intensity_window(x: np.ndarray, intensity: np.ndarray, threshold: float = 0.01):
    """Center and half-width of the region holding the pattern's intensity."""
    big = intensity > threshold * intensity.max()
    lo, hi = x[big][0], x[big][-1]
    return 0.5 * (lo + hi), max(0.5 * (hi - lo), x[1] - x[0])


def reconstruct(hologram: Hologram, model: ImprintModel, reading: ScalarField,
                search_range: tuple[float, float], object_intensity: np.ndarray,
                n_planes: int = 96, window_factor: float = 3.0) -> ReconstructionResult:
    """Scan the refocusing distance and score the conjugate image.

    At each candidate plane the image intensity inside the conjugate-order
    window (displaced by -distance * carrier / k) is compared against the
    original object intensity by lag-maximized normalized cross
    correlation; the best plane is refined by quadratic interpolation of
    the score and the refocused field there is returned.
    """
    lo, hi = search_range
    if not hi > lo:
        raise ValueError(f"empty search range [{lo}, {hi}]")
    if reading.grid.dim != 1:
        raise ValueError("reconstruction operates on 1-d fields")
    if reading.wavelength is None:
        raise ValueError("reading field needs a wavelength")
    object_intensity = np.asarray(object_intensity, dtype=float)
    if object_intensity.shape != reading.grid.shape:
        raise ValueError("object intensity must live on the reading grid")
    if object_intensity.max() <= 0 or np.ptp(object_intensity) == 0:
        raise ValueError("degenerate (zero-variance) object intensity")

    x = reading.grid.axes()[0]
    dx = reading.grid.spacing[0]
    k = 2.0 * np.pi / reading.wavelength
    obj_center, obj_half = _intensity_window(x, object_intensity)
    tpl_sel = np.abs(x - obj_center) <= obj_half * 1.5
    template = object_intensity[tpl_sel]

    imprinted = phase_imprint(reading, hologram.profile, model)

    def conjugate_center(d):
        # the conjugate order rides on the reference carrier itself; the
        # direct order rides on the opposite one
        return obj_center + d * hologram.carrier / k

    def window(d):
        c = conjugate_center(d)
        half = window_factor * obj_half
        return (np.abs(x - c) <= half)

    def score_at(d):
        img = propagate(imprinted, d)
        sel = window(d)
        if int(np.sum(sel)) <= len(template):
            return 0.0, img
        intensity = img.intensity()
        signal = intensity[sel]
        # an empty window (no diffracted order landed there) scores zero
        if float(signal.max()) <= 1e-9 * float(intensity.max()):
            return 0.0, img
        return _best_lag_correlation(signal, template), img

    distances = np.linspace(lo, hi, n_planes)
    scores = np.empty(n_planes)
    for i, d in enumerate(distances):
        scores[i], _ = score_at(d)

    best = int(np.argmax(scores))
    # ties broken toward the smaller distance by argmax on the ascending scan
    d_best = distances[best]
    if 0 < best < n_planes - 1:
        denom = scores[best - 1] - 2.0 * scores[best] + scores[best + 1]
        if denom < 0:
            d_best = d_best + 0.5 * (scores[best - 1] - scores[best + 1]) / denom * (
                distances[1] - distances[0]
            )
    final_score, image = score_at(d_best)
    if final_score < scores[best]:
        final_score, image = score_at(distances[best])
        d_best = distances[best]
    return ReconstructionResult(
        distance=float(d_best),
        image=image,
        score=float(final_score),
        distances=distances,
        scores=scores,
        conjugate_center=float(conjugate_center(d_best)),
        real_center=float(obj_center - d_best * hologram.carrier / k),
    )


# ---------------------------------------------------------------------------
# End-to-end scenario

@dataclass(frozen=True)
class HolographyScenario:
    """Everything needed to write, read and reconstruct a line hologram."""

    samples: int
    spacing: float                  # m
    object_width: float             # m
    object_center: float            # m
    object_amplitude: float         # relative to the unit reference
    object_edge: float              # m, aperture edge roll-off
    writing_wavelength: float       # m, of the writing/reference light
    object_distance: float          # m, aperture to condensate
    carrier: float                  # rad/m, reference tilt
    writing_strength: float         # rad/s per unit light intensity
    g: float                        # rad/s m, 1-d interaction strength
    atom_number: float
    trap_radius: float              # m, Thomas-Fermi radius of the bare trap
    eta: float                      # m, imprinted phase per column density
    incidence_angle: float          # rad
    reading_mass: float             # kg
    reading_velocity: float         # m/s
    reading_envelope: float         # m, flat-top half-width of the reading beam
    search_lo: float                # m
    search_hi: float                # m
    n_planes: int = 96

    def grid(self) -> Grid:
        return Grid(shape=(self.samples,), spacing=(self.spacing,))

    def trap(self) -> PotentialMap:
        # harmonic trap parametrized by its Thomas-Fermi radius
        grid = self.grid()
        x = grid.axes()[0]
        curvature = 3.0 * self.atom_number * self.g / (2.0 * self.trap_radius ** 3)
        return PotentialMap(grid=grid, values=0.5 * curvature * x ** 2)

    def __post_init__(self):
        self.grid()                       # power-of-two and spacing checks
        de_broglie_wavelength(self.reading_mass, self.reading_velocity)
        ImprintModel(eta=self.eta, incidence_angle=self.incidence_angle)
        if self.g <= 0 or self.atom_number <= 0 or self.trap_radius <= 0:
            raise ValueError("g, atom_number and trap_radius must be positive")
        if self.object_width <= 0:
            raise ValueError(f"object_width must be positive, got {self.object_width}")
        if not self.search_hi > self.search_lo:
            raise ValueError(
                f"empty search range [{self.search_lo}, {self.search_hi}]"
            )
        if self.n_planes < 3:
            raise ValueError(f"n_planes must be at least 3, got {self.n_planes}")
        if self.reading_envelope <= 0:
            raise ValueError("reading_envelope must be positive")
        if self.writing_wavelength <= 0 or self.object_distance < 0:
            raise ValueError("writing wavelength must be positive, object distance nonnegative")


@dataclass(frozen=True)
class HolographyRun:
    scenario: HolographyScenario
    wavelength: float
    hologram: Hologram
    object_intensity: np.ndarray
    reconstruction: ReconstructionResult


def run_holography(scn: HolographyScenario) -> HolographyRun:
    """Write the hologram, read it with the matter-wave beam, reconstruct."""
    grid = scn.grid()
    aperture = rectangle_aperture(
        grid, scn.writing_wavelength, scn.object_center, scn.object_width,
        amplitude=scn.object_amplitude, edge_width=scn.object_edge,
    )
    object_wave = propagate(aperture, scn.object_distance)
    # negative reference tilt puts the refocused conjugate image at negative
    # x and the still-defocused direct image at positive x
    reference = plane_wave(grid, scn.writing_wavelength, tilt=-abs(scn.carrier))
    hologram = compose_hologram(
        object_wave, reference, scn.trap(), scn.writing_strength, scn.g, scn.atom_number
    )

    lam = de_broglie_wavelength(scn.reading_mass, scn.reading_velocity)
    reading = plane_wave(grid, lam, envelope_width=scn.reading_envelope)
    model = ImprintModel(eta=scn.eta, incidence_angle=scn.incidence_angle)
    recon = reconstruct(
        hologram, model, reading, (scn.search_lo, scn.search_hi),
        aperture.intensity(), n_planes=scn.n_planes,
    )
    return HolographyRun(
        scenario=scn,
        wavelength=lam,
        hologram=hologram,
        object_intensity=aperture.intensity(),
        reconstruction=recon,
    )
