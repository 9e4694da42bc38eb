"""Grids, sampled fields and potentials for the holography pipeline.

Lengths are in meters, potentials and interaction strengths in angular
frequency units (energy over hbar).  Grids are uniform with power-of-two
sample counts so FFT-based propagation needs no re-gridding; coordinates
follow the FFT layout x_i = (i - n/2) * dx.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy.constants import hbar as HBAR

BINARY_MAGIC = b"MWHOLO01"


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform 1-d or 2-d sampling grid."""

    shape: tuple[int, ...]
    spacing: tuple[float, ...]

    def __post_init__(self):
        shape = tuple(int(n) for n in (self.shape if hasattr(self.shape, "__len__") else (self.shape,)))
        spacing = tuple(float(s) for s in (self.spacing if hasattr(self.spacing, "__len__") else (self.spacing,)))
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "spacing", spacing)
        if len(shape) not in (1, 2) or len(spacing) != len(shape):
            raise ValueError(f"grid must be 1-d or 2-d, got shape={shape}, spacing={spacing}")
        for n in shape:
            if n < 64 or not _is_power_of_two(n):
                raise ValueError(f"samples per axis must be a power of two >= 64, got {n}")
        for s in spacing:
            if not (s > 0 and math.isfinite(s)):
                raise ValueError(f"spacing must be positive and finite, got {s}")

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def extents(self) -> tuple[float, ...]:
        return tuple(n * s for n, s in zip(self.shape, self.spacing))

    def axes(self) -> list[np.ndarray]:
        return [
            (np.arange(n) - n // 2) * s for n, s in zip(self.shape, self.spacing)
        ]

    def meshgrid(self) -> list[np.ndarray]:
        return list(np.meshgrid(*self.axes(), indexing="ij"))

    def wavenumbers(self) -> list[np.ndarray]:
        return [
            2.0 * np.pi * np.fft.fftfreq(n, d=s)
            for n, s in zip(self.shape, self.spacing)
        ]

    def transverse_k_squared(self) -> np.ndarray:
        ks = self.wavenumbers()
        if self.dim == 1:
            return ks[0] ** 2
        kx, ky = np.meshgrid(ks[0], ks[1], indexing="ij")
        return kx ** 2 + ky ** 2


@dataclass(frozen=True)
class PotentialMap:
    """Real external potential samples in angular-frequency units."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"potential shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("potential must be finite everywhere")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class ScalarField:
    """Complex scalar amplitude on a grid; wavelength is the reading-beam
    de Broglie wavelength (None for condensate wavefunctions)."""

    grid: Grid
    values: np.ndarray
    wavelength: float | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            raise ValueError(f"field shape {v.shape} does not match grid {self.grid.shape}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        if self.wavelength is not None and not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")

    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    @property
    def power(self) -> float:
        """Total intensity, sum |psi|^2 times the cell volume."""
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.cell_volume)

    def with_values(self, values) -> "ScalarField":
        return ScalarField(grid=self.grid, values=values, wavelength=self.wavelength)


def de_broglie_wavelength(mass: float, velocity: float) -> float:
    """Matter-wave wavelength 2 pi hbar / (M v) of a monoenergetic beam."""
    if mass <= 0 or velocity <= 0:
        raise ValueError("mass and velocity must be positive")
    return 2.0 * np.pi * HBAR / (mass * velocity)


def plane_wave(grid: Grid, wavelength: float, tilt: float = 0.0,
               amplitude: complex = 1.0, envelope_width: float | None = None,
               envelope_order: int = 8) -> ScalarField:
    """Tilted plane wave, optionally under a flat-top super-Gaussian envelope.

    ``tilt`` is the transverse wavenumber component in rad/m (along the
    first axis for 2-d grids).
    """
    x = grid.meshgrid()[0] if grid.dim == 2 else grid.axes()[0]
    values = amplitude * np.exp(1j * tilt * x)
    if envelope_width is not None:
        r2 = x ** 2
        if grid.dim == 2:
            y = grid.meshgrid()[1]
            r2 = r2 + y ** 2
        values = values * np.exp(-((np.sqrt(r2) / envelope_width) ** envelope_order))
    return ScalarField(grid=grid, values=values, wavelength=wavelength)


def rectangle_aperture(grid: Grid, wavelength: float, center: float, width: float,
                       amplitude: complex = 1.0, edge_width: float = 0.0) -> ScalarField:
    """Field transmitted by a rectangular aperture (1-d grids).

    ``edge_width`` rolls the edges off smoothly (error-function profile of
    that scale), modeling the finite resolution of a real mask; hard edges
    would fill the whole spectral band and cannot be propagated alias-free
    on a periodic domain.
    """
    if grid.dim != 1:
        raise ValueError("rectangle_aperture is defined for 1-d grids")
    x = grid.axes()[0]
    if edge_width > 0.0:
        from scipy.special import erf

        lo, hi = center - width / 2.0, center + width / 2.0
        s = edge_width * math.sqrt(2.0)
        values = amplitude * 0.5 * (erf((x - lo) / s) - erf((x - hi) / s))
    else:
        values = np.where(np.abs(x - center) <= width / 2.0, amplitude, 0.0)
    return ScalarField(grid=grid, values=values.astype(complex), wavelength=wavelength)


# ---------------------------------------------------------------------------
# Serialization

def write_field_csv(field: ScalarField, path):
    """CSV snapshot (x [m], re, im, intensity); 1-d fields only."""
    if field.grid.dim != 1:
        raise ValueError("CSV snapshots are for 1-d fields; use the binary format for 2-d")
    x = field.grid.axes()[0]
    v = field.values
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x_m", "re", "im", "intensity"])
        for xi, vi in zip(x, v):
            w.writerow([repr(float(xi)), repr(float(vi.real)), repr(float(vi.imag)),
                        repr(float(abs(vi) ** 2))])


def read_field_csv(path, wavelength: float | None = None) -> ScalarField:
    xs, vals = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:3] != ["x_m", "re", "im"]:
            raise ValueError(f"unexpected field CSV header {header}")
        for row in reader:
            xs.append(float(row[0]))
            vals.append(float(row[1]) + 1j * float(row[2]))
    x = np.asarray(xs)
    steps = np.diff(x)
    if len(x) < 2 or np.abs(steps - steps[0]).max() > 1e-9 * abs(steps[0]):
        raise ValueError("field CSV does not describe a uniform grid")
    spacing = (x[-1] - x[0]) / (len(x) - 1)
    grid = Grid(shape=(len(x),), spacing=(float(spacing),))
    return ScalarField(grid=grid, values=np.asarray(vals), wavelength=wavelength)


_HEADER = struct.Struct("<8sIIIId")   # magic, dim, nx, ny, reserved, dx
assert _HEADER.size == 32


def write_field_binary(field: ScalarField, path):
    """Binary snapshot: 32-byte header then little-endian float64
    (re, im, intensity) triplets in row-major order.

    2-d fields must have isotropic spacing; anisotropic grids are not
    representable in this format.
    """
    g = field.grid
    if g.dim == 2 and abs(g.spacing[0] - g.spacing[1]) > 0:
        raise ValueError("binary snapshots require isotropic spacing")
    nx = g.shape[0]
    ny = g.shape[1] if g.dim == 2 else 0
    header = _HEADER.pack(BINARY_MAGIC, g.dim, nx, ny, 0, g.spacing[0])
    flat = field.values.ravel()
    payload = np.empty((flat.size, 3), dtype="<f8")
    payload[:, 0] = flat.real
    payload[:, 1] = flat.imag
    payload[:, 2] = np.abs(flat) ** 2
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())


def read_field_binary(path, wavelength: float | None = None) -> ScalarField:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        magic, dim, nx, ny, _, dx = _HEADER.unpack(raw)
        if magic != BINARY_MAGIC:
            raise ValueError(f"bad magic {magic!r}; not a field snapshot")
        shape = (nx,) if dim == 1 else (nx, ny)
        count = int(np.prod(shape))
        payload = np.frombuffer(fh.read(count * 3 * 8), dtype="<f8").reshape(count, 3)
    values = (payload[:, 0] + 1j * payload[:, 1]).reshape(shape)
    grid = Grid(shape=shape, spacing=(dx,) * dim)
    return ScalarField(grid=grid, values=values, wavelength=wavelength)
