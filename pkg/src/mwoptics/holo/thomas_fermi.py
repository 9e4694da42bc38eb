"""Thomas-Fermi condensate profiles and the chemical-potential solve."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import Grid, PotentialMap


@dataclass(frozen=True)
class TFProfile:
    """Interaction-dominated density max(mu - V, 0) / g with its inputs."""

    grid: Grid
    density: np.ndarray
    mu: float
    g: float
    n_atoms: float

    def __post_init__(self):
        rho = np.asarray(self.density, dtype=float)
        if rho.shape != self.grid.shape:
            raise ValueError("density shape does not match the grid")
        if rho.min() < 0:
            raise ValueError("density must be nonnegative")
        rho.flags.writeable = False
        object.__setattr__(self, "density", rho)

    @property
    def total_atoms(self) -> float:
        return float(np.sum(self.density) * self.grid.cell_volume)


def solve_chemical_potential(potential: PotentialMap, g: float, n_atoms: float,
                             rel_tol: float = 1e-8, max_bisections: int = 200) -> float:
    """Chemical potential fixing the atom number of a Thomas-Fermi cloud.

    Bisection on [min V, min V + g N / cell volume]; the atom-number
    functional is continuous and strictly increasing above min V, so the
    root is unique.  Stops when |integral - N| <= rel_tol * N.
    """
    if g <= 0:
        raise ValueError(f"interaction strength must be positive, got {g}")
    if n_atoms <= 0:
        raise ValueError(f"atom number must be positive, got {n_atoms}")
    V = potential.values
    dv = potential.grid.cell_volume
    vmin = float(V.min())

    def count(mu):
        return float(np.sum(np.maximum(mu - V, 0.0)) * dv / g)

    offset = g * n_atoms / dv
    hi = vmin + offset
    for _ in range(60):
        if count(hi) >= n_atoms:
            break
        offset *= 2.0
        hi = vmin + offset
    else:
        raise RuntimeError("chemical-potential bracket not found after expansion")

    lo = vmin
    for _ in range(max_bisections):
        mid = 0.5 * (lo + hi)
        c = count(mid)
        if abs(c - n_atoms) <= rel_tol * n_atoms:
            return mid
        if c < n_atoms:
            lo = mid
        else:
            hi = mid
    raise RuntimeError(
        f"chemical-potential bisection did not converge: residual "
        f"{abs(count(0.5 * (lo + hi)) - n_atoms) / n_atoms:.3e} relative"
    )


def thomas_fermi_density(potential: PotentialMap, g: float, n_atoms: float,
                         rel_tol: float = 1e-8) -> TFProfile:
    """Thomas-Fermi profile: the potential shape replicated in the density."""
    mu = solve_chemical_potential(potential, g, n_atoms, rel_tol=rel_tol)
    rho = np.maximum(mu - potential.values, 0.0) / g
    return TFProfile(grid=potential.grid, density=rho, mu=mu, g=g, n_atoms=n_atoms)
