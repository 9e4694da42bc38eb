"""Spin-1 condensate four-wave mixing on the conserved-charge sector.

Two central modes (counterpropagating, spin 0) exchange atom pairs with
two spin side modes.  Both pair populations and the side-mode population
difference are conserved, which reduces the dynamics to a single
tridiagonal block labeled by the lower side-mode occupation.

All I/O times are the dimensionless 2*c2*t; the physical spin-exchange
coupling c2 only sets the scale between that variable and laboratory time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import fock

MODE_LABELS = ("a1", "am1", "a01", "a02")   # side +, side -, central 1, central 2

INTENSITY_FLOOR = 1e-8

# report keys for the mode pairs whose cross-correlations get computed
PAIRS = (("a1", "am1"), ("a1", "a01"), ("a1", "a02"),
         ("am1", "a01"), ("am1", "a02"), ("a01", "a02"))


@dataclass(frozen=True)
class ScatteringInput:
    """s-wave scattering lengths of the two collision channels plus the mass."""

    a0: float
    a2: float
    mass: float

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if not (math.isfinite(self.a0) and math.isfinite(self.a2)):
            raise ValueError("scattering lengths must be finite")


@dataclass(frozen=True)
class SpinorCouplings:
    g0: float
    g2: float
    c0: float
    c2: float


def couplings_from_scattering(inp: ScatteringInput) -> SpinorCouplings:
    """Density and spin-exchange couplings from channel scattering lengths.

    g_f = 4 pi a_f / mass (hbar = 1), c0 = (g0 + 2 g2)/3, c2 = (g2 - g0)/3.
    """
    g0 = 4.0 * math.pi * inp.a0 / inp.mass
    g2 = 4.0 * math.pi * inp.a2 / inp.mass
    return SpinorCouplings(g0=g0, g2=g2, c0=(g0 + 2.0 * g2) / 3.0, c2=(g2 - g0) / 3.0)


@dataclass(frozen=True)
class FWMScenario:
    """One four-wave-mixing run.

    n1, n2 are the conserved pair populations (side+ with central-1, side-
    with central-2), m the initial population of the + side mode, and
    time_grid the output grid in units of 2*c2*t.  c0 and kinetic give the
    density-interaction and kinetic energy constants used when the
    constant Hamiltonian terms are kept; they only produce a global phase.
    """

    n1: int
    n2: int
    m: int
    c2: float
    time_grid: np.ndarray
    c0: float = 0.0
    kinetic: float = 0.0

    def __post_init__(self):
        grid = np.asarray(self.time_grid, dtype=float)
        if grid.ndim != 1 or len(grid) == 0:
            raise ValueError("time_grid must be a nonempty 1-d array")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("time_grid must be strictly increasing")
        grid.flags.writeable = False
        object.__setattr__(self, "time_grid", grid)
        for name in ("n1", "n2", "m"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a nonnegative integer, got {v}")
            object.__setattr__(self, name, int(v))
        if self.m > self.n1:
            raise ValueError(f"m={self.m} exceeds n1={self.n1}")

    @property
    def total_atoms(self) -> int:
        return self.n1 + self.n2

    @property
    def initial_occupations(self) -> tuple[int, int, int, int]:
        return (self.m, 0, self.n1 - self.m, self.n2)


def fwm_mode_set() -> fock.ModeSet:
    return fock.ModeSet(MODE_LABELS)


def fwm_sector(scn: FWMScenario) -> fock.FockSector:
    rules = (
        fock.ChargeRule((1, 0, 1, 0), scn.n1),     # side+ plus central-1
        fock.ChargeRule((0, 1, 0, 1), scn.n2),     # side- plus central-2
        fock.ChargeRule((1, -1, 0, 0), scn.m),     # side population difference
    )
    return fock.enumerate_sector(fwm_mode_set(), rules)


def fwm_hamiltonian_expression(c2: float, c0: float = 0.0, kinetic: float = 0.0,
                               drop_constant_terms: bool = False) -> fock.OperatorExpression:
    """The four-wave-mixing Hamiltonian as an operator expression.

    The c2 part holds the side-mode self/cross phase terms, the
    side-central cross terms and the pair-exchange term.  The kinetic and
    c0 parts are functions of the conserved totals; ``drop_constant_terms``
    removes them (they only contribute a global phase on a sector).
    """
    a1, am1 = fock.create("a1"), fock.create("am1")
    b1, bm1 = fock.annihilate("a1"), fock.annihilate("am1")
    c1, c2_ = fock.create("a01"), fock.create("a02")
    d1, d2 = fock.annihilate("a01"), fock.annihilate("a02")
    n1, nm1 = fock.number("a1"), fock.number("am1")
    n01, n02 = fock.number("a01"), fock.number("a02")

    exchange = a1 * am1 * d1 * d2
    h = (c2 / 2.0) * (
        a1 * a1 * b1 * b1
        + am1 * am1 * bm1 * bm1
        - 2.0 * n1 * nm1
        + 2.0 * (n1 + nm1) * (n01 + n02)
        + 4.0 * exchange
        + 4.0 * exchange.dagger()
    )
    if not drop_constant_terms:
        ntot = n1 + nm1 + n01 + n02
        h = h + kinetic * ntot + (c0 / 2.0) * (ntot * ntot - ntot)
    return h


def build_fwm_hamiltonian(scn: FWMScenario, drop_constant_terms: bool = False):
    """Sector plus Hamiltonian matrix, built directly in tridiagonal form.

    Basis index k is the occupation of the lower side mode; state k holds
    (m+k, k, n1-m-k, n2-k).  Returns (FockSector, csr_matrix).
    """
    sector = fwm_sector(scn)
    dim = sector.dimension
    diag = np.empty(dim)
    off = np.empty(max(dim - 1, 0))
    const = 0.0
    if not drop_constant_terms:
        ntot = scn.total_atoms
        const = scn.kinetic * ntot + (scn.c0 / 2.0) * ntot * (ntot - 1)
    for k, (o1, om1, o01, o02) in enumerate(sector.states):
        diag[k] = (scn.c2 / 2.0) * (
            o1 * (o1 - 1) + om1 * (om1 - 1) - 2 * o1 * om1
            + 2 * (o1 + om1) * (o01 + o02)
        ) + const
        if k + 1 < dim:
            off[k] = 2.0 * scn.c2 * math.sqrt((o1 + 1) * (om1 + 1) * o01 * o02)
    H = sp.diags([off, diag, off], offsets=[-1, 0, 1], format="csr", dtype=complex)
    return sector, H


@dataclass(frozen=True)
class PopulationSeries:
    """Mode populations over the scenario time grid (times are 2*c2*t)."""

    times: np.ndarray
    n1: np.ndarray
    nm1: np.ndarray
    n01: np.ndarray
    n02: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.n1 + self.nm1 + self.n01 + self.n02


def _evolved_amplitudes(scn: FWMScenario, drop_constant_terms: bool = False):
    """Initial state evolved over the scaled time grid; (sector, dim x nt)."""
    sector, H = build_fwm_hamiltonian(scn, drop_constant_terms=drop_constant_terms)
    if scn.c2 == 0.0:
        # scaled time is degenerate at zero coupling; nothing moves
        H = sp.csr_matrix(H.shape, dtype=complex)
    else:
        H = H / (2.0 * scn.c2)           # generator conjugate to 2*c2*t
    spec = fock.diagonalize(H)
    psi0 = fock.basis_state(sector, scn.initial_occupations)
    cols = [fock.evolve(psi0, spec, t).amplitudes for t in scn.time_grid]
    return sector, np.column_stack(cols)


def run_population_series(scn: FWMScenario) -> PopulationSeries:
    """Evolve the scenario and report the four mode populations."""
    sector, psi_t = _evolved_amplitudes(scn)
    prob = np.abs(psi_t) ** 2
    occ = np.asarray(sector.states, dtype=float)     # dim x 4
    series = occ.T @ prob                            # 4 x nt
    return PopulationSeries(
        times=scn.time_grid.copy(),
        n1=series[0], nm1=series[1], n01=series[2], n02=series[3],
    )


def detect_revivals(series: PopulationSeries, plateau_window=(0.4 * math.pi, 0.8 * math.pi),
                    max_spacing: float = math.pi / 100.0,
                    template_width: float = 0.25 * math.pi,
                    min_burst_gap: float = 0.5 * math.pi,
                    min_score: float = 0.8) -> list[float]:
    """Locate the revival times of the + side-mode population.

    A revival is a recurrence of the initial state: the collapsed dynamics
    restarts and replays its own initial transient.  The detector slides
    the first ``template_width`` of the series over the post-plateau
    region and takes normalized-cross-correlation peaks above
    ``min_score`` as candidates; each must be backed by burst activity,
    meaning the population within one template width of the candidate
    exceeds the collapse-plateau mean by three plateau standard deviations
    (plateau taken over ``plateau_window``).  One revival is reported per
    ``min_burst_gap`` neighborhood, at the correlation peak refined by
    quadratic interpolation.  Times are in 2*c2*t.
    """
    t, y = series.times, series.n1
    if t[0] > 1e-12 or t[-1] < 2.0 * math.pi - 1e-9:
        raise ValueError("series must cover 2*c2*t in [0, 2*pi] for revival detection")
    spacing = float(np.max(np.diff(t)))
    if spacing > max_spacing + 1e-12:
        raise ValueError(
            f"grid too coarse for revival detection: spacing {spacing:.4g} "
            f"exceeds {max_spacing:.4g}"
        )
    lo, hi = plateau_window
    sel = (t >= lo) & (t <= hi)
    if not np.any(sel):
        raise ValueError("plateau window contains no grid points")
    mean = float(np.mean(y[sel]))
    std = float(np.std(y[sel]))
    threshold = mean + 3.0 * std

    nu = max(2, int(round(template_width / spacing)))
    if nu >= len(y):
        raise ValueError("template window exceeds the series length")
    template = y[:nu] - float(np.mean(y[:nu]))
    tnorm = float(np.sqrt(np.sum(template * template)))

    def restart_score(k):
        seg = y[k:k + nu]
        seg = seg - float(np.mean(seg))
        denom = tnorm * float(np.sqrt(np.sum(seg * seg)))
        return float(np.sum(template * seg)) / denom if denom > 0 else 0.0

    lags = [k for k in range(len(t) - nu) if t[k] > hi]
    scores = np.array([restart_score(k) for k in lags])

    # recurrence candidates: correlation peaks backed by burst activity
    candidates = []
    for i in range(1, len(lags) - 1):
        if scores[i] < min_score or scores[i] <= scores[i - 1] or scores[i] < scores[i + 1]:
            continue
        k = lags[i]
        if float(np.max(y[max(0, k - nu):k + nu])) <= threshold:
            continue
        candidates.append(i)

    # non-maximum suppression: one revival per burst neighborhood
    accepted: list[int] = []
    for i in sorted(candidates, key=lambda i: -scores[i]):
        if all(abs(t[lags[i]] - t[lags[j]]) >= min_burst_gap for j in accepted):
            accepted.append(i)

    revivals = []
    for i in sorted(accepted, key=lambda i: t[lags[i]]):
        shift = 0.0
        if 0 < i < len(scores) - 1:
            curv = scores[i - 1] - 2.0 * scores[i] + scores[i + 1]
            if curv < 0.0:
                shift = 0.5 * (scores[i - 1] - scores[i + 1]) / curv
        revivals.append(float(t[lags[i]] + shift * spacing))
    return revivals


@dataclass(frozen=True)
class CorrelationReport:
    """Populations, g2 functions and inequality margins over the time grid.

    Entries where any involved intensity falls below INTENSITY_FLOOR are
    NaN ("undefined"), never fabricated; the CSV layer serializes them as
    empty cells.
    """

    times: np.ndarray
    intensities: dict = field(repr=False)        # label -> array
    g2: dict = field(repr=False)                 # label -> array
    g2_pairs: dict = field(repr=False)           # (label, label) -> array
    classical_margin: dict = field(repr=False)   # (label, label) -> array
    quantum_margin: dict = field(repr=False)     # (label, label) -> array


def correlation_report(scn: FWMScenario, drop_constant_terms: bool = False) -> CorrelationReport:
    """Second-order coherence report for the four-wave-mixing run.

    g2_i = <a_i' a_i' a_i a_i> / I_i^2, g2_ij = <a_i' a_j' a_j a_i> /
    (I_i I_j); the classical margin divides g2_ij by sqrt(g2_i g2_j), the
    quantum margin by the intensity-corrected bound.
    """
    sector, psi_t = _evolved_amplitudes(scn, drop_constant_terms=drop_constant_terms)
    nt = psi_t.shape[1]
    labels = MODE_LABELS

    # All required observables are diagonal in the occupation basis, but we
    # evaluate them through the generic expectation machinery of fock.
    intens = {l: np.empty(nt) for l in labels}
    g2num = {l: np.empty(nt) for l in labels}
    pairnum = {p: np.empty(nt) for p in PAIRS}
    exprs_n = {l: fock.number(l) for l in labels}
    exprs_g2 = {l: fock.create(l) * fock.create(l) * fock.annihilate(l) * fock.annihilate(l)
                for l in labels}
    exprs_pair = {
        (i, j): fock.create(i) * fock.create(j) * fock.annihilate(j) * fock.annihilate(i)
        for (i, j) in PAIRS
    }
    for it in range(nt):
        psi = fock.from_amplitudes(sector, psi_t[:, it])
        for l in labels:
            intens[l][it] = fock.expectation(psi, exprs_n[l]).real
            g2num[l][it] = fock.expectation(psi, exprs_g2[l]).real
        for p in PAIRS:
            pairnum[p][it] = fock.expectation(psi, exprs_pair[p]).real

    g2 = {}
    for l in labels:
        with np.errstate(divide="ignore", invalid="ignore"):
            g = g2num[l] / intens[l] ** 2
        g[intens[l] < INTENSITY_FLOOR] = np.nan
        g2[l] = g

    g2p, rmarg, qmarg = {}, {}, {}
    for (i, j) in PAIRS:
        ok = (intens[i] >= INTENSITY_FLOOR) & (intens[j] >= INTENSITY_FLOOR)
        with np.errstate(divide="ignore", invalid="ignore"):
            gij = pairnum[(i, j)] / (intens[i] * intens[j])
            r = gij / np.sqrt(g2[i] * g2[j])
            q = gij / np.sqrt((g2[i] + 1.0 / intens[i]) * (g2[j] + 1.0 / intens[j]))
        for arr in (gij, r, q):
            arr[~ok] = np.nan
        g2p[(i, j)] = gij
        rmarg[(i, j)] = r
        qmarg[(i, j)] = q

    return CorrelationReport(
        times=scn.time_grid.copy(),
        intensities=intens,
        g2=g2,
        g2_pairs=g2p,
        classical_margin=rmarg,
        quantum_margin=qmarg,
    )
