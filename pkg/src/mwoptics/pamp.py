"""Three-mode atom-photon parametric amplifier with Gaussian-state dynamics.

One quantized optical probe mode couples to two atomic momentum side modes
through an undepleted classical pump.  The quadratic Hamiltonian keeps
Gaussian states Gaussian, so the exact dynamics reduces to a linear map of
the mode vector (probe, side+, side-dagger); first and second moments are
propagated by the induced congruence and fourth-order correlations follow
from Wick's theorem.

Times are the dimensionless omega_r * t; hbar = 1 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import fock

MODE_NAMES = ("a", "cp", "cm")        # probe, side +K, side -K
SYMPLECTIC_TOL = 1e-9
INTENSITY_FLOOR = 1e-12
# eigenbasis roundoff scales like eps * cond(V); keep it safely below the
# 1e-9 commutator tolerance before falling back to scaling-and-squaring
EIGENBASIS_COND_LIMIT = 1e6


class PropagatorError(RuntimeError):
    """The linear propagator stopped satisfying the bosonic commutators."""


@dataclass(frozen=True)
class PumpProbeInput:
    """Physical pump-probe parameters (hbar = 1 unit system).

    ``detuning`` is the pump detuning from the nearest electronic level;
    ``pump_frequency`` the pump carrier, needed for the pump-probe
    detuning.  ``light_speed`` and ``epsilon0`` are carried explicitly so
    any consistent unit system can be used.
    """

    dipole: float
    cavity_length: float
    cross_section: float
    probe_wavenumber: float
    detuning: float
    pump_rabi: complex
    atom_number: float
    recoil_momentum: float
    mass: float
    pump_frequency: float
    light_speed: float
    epsilon0: float

    def __post_init__(self):
        if self.detuning == 0:
            raise ValueError("detuning must be nonzero")
        if self.atom_number < 0:
            raise ValueError("atom_number must be nonnegative")
        if self.mass <= 0 or self.recoil_momentum == 0:
            raise ValueError("recoil momentum and mass must give a positive recoil frequency")


@dataclass(frozen=True)
class ThreeModeParams:
    """Dimensionless coupling and detuning plus the recoil frequency scale."""

    chi: float
    delta: float
    omega_r: float

    def __post_init__(self):
        if self.chi < 0:
            raise ValueError("chi is nonnegative by phase convention")
        if self.omega_r <= 0:
            raise ValueError("omega_r must be positive")


def derive_params(inp: PumpProbeInput) -> ThreeModeParams:
    """Reduce pump-probe physics to (chi, delta, omega_r).

    g = dipole * sqrt(c k / (2 eps0 L S)), omega_r = K^2 / (2 M), chi =
    |g| |Omega0| sqrt(N) / (2 omega_r |Delta|) with the sign of the
    detuning absorbed into the probe-mode phase, and delta the pump-probe
    detuning in recoil units.
    """
    g = inp.dipole * math.sqrt(
        inp.light_speed * inp.probe_wavenumber
        / (2.0 * inp.epsilon0 * inp.cavity_length * inp.cross_section)
    )
    omega_r = inp.recoil_momentum ** 2 / (2.0 * inp.mass)
    chi = abs(g) * abs(inp.pump_rabi) * math.sqrt(inp.atom_number) / (
        2.0 * omega_r * abs(inp.detuning)
    )
    probe_frequency = inp.light_speed * inp.probe_wavenumber
    delta = (inp.pump_frequency - probe_frequency) / omega_r
    return ThreeModeParams(chi=chi, delta=delta, omega_r=omega_r)


def drift_matrix(p: ThreeModeParams) -> np.ndarray:
    """Generator of the Heisenberg flow of v = (probe, side+, side-dagger).

    i dv/dt = omega_r * M v.
    """
    chi, delta = p.chi, p.delta
    return np.array(
        [
            [-delta, chi, chi],
            [chi, 1.0, 0.0],
            [-chi, 0.0, -1.0],
        ],
        dtype=complex,
    )


def hamiltonian_expression(p: ThreeModeParams) -> fock.OperatorExpression:
    """The three-mode Hamiltonian in units of omega_r, for Fock cross-checks."""
    a, ad = fock.annihilate("a"), fock.create("a")
    cp, cpd = fock.annihilate("cp"), fock.create("cp")
    cm, cmd = fock.annihilate("cm"), fock.create("cm")
    return (
        fock.number("cp")
        + fock.number("cm")
        - p.delta * fock.number("a")
        + p.chi * (ad * cmd + ad * cp + cpd * a + cm * a)
    )


# ---------------------------------------------------------------------------
# Gaussian states

@dataclass(frozen=True)
class GaussianState:
    """Means plus full normal and anomalous second moments of the 3 modes.

    means[i] = <b_i>, normal[i, j] = <b_i' b_j>, anomalous[i, j] =
    <b_i b_j> for b = (probe, side+, side-).
    """

    means: np.ndarray
    normal: np.ndarray
    anomalous: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.means, dtype=complex).reshape(3)
        N = np.asarray(self.normal, dtype=complex).reshape(3, 3)
        A = np.asarray(self.anomalous, dtype=complex).reshape(3, 3)
        for arr in (m, N, A):
            arr.flags.writeable = False
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "normal", N)
        object.__setattr__(self, "anomalous", A)

    @classmethod
    def vacuum(cls) -> "GaussianState":
        z = np.zeros((3, 3), dtype=complex)
        return cls(means=np.zeros(3, dtype=complex), normal=z.copy(), anomalous=z.copy())

    @classmethod
    def coherent(cls, alpha_probe: complex = 0.0, alpha_plus: complex = 0.0,
                 alpha_minus: complex = 0.0) -> "GaussianState":
        m = np.array([alpha_probe, alpha_plus, alpha_minus], dtype=complex)
        return cls(means=m, normal=np.outer(m.conj(), m), anomalous=np.outer(m, m))

    @property
    def intensities(self) -> np.ndarray:
        return np.real(np.diag(self.normal))

    def central_moments(self):
        m = self.means
        return (
            self.normal - np.outer(m.conj(), m),
            self.anomalous - np.outer(m, m),
        )

    def quadrature_covariance(self) -> np.ndarray:
        """6x6 symmetric covariance of (x1..x3, p1..p3), vacuum = I/2."""
        Nc, Ac = self.central_moments()
        sxx = np.real(Ac) + np.real(Nc) + 0.5 * np.eye(3)
        spp = -np.real(Ac) + np.real(Nc) + 0.5 * np.eye(3)
        sxp = np.imag(Ac) + np.imag(Nc)
        return np.block([[sxx, sxp], [sxp.T, spp]])

    def validate(self, tol: float = 1e-9):
        """Check Hermiticity, symmetry and the bosonic uncertainty bound."""
        Nc, Ac = self.central_moments()
        if np.abs(Nc - Nc.conj().T).max() > 1e-10:
            raise ValueError("normal-moment matrix is not Hermitian")
        if np.abs(Ac - Ac.T).max() > 1e-10:
            raise ValueError("anomalous-moment matrix is not symmetric")
        if np.linalg.eigvalsh((Nc + Nc.conj().T) / 2).min() < -tol:
            raise ValueError("central normal moments are not positive semidefinite")
        omega = np.block(
            [[np.zeros((3, 3)), np.eye(3)], [-np.eye(3), np.zeros((3, 3))]]
        )
        check = self.quadrature_covariance() + 0.5j * omega
        if np.linalg.eigvalsh((check + check.conj().T) / 2).min() < -tol:
            raise ValueError("covariance violates the bosonic uncertainty bound")
        return self


def mode_propagator(p: ThreeModeParams, t: float) -> np.ndarray:
    """U(t) = exp(-i omega_r M t) for the mixed vector (a, c+, c-')."""
    M = drift_matrix(p)
    lam, V = np.linalg.eig(M)
    if np.linalg.cond(V) > EIGENBASIS_COND_LIMIT:
        # near-defective M (instability threshold); fall back to
        # scaling-and-squaring
        return scipy.linalg.expm(-1j * p.omega_r * t * M)
    phases = np.exp(-1j * p.omega_r * lam * t)
    return (V * phases) @ np.linalg.inv(V)


def _mode_blocks(U: np.ndarray):
    """Split the mixed-vector propagator into b' = E b + F b^dagger blocks."""
    E = np.zeros((3, 3), dtype=complex)
    F = np.zeros((3, 3), dtype=complex)
    E[0, 0], E[0, 1] = U[0, 0], U[0, 1]
    E[1, 0], E[1, 1] = U[1, 0], U[1, 1]
    E[2, 2] = np.conj(U[2, 2])
    F[0, 2], F[1, 2] = U[0, 2], U[1, 2]
    F[2, 0], F[2, 1] = np.conj(U[2, 0]), np.conj(U[2, 1])
    return E, F


def propagate(state0: GaussianState, p: ThreeModeParams, t: float) -> GaussianState:
    """Evolve a Gaussian state for a time t (in seconds if omega_r is in rad/s).

    The commutator structure is re-checked on the transported blocks; a
    violation means the propagator construction itself broke and raises
    PropagatorError.
    """
    U = mode_propagator(p, t)
    E, F = _mode_blocks(U)
    scale = max(1.0, abs(p.omega_r * t))
    comm_err = np.abs(E @ E.conj().T - F @ F.conj().T - np.eye(3)).max()
    sym_err = np.abs(E @ F.T - F @ E.T).max()
    if max(comm_err, sym_err) > SYMPLECTIC_TOL * scale:
        raise PropagatorError(
            f"propagator inconsistent: commutator drift {comm_err:.3e}, "
            f"pairing drift {sym_err:.3e}"
        )
    m, N, A = state0.means, state0.normal, state0.anomalous
    Ec, Fc = E.conj(), F.conj()
    eye = np.eye(3)
    m_out = E @ m + F @ m.conj()
    N_out = (
        Ec @ N @ E.T
        + Ec @ A.conj() @ F.T
        + Fc @ A @ E.T
        + Fc @ (N.T + eye) @ F.T
    )
    A_out = (
        E @ A @ E.T
        + E @ (N.T + eye) @ F.T
        + F @ N @ E.T
        + F @ A.conj() @ F.T
    )
    return GaussianState(means=m_out, normal=N_out, anomalous=A_out)


# ---------------------------------------------------------------------------
# Correlations

@dataclass(frozen=True)
class ThreeModeCorrelations:
    """Intensities, g2 functions and inequality margins; NaN = undefined."""

    intensities: np.ndarray            # (I_a, I_+, I_-)
    g2: np.ndarray                     # single-mode, same order
    g2_am: float
    g2_ap: float
    g2_mp: float
    r_am: float
    r_ap: float
    r_mp: float
    q_am: float
    q_ap: float
    q_mp: float


def _fourth_moment(m, Nc, Ac, i, j):
    """<b_i' b_j' b_j b_i> for a Gaussian state with means m."""
    mi, mj = m[i], m[j]
    term = (
        abs(mi) ** 2 * abs(mj) ** 2
        + abs(mi) ** 2 * Nc[j, j]
        + abs(mj) ** 2 * Nc[i, i]
        + np.conj(mi) * mj * Nc[j, i]
        + mi * np.conj(mj) * Nc[i, j]
        + np.conj(mi) * np.conj(mj) * Ac[i, j]
        + mi * mj * np.conj(Ac[i, j])
        + abs(Ac[i, j]) ** 2
        + abs(Nc[i, j]) ** 2
        + Nc[i, i] * Nc[j, j]
    )
    return np.real(term)


def correlations(state: GaussianState) -> ThreeModeCorrelations:
    """Normally ordered second-order coherences by Wick contraction."""
    m = state.means
    Nc, Ac = state.central_moments()
    I = state.intensities

    def g2_single(i):
        if I[i] < INTENSITY_FLOOR:
            return math.nan
        return _fourth_moment(m, Nc, Ac, i, i) / I[i] ** 2

    def g2_pair(i, j):
        if I[i] < INTENSITY_FLOOR or I[j] < INTENSITY_FLOOR:
            return math.nan
        return _fourth_moment(m, Nc, Ac, i, j) / (I[i] * I[j])

    g2 = np.array([g2_single(i) for i in range(3)])
    g2_am, g2_ap, g2_mp = g2_pair(0, 2), g2_pair(0, 1), g2_pair(2, 1)

    def margins(gij, i, j):
        if math.isnan(gij) or math.isnan(g2[i]) or math.isnan(g2[j]):
            return math.nan, math.nan
        r = gij / math.sqrt(g2[i] * g2[j])
        q = gij / math.sqrt((g2[i] + 1.0 / I[i]) * (g2[j] + 1.0 / I[j]))
        return r, q

    r_am, q_am = margins(g2_am, 0, 2)
    r_ap, q_ap = margins(g2_ap, 0, 1)
    r_mp, q_mp = margins(g2_mp, 2, 1)
    return ThreeModeCorrelations(
        intensities=I, g2=g2,
        g2_am=g2_am, g2_ap=g2_ap, g2_mp=g2_mp,
        r_am=r_am, r_ap=r_ap, r_mp=r_mp,
        q_am=q_am, q_ap=q_ap, q_mp=q_mp,
    )


def spontaneous_g2_am_closed_form(I_a: float, I_p: float, I_m: float) -> float:
    """Closed-form probe/side- cross-coherence for the vacuum-seeded case."""
    return math.sqrt((2.0 + 1.0 / (I_a + I_p)) * (2.0 + 1.0 / I_m))


@dataclass(frozen=True)
class CrossoverRow:
    alpha: complex
    intensities: np.ndarray
    g2_am: float
    classical_bound: float
    quantum_bound: float
    gap: float
    r_am: float
    q_am: float


def crossover_scan(p: ThreeModeParams, probe_amplitudes, t: float) -> list[CrossoverRow]:
    """Sweep an injected coherent probe and watch g2_am approach its
    classical bound.

    Amplitudes must be sorted by modulus; matter modes start in vacuum.
    """
    amps = list(probe_amplitudes)
    moduli = [abs(a) for a in amps]
    if any(m2 < m1 for m1, m2 in zip(moduli, moduli[1:])):
        raise ValueError("probe amplitudes must be sorted by modulus")
    rows = []
    for alpha in amps:
        state = propagate(GaussianState.coherent(alpha_probe=alpha), p, t)
        cor = correlations(state)
        cb = cor.g2_am / cor.r_am if cor.r_am else math.nan
        qb = cor.g2_am / cor.q_am if cor.q_am else math.nan
        rows.append(
            CrossoverRow(
                alpha=complex(alpha),
                intensities=cor.intensities,
                g2_am=cor.g2_am,
                classical_bound=cb,
                quantum_bound=qb,
                gap=cor.g2_am - cb,
                r_am=cor.r_am,
                q_am=cor.q_am,
            )
        )
    return rows


def drift_matrix_from_commutators(p: ThreeModeParams, cutoff: int = 6) -> np.ndarray:
    """Extract the drift matrix from commutators on a truncated Fock space.

    Builds matrices of (probe, side+, side-dagger) and of the Hamiltonian
    (in recoil units) on the occupations-below-cutoff space, forms the
    commutators [v_i, h], and projects them back onto the mode operators.
    Matrix elements within two quanta of the cutoff are excluded, where
    truncation corrupts the commutator.  Independent of drift_matrix.
    """
    modes = fock.ModeSet(MODE_NAMES)
    sector = fock.enumerate_sector(modes, (), max_occupation=cutoff)
    h = fock.build_matrix(hamiltonian_expression(p), sector).toarray()
    vs = [
        fock.build_matrix(fock.annihilate("a"), sector).toarray(),
        fock.build_matrix(fock.annihilate("cp"), sector).toarray(),
        fock.build_matrix(fock.create("cm"), sector).toarray(),
    ]
    interior = [k for k, occ in enumerate(sector.states) if max(occ) <= cutoff - 2]
    block = np.ix_(interior, interior)
    M_hat = np.empty((3, 3), dtype=complex)
    for i in range(3):
        comm = (vs[i] @ h - h @ vs[i])[block]
        residual = comm.copy()
        for j in range(3):
            vj = vs[j][block]
            M_hat[i, j] = np.vdot(vj, comm) / np.vdot(vj, vj)
            residual = residual - M_hat[i, j] * vj
        if np.abs(residual).max() > 1e-9:
            raise RuntimeError(
                "commutator is not a combination of the mode operators; "
                f"residual {np.abs(residual).max():.3e}"
            )
    return M_hat


# ---------------------------------------------------------------------------
# Truncated-Fock cross-check

def fock_crosscheck(p: ThreeModeParams, times, cutoff: int = 30):
    """Exact truncated-Fock dynamics of the vacuum-seeded amplifier.

    Works in the conserved sector n_a + n_+ - n_- = 0 with per-mode
    occupation cutoff.  Refuses (ValueError) when any mean occupation
    grows beyond cutoff/10, where truncation would corrupt the oracle.
    Returns a dict of arrays keyed like the CSV columns.
    """
    modes = fock.ModeSet(MODE_NAMES)
    sector = fock.enumerate_sector(
        modes, (fock.ChargeRule((1, 1, -1), 0),), max_occupation=cutoff
    )
    H = fock.build_matrix(hamiltonian_expression(p), sector)
    spec = fock.diagonalize(H)
    psi0 = fock.basis_state(sector, (0, 0, 0))

    n_ops = {lab: fock.number(lab) for lab in MODE_NAMES}
    pair_ops = {
        key: fock.create(i) * fock.create(j) * fock.annihilate(j) * fock.annihilate(i)
        for key, (i, j) in {
            "am": ("a", "cm"), "ap": ("a", "cp"), "mp": ("cm", "cp")
        }.items()
    }
    times = np.asarray(times, dtype=float)
    out = {
        "omega_r_t": times,
        "I_a": np.empty_like(times), "I_p": np.empty_like(times), "I_m": np.empty_like(times),
        "g2_am": np.empty_like(times), "g2_ap": np.empty_like(times), "g2_mp": np.empty_like(times),
    }
    for k, wt in enumerate(times):
        psi = fock.evolve(psi0, spec, wt)        # H is already in omega_r units
        I = {lab: fock.expectation(psi, n_ops[lab]).real for lab in MODE_NAMES}
        if max(I.values()) > cutoff / 10.0:
            raise ValueError(
                f"occupation {max(I.values()):.2f} at omega_r t = {wt:.3g} exceeds "
                f"cutoff/10 = {cutoff / 10:.1f}; the truncated oracle is not trustworthy"
            )
        out["I_a"][k], out["I_p"][k], out["I_m"][k] = I["a"], I["cp"], I["cm"]
        pair = {key: fock.expectation(psi, op).real for key, op in pair_ops.items()}
        out["g2_am"][k] = pair["am"] / (I["a"] * I["cm"]) if I["a"] * I["cm"] > 0 else math.nan
        out["g2_ap"][k] = pair["ap"] / (I["a"] * I["cp"]) if I["a"] * I["cp"] > 0 else math.nan
        out["g2_mp"][k] = pair["mp"] / (I["cm"] * I["cp"]) if I["cm"] * I["cp"] > 0 else math.nan
    return out
