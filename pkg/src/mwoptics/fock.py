"""Few-mode bosonic Fock-space engine.

Enumerates occupation-number sectors restricted by linear charge rules,
normal-orders ladder-operator expressions, assembles sparse Hamiltonians,
and evolves states exactly through a dense spectral decomposition.  All
types are immutable after construction and all operations are pure, so
values can be shared freely between workers.

Conventions: hbar = 1; time is carried in whatever frequency unit the
caller used for the Hamiltonian coefficients.  Basis ordering is always
lexicographic on occupation tuples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

RAISE = +1
LOWER = -1

HERMITICITY_TOL = 1e-10
NORM_TOL = 1e-10


class SectorNotFiniteError(ValueError):
    """The charge rules do not bound the admissible occupation set."""


class EmptySectorError(ValueError):
    """The charge rules admit no occupation tuple."""


class ChargeViolationError(ValueError):
    """An operator term couples states of different conserved charge."""


@dataclass(frozen=True)
class ModeSet:
    """An ordered collection of bosonic modes with unique short labels."""

    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) < 1:
            raise ValueError("a ModeSet needs at least one mode")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"mode labels must be unique, got {self.labels}")

    @property
    def mode_count(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"unknown mode label {label!r}; modes are {self.labels}") from None


@dataclass(frozen=True)
class ChargeRule:
    """Linear constraint sum_i coefficients[i] * n_i == value on occupations."""

    coefficients: tuple[int, ...]
    value: int

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(int(c) for c in self.coefficients))
        object.__setattr__(self, "value", int(self.value))

    def charge(self, occupations: Sequence[int]) -> int:
        return sum(c * n for c, n in zip(self.coefficients, occupations))


@dataclass(frozen=True)
class FockSector:
    """Complete, lexicographically ordered listing of one charge block.

    ``index`` maps each occupation tuple back to its basis position; it is
    built once at enumeration time and never mutated afterwards.
    """

    modes: ModeSet
    rules: tuple[ChargeRule, ...]
    states: tuple[tuple[int, ...], ...]
    index: dict = field(repr=False)

    @property
    def dimension(self) -> int:
        return len(self.states)

    def position(self, occupations: Sequence[int]) -> int:
        return self.index[tuple(occupations)]


def _mode_bounds(mode_count, rules, max_occupation):
    """Per-mode occupation upper bounds implied by the rules.

    Interval propagation to a fixpoint: each equality rule tightens the
    bound of every mode it touches given the current bounds of the others.
    Returns None entries for modes the rules leave unbounded.
    """
    if max_occupation is None:
        hi: list[int | None] = [None] * mode_count
    elif isinstance(max_occupation, int):
        hi = [max_occupation] * mode_count
    else:
        hi = [int(v) for v in max_occupation]
        if len(hi) != mode_count:
            raise ValueError("max_occupation must be a scalar or one bound per mode")

    for _ in range(20 * mode_count * max(1, len(rules)) + 20):
        changed = False
        for rule in rules:
            for i, ci in enumerate(rule.coefficients):
                if ci == 0:
                    continue
                # extreme values of sum_{j != i} c_j n_j over 0 <= n_j <= hi_j
                lo_other, hi_other = 0, 0
                for j, cj in enumerate(rule.coefficients):
                    if j == i or cj == 0:
                        continue
                    if cj > 0:
                        hi_other = None if (hi_other is None or hi[j] is None) else hi_other + cj * hi[j]
                    else:
                        lo_other = None if (lo_other is None or hi[j] is None) else lo_other + cj * hi[j]
                if ci > 0 and lo_other is not None:
                    bound = (rule.value - lo_other) // ci
                elif ci < 0 and hi_other is not None:
                    bound = (hi_other - rule.value) // (-ci)
                else:
                    continue
                if bound < 0:
                    raise EmptySectorError(
                        f"charge rules are contradictory: mode {i} would need occupation {bound}"
                    )
                if hi[i] is None or bound < hi[i]:
                    hi[i] = bound
                    changed = True
        if not changed:
            break
    return hi


def enumerate_sector(modes: ModeSet, rules: Iterable[ChargeRule],
                     max_occupation: int | Sequence[int] | None = None) -> FockSector:
    """List every admissible occupation tuple in lexicographic order.

    Parameters
    ----------
    modes : ModeSet
    rules : iterable of ChargeRule
        Equality constraints; a tuple is admitted iff it satisfies all.
    max_occupation : optional
        Explicit per-mode (or scalar) occupation cap.  Needed when the
        rules alone do not bound the set, e.g. for truncated full spaces
        used as brute-force oracles.

    Raises
    ------
    SectorNotFiniteError
        If neither the rules nor ``max_occupation`` bound some mode.
    EmptySectorError
        If no occupation tuple satisfies the rules.
    """
    rules = tuple(rules)
    m = modes.mode_count
    for rule in rules:
        if len(rule.coefficients) != m:
            raise ValueError(
                f"rule has {len(rule.coefficients)} coefficients for {m} modes"
            )

    hi = _mode_bounds(m, rules, max_occupation)
    unbounded = [modes.labels[i] for i, h in enumerate(hi) if h is None]
    if unbounded:
        raise SectorNotFiniteError(
            f"sector not finite: modes {unbounded} are unbounded by the rules; "
            "pass max_occupation to truncate explicitly"
        )

    coeffs = [tuple(r.coefficients) for r in rules]
    values = [r.value for r in rules]
    # residual extrema of each rule over modes >= depth d, given bounds hi
    suffix_lo = [[0] * len(rules) for _ in range(m + 1)]
    suffix_hi = [[0] * len(rules) for _ in range(m + 1)]
    for d in range(m - 1, -1, -1):
        for r in range(len(rules)):
            c = coeffs[r][d]
            lo = min(0, c * hi[d])
            hj = max(0, c * hi[d])
            suffix_lo[d][r] = suffix_lo[d + 1][r] + lo
            suffix_hi[d][r] = suffix_hi[d + 1][r] + hj

    states: list[tuple[int, ...]] = []
    occ = [0] * m

    def walk(d: int, partial: list[int]):
        if d == m:
            states.append(tuple(occ))
            return
        for n in range(hi[d] + 1):
            occ[d] = n
            nxt = [partial[r] + coeffs[r][d] * n for r in range(len(rules))]
            ok = True
            for r in range(len(rules)):
                remaining = values[r] - nxt[r]
                if not (suffix_lo[d + 1][r] <= remaining <= suffix_hi[d + 1][r]):
                    ok = False
                    break
            if ok:
                walk(d + 1, nxt)
        occ[d] = 0

    walk(0, [0] * len(rules))
    if not states:
        raise EmptySectorError("charge rules admit no occupation tuple")
    index = {s: k for k, s in enumerate(states)}
    return FockSector(modes=modes, rules=rules, states=tuple(states), index=index)


# ---------------------------------------------------------------------------
# Operator expressions

Factor = tuple[str, int]          # (mode label, RAISE or LOWER)
Term = tuple[complex, tuple[Factor, ...]]


def _as_terms(value) -> tuple[Term, ...]:
    if isinstance(value, OperatorExpression):
        return value.terms
    if isinstance(value, (int, float, complex)):
        return ((complex(value), ()),)
    raise TypeError(f"cannot combine OperatorExpression with {type(value).__name__}")


@dataclass(frozen=True)
class OperatorExpression:
    """Sum of ladder-operator monomials with complex coefficients.

    Terms are stored as written; use :func:`canonicalize` to normal-order.
    Expressions compose with ``+``, ``-``, ``*`` (scalars included) and
    ``.dagger()``.
    """

    terms: tuple[Term, ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "terms",
            tuple((complex(c), tuple((str(l), int(k)) for l, k in f)) for c, f in self.terms),
        )

    def __add__(self, other):
        return OperatorExpression(self.terms + _as_terms(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self + ((-1) * other if isinstance(other, OperatorExpression) else -other)

    def __rsub__(self, other):
        return (-1) * self + other

    def __neg__(self):
        return (-1) * self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return OperatorExpression(tuple((c * other, f) for c, f in self.terms))
        other_terms = _as_terms(other)
        return OperatorExpression(
            tuple((c1 * c2, f1 + f2) for c1, f1 in self.terms for c2, f2 in other_terms)
        )

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def dagger(self) -> "OperatorExpression":
        return OperatorExpression(
            tuple(
                (np.conj(c), tuple((l, -k) for l, k in reversed(f)))
                for c, f in self.terms
            )
        )

    def mode_labels(self) -> set[str]:
        return {l for _, f in self.terms for l, _ in f}

    def __repr__(self):
        if not self.terms:
            return "OperatorExpression(0)"
        parts = []
        for c, f in self.terms:
            mono = "".join(l + ("'" if k == RAISE else "") + " " for l, k in f).strip()
            parts.append(f"({c:g})" + (f" {mono}" if mono else ""))
        return "OperatorExpression(" + " + ".join(parts) + ")"


def create(label: str) -> OperatorExpression:
    return OperatorExpression(((1.0 + 0j, ((label, RAISE),)),))


def annihilate(label: str) -> OperatorExpression:
    return OperatorExpression(((1.0 + 0j, ((label, LOWER),)),))


def number(label: str) -> OperatorExpression:
    return create(label) * annihilate(label)


def identity(coefficient: complex = 1.0) -> OperatorExpression:
    return OperatorExpression(((complex(coefficient), ()),))


def canonicalize(expr: OperatorExpression) -> OperatorExpression:
    """Normal-order an expression using [a, a'] = 1 per mode.

    Raising operators end up left of lowering operators, each group sorted
    by mode label, and identical monomials are merged.  Idempotent.
    """
    collected: dict[tuple[Factor, ...], complex] = {}
    stack: list[Term] = list(expr.terms)
    while stack:
        coeff, factors = stack.pop()
        swapped = False
        for i in range(len(factors) - 1):
            (l1, k1), (l2, k2) = factors[i], factors[i + 1]
            if k1 == LOWER and k2 == RAISE:
                exchanged = factors[:i] + (factors[i + 1], factors[i]) + factors[i + 2:]
                stack.append((coeff, exchanged))
                if l1 == l2:
                    stack.append((coeff, factors[:i] + factors[i + 2:]))
                swapped = True
                break
        if swapped:
            continue
        n_raise = sum(1 for _, k in factors if k == RAISE)
        key = tuple(sorted(factors[:n_raise])) + tuple(sorted(factors[n_raise:]))
        collected[key] = collected.get(key, 0.0) + coeff
    terms = tuple(
        (c, f) for f, c in sorted(collected.items(), key=lambda kv: (len(kv[0]), kv[0])) if c != 0
    )
    return OperatorExpression(terms)


def _compile_terms(expr: OperatorExpression, modes: ModeSet):
    return [
        (coeff, [(modes.index(label), kind) for label, kind in factors])
        for coeff, factors in expr.terms
    ]


def _apply_factors(compiled_factors, occupations):
    """Apply a ladder monomial (rightmost factor first) to |occupations>.

    Returns (amplitude, resulting occupation tuple); amplitude 0 when an
    annihilator hits an empty mode.
    """
    occ = list(occupations)
    amp = 1.0
    for idx, kind in reversed(compiled_factors):
        n = occ[idx]
        if kind == LOWER:
            if n == 0:
                return 0.0, None
            amp *= math.sqrt(n)
            occ[idx] = n - 1
        else:
            amp *= math.sqrt(n + 1)
            occ[idx] = n + 1
    return amp, tuple(occ)


def _term_charge_deltas(factors, modes: ModeSet):
    delta = [0] * modes.mode_count
    for label, kind in factors:
        delta[modes.index(label)] += kind
    return delta


def _format_term(coeff, factors):
    mono = " ".join(l + ("'" if k == RAISE else "") for l, k in factors) or "1"
    return f"({coeff:g}) {mono}"


def build_matrix(expr: OperatorExpression, sector: FockSector) -> sp.csr_matrix:
    """Matrix of an operator expression on a sector, in sparse CSR form.

    Every term must commute with every charge rule of the sector (checked
    through the term's net occupation change).  With an explicit
    truncation, matrix elements reaching beyond the truncated listing are
    dropped, which is the usual projected-Hamiltonian convention.
    """
    modes = sector.modes
    for coeff, factors in expr.terms:
        delta = _term_charge_deltas(factors, modes)
        for rule in sector.rules:
            if sum(c * d for c, d in zip(rule.coefficients, delta)) != 0:
                raise ChargeViolationError(
                    f"charge violation: term {_format_term(coeff, factors)} changes "
                    f"the charge of rule {rule.coefficients}={rule.value}"
                )

    compiled = _compile_terms(expr, modes)
    rows, cols, vals = [], [], []
    for col, occ in enumerate(sector.states):
        for coeff, cfactors in compiled:
            amp, target = _apply_factors(cfactors, occ)
            if amp == 0.0:
                continue
            row = sector.index.get(target)
            if row is not None:
                rows.append(row)
                cols.append(col)
                vals.append(coeff * amp)
    dim = sector.dimension
    return sp.coo_matrix(
        (np.asarray(vals, dtype=complex), (rows, cols)), shape=(dim, dim)
    ).tocsr()


# ---------------------------------------------------------------------------
# States and dynamics

@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        U = np.asarray(self.eigenvectors, dtype=complex)
        ev.flags.writeable = False
        U.flags.writeable = False
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "eigenvectors", U)

    @property
    def dimension(self) -> int:
        return len(self.eigenvalues)


def diagonalize(H, hermiticity_tol: float = HERMITICITY_TOL) -> SpectralDecomposition:
    """Dense spectral decomposition of a Hermitian matrix.

    Accepts dense or sparse input.  Raises ValueError for non-Hermitian
    input and RuntimeError if the decomposition fails its own
    reconstruction/unitarity checks.
    """
    Hd = H.toarray() if sp.issparse(H) else np.asarray(H, dtype=complex)
    if Hd.ndim != 2 or Hd.shape[0] != Hd.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {Hd.shape}")
    scale = max(1.0, float(np.abs(Hd).max()) if Hd.size else 0.0)
    herm_err = float(np.abs(Hd - Hd.conj().T).max())
    if herm_err > hermiticity_tol * scale:
        raise ValueError(
            f"matrix is not Hermitian: max |H - H^dag| = {herm_err:.3e} "
            f"exceeds {hermiticity_tol:.1e} * {scale:.3e}"
        )
    w, U = np.linalg.eigh((Hd + Hd.conj().T) / 2.0)
    recon_err = float(np.abs(Hd - (U * w) @ U.conj().T).max())
    unit_err = float(np.abs(U.conj().T @ U - np.eye(len(w))).max())
    if recon_err > 1e-10 * scale or unit_err > 1e-10:
        raise RuntimeError(
            f"spectral decomposition failed validation: reconstruction {recon_err:.3e}, "
            f"unitarity {unit_err:.3e}"
        )
    return SpectralDecomposition(eigenvalues=w, eigenvectors=U)


@dataclass(frozen=True)
class StateVector:
    """Unit-norm complex amplitudes over a sector's basis."""

    sector: FockSector
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.sector.dimension,):
            raise ValueError(
                f"amplitude vector of length {amps.shape} does not match "
                f"sector dimension {self.sector.dimension}"
            )
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > 1e-8:
            raise ValueError(f"state norm {norm} is not 1 within 1e-8; normalize first")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def basis_state(sector: FockSector, occupations: Sequence[int]) -> StateVector:
    """The Fock product state |occupations> as a StateVector."""
    key = tuple(int(n) for n in occupations)
    if key not in sector.index:
        raise ValueError(f"occupation {key} is not in the sector")
    amps = np.zeros(sector.dimension, dtype=complex)
    amps[sector.index[key]] = 1.0
    return StateVector(sector=sector, amplitudes=amps)


def from_amplitudes(sector: FockSector, amplitudes, normalize: bool = False) -> StateVector:
    amps = np.asarray(amplitudes, dtype=complex)
    if normalize:
        n = np.linalg.norm(amps)
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        amps = amps / n
    return StateVector(sector=sector, amplitudes=amps)


def evolve(psi0: StateVector, spec: SpectralDecomposition, t: float,
           hbar_unit: float = 1.0, norm_tol: float = NORM_TOL) -> StateVector:
    """psi(t) = U exp(-i E t / hbar) U^dag psi0."""
    if spec.dimension != psi0.sector.dimension:
        raise ValueError(
            f"decomposition dimension {spec.dimension} does not match state "
            f"dimension {psi0.sector.dimension}"
        )
    U = spec.eigenvectors
    w = U.conj().T @ psi0.amplitudes
    w = w * np.exp(-1j * spec.eigenvalues * (t / hbar_unit))
    amps = U @ w
    drift = abs(float(np.linalg.norm(amps)) - 1.0)
    if drift > norm_tol:
        raise RuntimeError(f"norm drifted by {drift:.3e} during evolution")
    return StateVector(sector=psi0.sector, amplitudes=amps)


def expectation(psi: StateVector, expr: OperatorExpression) -> complex:
    """<psi| expr |psi>.

    Terms that change a conserved charge map every basis state out of the
    sector and contribute exactly zero, so charge-violating expressions
    are allowed here.
    """
    sector = psi.sector
    compiled = _compile_terms(expr, sector.modes)
    amps = psi.amplitudes
    total = 0.0 + 0.0j
    for coeff, cfactors in compiled:
        acc = 0.0 + 0.0j
        for k, occ in enumerate(sector.states):
            a = amps[k]
            if a == 0:
                continue
            amp, target = _apply_factors(cfactors, occ)
            if amp == 0.0:
                continue
            j = sector.index.get(target)
            if j is not None:
                acc += np.conj(amps[j]) * amp * a
        total += coeff * acc
    return complex(total)
