import numpy as np
import pytest

from mwoptics import fock
from mwoptics.fock import (
    ChargeRule,
    ChargeViolationError,
    EmptySectorError,
    ModeSet,
    SectorNotFiniteError,
    annihilate,
    basis_state,
    build_matrix,
    canonicalize,
    create,
    diagonalize,
    enumerate_sector,
    evolve,
    expectation,
    from_amplitudes,
    identity,
    number,
)

FWM_MODES = ModeSet(("a1", "am1", "a01", "a02"))


def fwm_rules(n1, n2, m):
    return (
        ChargeRule((1, 0, 1, 0), n1),
        ChargeRule((0, 1, 0, 1), n2),
        ChargeRule((1, -1, 0, 0), m),
    )


def full_space(labels, n_max):
    return enumerate_sector(ModeSet(labels), (), max_occupation=n_max)


class TestEnumerateSector:
    def test_small_fwm_block(self):
        sector = enumerate_sector(FWM_MODES, fwm_rules(2, 2, 0))
        assert sector.states == ((0, 0, 2, 2), (1, 1, 1, 1), (2, 2, 0, 0))

    def test_zero_total_charge_gives_vacuum(self):
        modes = ModeSet(("x", "y", "z"))
        sector = enumerate_sector(modes, (ChargeRule((1, 1, 1), 0),))
        assert sector.states == ((0, 0, 0),)

    def test_offset_sidemode_block_dimension(self):
        sector = enumerate_sector(FWM_MODES, fwm_rules(50, 50, 5))
        assert sector.dimension == 46

    def test_lexicographic_order(self):
        sector = enumerate_sector(FWM_MODES, fwm_rules(3, 3, 1))
        assert list(sector.states) == sorted(sector.states)
        assert all(sector.index[s] == k for k, s in enumerate(sector.states))

    def test_unbounded_rules_rejected(self):
        modes = ModeSet(("x", "y"))
        with pytest.raises(SectorNotFiniteError):
            enumerate_sector(modes, (ChargeRule((1, -1), 0),))
        with pytest.raises(SectorNotFiniteError):
            enumerate_sector(modes, ())

    def test_contradictory_rules_rejected(self):
        modes = ModeSet(("x",))
        with pytest.raises(EmptySectorError):
            enumerate_sector(modes, (ChargeRule((1,), 1), ChargeRule((1,), 2)))
        with pytest.raises(EmptySectorError):
            enumerate_sector(modes, (ChargeRule((1,), -1),))

    def test_truncated_full_space(self):
        sector = full_space(("a",), 3)
        assert sector.states == ((0,), (1,), (2,), (3,))

    def test_rules_combine_with_truncation(self):
        # charge alone is unbounded; the cap makes it finite
        modes = ModeSet(("a", "p", "m"))
        sector = enumerate_sector(
            modes, (ChargeRule((1, 1, -1), 0),), max_occupation=4
        )
        assert all(na + npl == nm for na, npl, nm in sector.states)
        assert all(max(s) <= 4 for s in sector.states)


class TestCanonicalize:
    def test_single_commutator(self):
        expr = canonicalize(annihilate("a") * create("a"))
        assert expr.terms == ((1 + 0j, ()), (1 + 0j, (("a", fock.RAISE), ("a", fock.LOWER))))

    def test_already_normal_ordered(self):
        expr = number("a")
        assert canonicalize(expr).terms == expr.terms

    def test_double_pair(self):
        a, ad = annihilate("a"), create("a")
        got = canonicalize(a * ad * a * ad)
        want = canonicalize(
            identity(1.0)
            + 3.0 * number("a")
            + ad * ad * a * a
        )
        assert got.terms == want.terms

    def test_idempotent(self):
        a, ad = annihilate("a"), create("b")
        expr = a * ad * a + 2.0 * ad * a
        once = canonicalize(expr)
        assert canonicalize(once).terms == once.terms

    def test_distinct_modes_commute(self):
        left = canonicalize(annihilate("a") * create("b"))
        right = canonicalize(create("b") * annihilate("a"))
        assert left.terms == right.terms

    def test_dagger_of_canonical_product(self):
        expr = create("a") * create("b") * annihilate("a")
        roundtrip = canonicalize(expr.dagger().dagger())
        assert roundtrip.terms == canonicalize(expr).terms

    def test_random_monomials_match_direct_products(self):
        """Normal ordering equals the raw ordered product on a truncation."""
        rng = np.random.default_rng(7)
        n_max = 10
        sector = full_space(("a", "b"), n_max)
        single = {
            ("a", fock.RAISE): build_matrix(create("a"), sector).toarray(),
            ("a", fock.LOWER): build_matrix(annihilate("a"), sector).toarray(),
            ("b", fock.RAISE): build_matrix(create("b"), sector).toarray(),
            ("b", fock.LOWER): build_matrix(annihilate("b"), sector).toarray(),
        }
        for _ in range(25):
            length = int(rng.integers(1, 7))
            factors = [
                (("a", "b")[rng.integers(2)], (fock.RAISE, fock.LOWER)[rng.integers(2)])
                for _ in range(length)
            ]
            raw = fock.OperatorExpression(((1.0 + 0j, tuple(factors)),))
            direct = np.eye(sector.dimension, dtype=complex)
            for f in factors:
                direct = direct @ single[f]
            canon = build_matrix(canonicalize(raw), sector).toarray()
            # compare away from the truncation boundary
            safe = [
                k for k, occ in enumerate(sector.states)
                if max(occ) <= n_max - length
            ]
            sub = np.ix_(safe, safe)
            np.testing.assert_allclose(canon[sub], direct[sub], atol=1e-12)


class TestBuildMatrix:
    def test_number_operator_diagonal(self):
        sector = full_space(("a",), 3)
        H = build_matrix(number("a"), sector).toarray()
        np.testing.assert_allclose(H, np.diag([0.0, 1.0, 2.0, 3.0]), atol=0)

    def test_pair_exchange_elements(self):
        n1 = n2 = 4
        sector = enumerate_sector(FWM_MODES, fwm_rules(n1, n2, 0))
        term = 4.0 * (create("a1") * create("am1") * annihilate("a01") * annihilate("a02"))
        M = build_matrix(term, sector).toarray()
        for k in range(sector.dimension - 1):
            want = 4.0 * np.sqrt((k + 1) ** 2 * (n1 - k) * (n2 - k))
            assert abs(M[k + 1, k] - want) < 1e-12

    def test_pair_exchange_against_dense_product(self):
        # brute-force: multiply single ladder matrices on the truncated full space
        n1 = n2 = 2
        full = full_space(FWM_MODES.labels, 4)
        ops = {
            lab: (
                build_matrix(create(lab), full).toarray(),
                build_matrix(annihilate(lab), full).toarray(),
            )
            for lab in FWM_MODES.labels
        }
        direct = 4.0 * ops["a1"][0] @ ops["am1"][0] @ ops["a01"][1] @ ops["a02"][1]
        sector = enumerate_sector(FWM_MODES, fwm_rules(n1, n2, 0))
        M = build_matrix(
            4.0 * (create("a1") * create("am1") * annihilate("a01") * annihilate("a02")),
            sector,
        ).toarray()
        rows = [full.index[s] for s in sector.states]
        np.testing.assert_allclose(M, direct[np.ix_(rows, rows)], atol=1e-12)

    def test_self_adjoint_expression_gives_hermitian_matrix(self):
        sector = enumerate_sector(FWM_MODES, fwm_rules(3, 3, 1))
        pair = create("a1") * create("am1") * annihilate("a01") * annihilate("a02")
        expr = pair + pair.dagger() + 0.5 * number("a1")
        H = build_matrix(expr, sector).toarray()
        assert np.abs(H - H.conj().T).max() <= 1e-12

    def test_charge_violation_named(self):
        sector = enumerate_sector(FWM_MODES, fwm_rules(2, 2, 0))
        with pytest.raises(ChargeViolationError, match="charge violation"):
            build_matrix(create("a1"), sector)

    def test_unknown_mode_rejected(self):
        sector = full_space(("a",), 2)
        with pytest.raises(ValueError, match="unknown mode"):
            build_matrix(number("zz"), sector)


class TestDiagonalize:
    def test_diagonal_input(self):
        spec = diagonalize(np.diag([0.0, 1.0, 2.0]))
        np.testing.assert_allclose(spec.eigenvalues, [0.0, 1.0, 2.0], atol=1e-12)
        np.testing.assert_allclose(np.abs(spec.eigenvectors), np.eye(3), atol=1e-12)

    def test_two_level_coupling(self):
        chi = 0.37
        spec = diagonalize(np.array([[0.0, chi], [chi, 0.0]]))
        np.testing.assert_allclose(spec.eigenvalues, [-chi, chi], atol=1e-12)

    def test_eigenvalues_ascending(self):
        rng = np.random.default_rng(3)
        A = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
        H = A + A.conj().T
        spec = diagonalize(H)
        assert np.all(np.diff(spec.eigenvalues) >= 0)

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValueError, match="not Hermitian"):
            diagonalize(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_restricted_block_eigenvalues_inside_full_spectrum(self):
        from mwoptics import spinor

        scn = spinor.FWMScenario(n1=2, n2=2, m=0, c2=0.7, time_grid=np.array([0.0, 1.0]))
        sector, H = spinor.build_fwm_hamiltonian(scn, drop_constant_terms=True)
        block = diagonalize(H)

        full = full_space(FWM_MODES.labels, 4)
        Hfull = build_matrix(
            spinor.fwm_hamiltonian_expression(scn.c2, drop_constant_terms=True), full
        )
        wfull = np.linalg.eigvalsh(Hfull.toarray())
        for ev in block.eigenvalues:
            assert np.min(np.abs(wfull - ev)) < 1e-10


class TestEvolution:
    @staticmethod
    def rabi_setup(chi=0.8):
        modes = ModeSet(("u", "v"))
        sector = enumerate_sector(modes, (ChargeRule((1, 1), 1),))
        H = build_matrix(chi * (create("u") * annihilate("v") + create("v") * annihilate("u")), sector)
        return sector, diagonalize(H)

    def test_zero_time_is_identity(self):
        sector, spec = self.rabi_setup()
        psi0 = basis_state(sector, (1, 0))
        psi = evolve(psi0, spec, 0.0)
        np.testing.assert_allclose(psi.amplitudes, psi0.amplitudes, atol=0)

    def test_eigenstate_gets_pure_phase(self):
        sector, spec = self.rabi_setup()
        psi0 = from_amplitudes(sector, spec.eigenvectors[:, 0])
        psi = evolve(psi0, spec, 2.31)
        np.testing.assert_allclose(
            np.abs(psi.amplitudes), np.abs(psi0.amplitudes), atol=1e-12
        )

    def test_two_mode_rabi_oscillation(self):
        chi = 0.8
        sector, spec = self.rabi_setup(chi)
        psi0 = basis_state(sector, (1, 0))
        for t in np.linspace(0.0, 6.0, 31):
            psi = evolve(psi0, spec, t)
            n_v = expectation(psi, number("v")).real
            assert abs(n_v - np.sin(chi * t) ** 2) < 1e-10

    def test_dimension_mismatch(self):
        sector, spec = self.rabi_setup()
        other = full_space(("u", "v"), 2)
        psi0 = basis_state(other, (0, 0))
        with pytest.raises(ValueError, match="dimension"):
            evolve(psi0, spec, 1.0)

    def test_unitarity_for_random_states_and_times(self):
        rng = np.random.default_rng(11)
        sector = enumerate_sector(FWM_MODES, fwm_rules(6, 6, 1))
        from mwoptics import spinor

        H = build_matrix(spinor.fwm_hamiltonian_expression(0.9, drop_constant_terms=True), sector)
        spec = diagonalize(H)
        for _ in range(10):
            amps = rng.normal(size=sector.dimension) + 1j * rng.normal(size=sector.dimension)
            psi0 = from_amplitudes(sector, amps, normalize=True)
            t = float(rng.uniform(0.0, 100.0))
            psi = evolve(psi0, spec, t)
            assert abs(psi.norm - 1.0) <= 1e-10

    def test_time_reversal(self):
        rng = np.random.default_rng(12)
        sector, spec = self.rabi_setup()
        amps = rng.normal(size=sector.dimension) + 1j * rng.normal(size=sector.dimension)
        psi0 = from_amplitudes(sector, amps, normalize=True)
        back = evolve(evolve(psi0, spec, 17.3), spec, -17.3)
        np.testing.assert_allclose(back.amplitudes, psi0.amplitudes, atol=1e-9)

    def test_energy_constant(self):
        from mwoptics import spinor

        sector = enumerate_sector(FWM_MODES, fwm_rules(5, 5, 0))
        expr = spinor.fwm_hamiltonian_expression(1.3, drop_constant_terms=True)
        spec = diagonalize(build_matrix(expr, sector))
        psi0 = basis_state(sector, (0, 0, 5, 5))
        e0 = expectation(psi0, expr).real
        for t in (0.3, 1.7, 9.2):
            e = expectation(evolve(psi0, spec, t), expr).real
            assert abs(e - e0) <= 1e-9 * max(1.0, abs(e0))


class TestExpectation:
    def test_vacuum_number(self):
        sector = full_space(("a",), 4)
        psi = basis_state(sector, (0,))
        assert expectation(psi, number("a")) == 0

    def test_fock_pair_moment(self):
        sector = full_space(("a",), 6)
        psi = basis_state(sector, (5,))
        val = expectation(psi, create("a") * create("a") * annihilate("a") * annihilate("a"))
        assert abs(val - 20.0) < 1e-12

    def test_fwm_initial_sidemode_population(self):
        sector = enumerate_sector(FWM_MODES, fwm_rules(50, 50, 5))
        psi = basis_state(sector, (5, 0, 45, 50))
        assert abs(expectation(psi, number("a1")).real - 5.0) < 1e-12

    def test_charge_violating_expression_vanishes(self):
        sector = enumerate_sector(FWM_MODES, fwm_rules(2, 2, 0))
        psi = basis_state(sector, (1, 1, 1, 1))
        assert expectation(psi, create("a1")) == 0
        assert expectation(psi, create("a1") * annihilate("a02")) == 0

    def test_self_adjoint_expectation_is_real(self):
        rng = np.random.default_rng(5)
        sector = enumerate_sector(FWM_MODES, fwm_rules(3, 3, 0))
        pair = create("a1") * create("am1") * annihilate("a01") * annihilate("a02")
        expr = (2.0 + 0j) * pair + (2.0 + 0j) * pair.dagger() + number("a1")
        amps = rng.normal(size=sector.dimension) + 1j * rng.normal(size=sector.dimension)
        psi = from_amplitudes(sector, amps, normalize=True)
        assert abs(expectation(psi, expr).imag) < 1e-10


class TestSectorClosure:
    def test_commutator_with_charges_vanishes_exactly(self):
        from mwoptics import spinor

        full = full_space(FWM_MODES.labels, 3)
        H = build_matrix(
            spinor.fwm_hamiltonian_expression(1.1, drop_constant_terms=True), full
        ).toarray()
        for rule in fwm_rules(0, 0, 0):
            q = np.array([rule.charge(s) for s in full.states], dtype=float)
            Q = np.diag(q)
            comm = H @ Q - Q @ H
            assert np.abs(comm).max() == 0.0


class TestRestrictedVersusFullSpace:
    def test_small_system_evolution_matches_projection(self):
        """Charge-restricted evolution equals full-space evolution, projected."""
        from mwoptics import spinor

        n1 = n2 = 2
        expr = spinor.fwm_hamiltonian_expression(1.0, drop_constant_terms=True)

        sector = enumerate_sector(FWM_MODES, fwm_rules(n1, n2, 0))
        spec = diagonalize(build_matrix(expr, sector))
        psi0 = basis_state(sector, (0, 0, n1, n2))

        full = full_space(FWM_MODES.labels, 4)
        spec_full = diagonalize(build_matrix(expr, full))
        phi0 = basis_state(full, (0, 0, n1, n2))

        rows = [full.index[s] for s in sector.states]
        for t in np.linspace(0.0, 2.0 * np.pi, 9):
            a = evolve(psi0, spec, t).amplitudes
            b = evolve(phi0, spec_full, t).amplitudes
            np.testing.assert_allclose(a, b[rows], atol=1e-10)
            # nothing leaks outside the charge block
            outside = np.delete(b, rows)
            assert np.abs(outside).max() < 1e-12


class TestStateVector:
    def test_norm_validation(self):
        sector = full_space(("a",), 2)
        with pytest.raises(ValueError, match="norm"):
            from_amplitudes(sector, [0.5, 0.0, 0.0])

    def test_normalize_flag(self):
        sector = full_space(("a",), 2)
        psi = from_amplitudes(sector, [3.0, 4.0, 0.0], normalize=True)
        assert abs(psi.norm - 1.0) < 1e-12

    def test_basis_state_outside_sector(self):
        sector = enumerate_sector(FWM_MODES, fwm_rules(2, 2, 0))
        with pytest.raises(ValueError, match="not in the sector"):
            basis_state(sector, (1, 0, 1, 2))
