import numpy as np
import pytest

from mwoptics import holo
from mwoptics.holo import Grid, ImprintModel, ScalarField
from mwoptics.holo.thomas_fermi import TFProfile


def uniform_profile(grid, density):
    return TFProfile(
        grid=grid,
        density=np.full(grid.shape, density),
        mu=1.0,
        g=1.0,
        n_atoms=float(density * np.prod(grid.extents)),
    )


def rect_profile(grid, density, width):
    x = grid.axes()[0]
    rho = np.where(np.abs(x) <= width / 2, density, 0.0)
    return TFProfile(grid=grid, density=rho, mu=1.0, g=1.0, n_atoms=float(rho.sum() * grid.cell_volume))


class TestPhaseImprint:
    def test_zero_eta_is_identity(self):
        grid = Grid(shape=(256,), spacing=(1e-7,))
        f = holo.plane_wave(grid, 1e-6)
        out = holo.phase_imprint(f, uniform_profile(grid, 1e9), ImprintModel(eta=0.0))
        np.testing.assert_allclose(out.values, f.values, atol=0)

    def test_uniform_column_is_global_phase(self):
        grid = Grid(shape=(512,), spacing=(1e-7,))
        f = holo.plane_wave(grid, 1e-6)
        out = holo.phase_imprint(f, uniform_profile(grid, 2e9), ImprintModel(eta=1e-10))
        far = holo.propagate(out, 5e-5)
        ref = holo.propagate(f, 5e-5)
        np.testing.assert_allclose(far.intensity(), ref.intensity(), atol=1e-12)

    def test_amplitude_unchanged(self):
        grid = Grid(shape=(256,), spacing=(1e-7,))
        f = holo.plane_wave(grid, 1e-6)
        out = holo.phase_imprint(f, rect_profile(grid, 3e9, 5e-6), ImprintModel(eta=2e-10))
        np.testing.assert_allclose(np.abs(out.values), np.abs(f.values), atol=1e-14)

    def test_exponent_additive(self):
        grid = Grid(shape=(256,), spacing=(1e-7,))
        f = holo.plane_wave(grid, 1e-6)
        prof = rect_profile(grid, 3e9, 5e-6)
        once = holo.phase_imprint(f, prof, ImprintModel(eta=3e-10))
        split = holo.phase_imprint(
            holo.phase_imprint(f, prof, ImprintModel(eta=1e-10)),
            prof,
            ImprintModel(eta=2e-10),
        )
        np.testing.assert_allclose(split.values, once.values, atol=1e-12)

    def test_incidence_angle_stretches_column(self):
        grid = Grid(shape=(256,), spacing=(1e-7,))
        f = holo.plane_wave(grid, 1e-6)
        prof = uniform_profile(grid, 1e9)
        straight = holo.phase_imprint(f, prof, ImprintModel(eta=1e-10, incidence_angle=0.0))
        tilted = holo.phase_imprint(f, prof, ImprintModel(eta=1e-10, incidence_angle=0.5))
        ratio = np.angle(tilted.values[0] / f.values[0]) / np.angle(
            straight.values[0] / f.values[0]
        )
        assert ratio == pytest.approx(1.0 / np.cos(0.5), rel=1e-9)

    def test_grid_mismatch_rejected(self):
        f = holo.plane_wave(Grid(shape=(256,), spacing=(1e-7,)), 1e-6)
        prof = uniform_profile(Grid(shape=(128,), spacing=(1e-7,)), 1e9)
        with pytest.raises(ValueError, match="grid mismatch"):
            holo.phase_imprint(f, prof, ImprintModel(eta=1e-10))

    def test_thick_hologram_warns(self):
        grid = Grid(shape=(512,), spacing=(1e-7,))
        f = holo.plane_wave(grid, 1.7e-7)
        prof = rect_profile(grid, 1e10, 1e-5)
        model = ImprintModel(eta=3e-10, thickness=1e-3)
        assert not holo.raman_nath_valid(prof, model, f)
        with pytest.warns(UserWarning, match="Raman-Nath"):
            holo.phase_imprint(f, prof, model)

    def test_thin_hologram_silent(self):
        grid = Grid(shape=(512,), spacing=(1e-7,))
        f = holo.plane_wave(grid, 1.7e-7)
        prof = rect_profile(grid, 1e10, 1e-5)
        model = ImprintModel(eta=3e-10, thickness=0.0)
        assert holo.raman_nath_valid(prof, model, f)

    def test_pi_step_gives_sinc_envelope(self):
        # a binary phase rectangle diffracts with the sinc spectrum of the
        # rectangle on top of the undiffracted carrier
        grid = Grid(shape=(4096,), spacing=(5e-8,))
        width = 6e-6
        density = 1e10
        eta = np.pi / density
        f = holo.plane_wave(grid, 1e-7)
        out = holo.phase_imprint(f, rect_profile(grid, density, width), ImprintModel(eta=eta))
        spectrum = np.fft.fft(out.values) * grid.spacing[0]
        k = 2 * np.pi * np.fft.fftfreq(4096, d=grid.spacing[0])
        # e^{i pi} = -1 inside the slit: field = 1 - 2 rect, so the
        # non-forward amplitude is 2 * width * sinc(k width / 2 pi)
        sel = (np.abs(k) > 2e5) & (np.abs(k) < 3e6)
        expect = 2.0 * width * np.sinc(k[sel] * width / (2 * np.pi))
        np.testing.assert_allclose(np.abs(spectrum[sel]), np.abs(expect), atol=0.02 * 2 * width)


class TestPropagation:
    def test_zero_distance_identity(self):
        grid = Grid(shape=(256,), spacing=(1e-7,))
        f = holo.plane_wave(grid, 1e-6, envelope_width=5e-6)
        out = holo.propagate(f, 0.0)
        np.testing.assert_allclose(out.values, f.values, atol=1e-14)

    def test_plane_wave_gets_phase_only(self):
        grid = Grid(shape=(256,), spacing=(1e-7,))
        f = holo.plane_wave(grid, 1e-6)
        out = holo.propagate(f, 3.7e-5)
        np.testing.assert_allclose(out.intensity(), 1.0, atol=1e-12)
        phase = np.angle(out.values[0])
        assert phase == pytest.approx(
            (2 * np.pi / 1e-6 * 3.7e-5) % (2 * np.pi) - 2 * np.pi, abs=1e-9
        ) or abs(np.exp(1j * 2 * np.pi / 1e-6 * 3.7e-5) - out.values[0]) < 1e-9

    def test_gaussian_beam_rayleigh_spreading(self):
        lam = 1e-6
        w0 = 50 * lam
        grid = Grid(shape=(4096,), spacing=(w0 / 40,))
        x = grid.axes()[0]
        f0 = ScalarField(grid=grid, values=np.exp(-(x / w0) ** 2).astype(complex), wavelength=lam)
        zr = np.pi * w0 ** 2 / lam
        for z in (0.5 * zr, zr, 2.0 * zr):
            out = holo.propagate(f0, z)
            w = w0 * np.sqrt(1 + (z / zr) ** 2)
            analytic = (w0 / w) * np.exp(-2 * x ** 2 / w ** 2)
            err = np.abs(out.intensity() - analytic).max() / analytic.max()
            assert err < 1e-4

    def test_power_conserved_and_reversible(self):
        lam = 1e-6
        grid = Grid(shape=(2048,), spacing=(5e-8,))
        x = grid.axes()[0]
        f0 = ScalarField(
            grid=grid,
            values=(np.exp(-(x / 5e-6) ** 2) * np.exp(1j * 3e5 * x)).astype(complex),
            wavelength=lam,
        )
        out = holo.propagate(f0, 4e-5)
        assert out.power == pytest.approx(f0.power, rel=1e-10)
        back = holo.propagate(out, -4e-5)
        assert np.abs(back.values - f0.values).max() < 1e-6

    def test_evanescent_components_decay(self):
        # spectrum built with a paraxial lobe plus a deep-evanescent lobe,
        # keeping the grazing-incidence band empty
        lam = 1e-6
        grid = Grid(shape=(1024,), spacing=(1e-7,))
        k = 2 * np.pi / lam
        s = grid.wavenumbers()[0]
        spec = np.exp(-(s / 2e5) ** 2) + 0.2 * np.exp(-(((np.abs(s) - 1.4 * k)) / 1e5) ** 2)
        f0 = ScalarField(grid=grid, values=np.fft.ifft(spec), wavelength=lam)
        out = holo.propagate(f0, 5e-6)
        s0 = np.abs(np.fft.fft(f0.values)) ** 2
        s1 = np.abs(np.fft.fft(out.values)) ** 2
        evanescent = s ** 2 > k ** 2
        assert s1[evanescent].sum() < 1e-6 * s0[evanescent].sum()
        propagating = ~evanescent
        assert s1[propagating].sum() == pytest.approx(s0[propagating].sum(), rel=1e-10)

    def test_2d_propagation_conserves_power(self):
        lam = 1e-6
        grid = Grid(shape=(128, 128), spacing=(2e-7, 2e-7))
        xx, yy = grid.meshgrid()
        f0 = ScalarField(
            grid=grid,
            values=np.exp(-((xx ** 2 + yy ** 2) / (4e-6) ** 2)).astype(complex),
            wavelength=lam,
        )
        out = holo.propagate(f0, 3e-5)
        assert out.power == pytest.approx(f0.power, rel=1e-8)

    def test_aliasing_check_names_padding(self):
        lam = 1e-6
        grid = Grid(shape=(256,), spacing=(5e-7,))
        x = grid.axes()[0]
        f0 = ScalarField(
            grid=grid,
            values=np.exp(1j * 5.5e6 * x).astype(complex),
            wavelength=lam,
        )
        with pytest.raises(holo.AliasingError, match="enlarge the domain"):
            holo.propagate(f0, 5e-4)

    def test_wavelength_required(self):
        grid = Grid(shape=(256,), spacing=(1e-7,))
        f = ScalarField(grid=grid, values=np.ones(256, dtype=complex))
        with pytest.raises(ValueError, match="wavelength"):
            holo.propagate(f, 1e-5)
