import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holonomy_lab.errors import BoundaryError, GridMismatchError, ResolutionError
from holonomy_lab.grid import (DensityMatrix, GridSpec, WaveFunction, gaussian_packet,
                               identity_operator, inner_product, mixture_trace,
                               momentum_moment, multiplication_operator, superpose, translate,
                               translation_operator, write_wavefunction_csv)

G1 = GridSpec(1, 1024, 0.05)
G2 = GridSpec(2, 64, 0.25)


def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec(3, 64, 0.1)
    with pytest.raises(ValueError):
        GridSpec(1, 100, 0.1)
    with pytest.raises(ValueError):
        GridSpec(1, 4, 0.1)
    with pytest.raises(ValueError):
        GridSpec(1, 64, 0.0)
    with pytest.raises(ValueError):
        GridSpec(2, 64, 0.1, origin=(0.0,))


def test_gridspec_geometry():
    g = GridSpec(2, 16, 0.5, origin=(1.0, -2.0))
    assert g.extent == 8.0
    assert g.shape == (16, 16)
    assert g.coords().shape == (16, 16, 2)
    assert np.allclose(g.coords()[0, 0], (1.0, -2.0))
    assert np.allclose(g.upper(), (9.0, 6.0))
    assert np.allclose(GridSpec(1, 8, 1.0).axis(), np.arange(-4, 4))


def test_packet_symmetric_and_normalized():
    psi = gaussian_packet(G1, 0.0, 1.0)
    amp = psi.amplitudes[:, 0]
    assert np.all(amp.real > 0) and np.allclose(amp.imag, 0)
    # sample i sits at -x_i for i -> N - i
    assert np.allclose(amp[1:], amp[1:][::-1])
    assert abs(psi.norm() - 1) <= 1e-10


def test_packet_global_phase():
    a = gaussian_packet(G1, 0.3, 1.0, 0.7)
    b = gaussian_packet(G1, 0.3, 1.0, 0.7, phase=1.1)
    assert np.allclose(b.amplitudes, np.exp(1.1j) * a.amplitudes, atol=1e-14)


def test_packet_width_is_density_std():
    psi = gaussian_packet(G1, 2.0, 1.3)
    x = G1.axis()
    rho = psi.density() * G1.spacing
    c = np.sum(rho * x)
    assert c == pytest.approx(2.0, abs=1e-12)
    assert math.sqrt(np.sum(rho * (x - c) ** 2)) == pytest.approx(1.3, rel=1e-10)


def test_packet_errors():
    with pytest.raises(ResolutionError):
        gaussian_packet(G1, 0.0, 0.05)
    with pytest.raises(BoundaryError):
        gaussian_packet(G1, 20.0, 1.0)


def test_spinor_packet():
    psi = gaussian_packet(G2, (0.0, 0.0), 0.6, spinor=[1.0, 1j])
    assert psi.internal_dim == 2
    assert abs(psi.norm() - 1) <= 1e-12
    ratio = psi.amplitudes[32, 32, 1] / psi.amplitudes[32, 32, 0]
    assert ratio == pytest.approx(1j)


def test_wavefunction_shape_checks():
    with pytest.raises(GridMismatchError):
        WaveFunction(G1, np.zeros(10))
    psi = WaveFunction(G1, np.ones(1024))
    assert psi.amplitudes.shape == (1024, 1)
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 2.0
    assert abs(psi.normalize().norm() - 1) <= 1e-12


def test_superpose_cases():
    a = gaussian_packet(G1, -4.0, 1.0)
    b = gaussian_packet(G1, 4.0, 1.0)
    assert np.allclose(superpose(a, b, 1, 0).amplitudes, a.amplitudes)
    assert np.allclose(superpose(a, a, 0.5, 0.5).amplitudes, a.amplitudes)
    with pytest.raises(GridMismatchError):
        superpose(a, gaussian_packet(GridSpec(1, 512, 0.1), 0.0, 1.0))


def test_translate_identity_and_period():
    psi = gaussian_packet(G1, 1.0, 1.0, 0.5)
    assert translate(psi, 0.0) is psi
    full = translate(psi, G1.extent)
    assert np.allclose(full.amplitudes, psi.amplitudes, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(-200, 200))
def test_translate_grid_aligned_is_roll(m):
    psi = gaussian_packet(G1, 0.0, 1.0, 1.3)
    moved = translate(psi, m * G1.spacing)
    assert np.max(np.abs(moved.amplitudes - np.roll(psi.amplitudes, m, axis=0))) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5))
def test_translate_composes(a, b):
    psi = gaussian_packet(G1, 0.0, 1.0)
    two = translate(translate(psi, a), b)
    one = translate(psi, a + b)
    assert np.max(np.abs(two.amplitudes - one.amplitudes)) <= 1e-12
    assert abs(two.norm() - psi.norm()) <= 1e-12


def test_translate_2d_moves_centre():
    psi = gaussian_packet(G2, (0.0, 0.0), 0.6)
    moved = translate(psi, (1.3, -0.7))
    ref = gaussian_packet(G2, (1.3, -0.7), 0.6)
    assert np.max(np.abs(moved.amplitudes - ref.amplitudes)) <= 1e-10


def test_inner_product_cases():
    psi = gaussian_packet(G1, 0.0, 1.0)
    assert inner_product(psi, psi) == pytest.approx(1.0, abs=1e-12)
    a, b = gaussian_packet(G1, -10.0, 0.5), gaussian_packet(G1, 10.0, 0.5)
    assert abs(inner_product(a, b)) <= 1e-12
    c = gaussian_packet(G1, 0.0, 1.0, phase=0.4)
    assert inner_product(psi, c) == pytest.approx(np.exp(0.4j))


def test_momentum_moments():
    psi = gaussian_packet(G1, 0.0, 1.0)
    assert abs(momentum_moment(psi, 1)) <= 1e-12
    sigma = 0.8
    assert momentum_moment(gaussian_packet(G1, 0.0, sigma), 2) == pytest.approx(
        1 / (4 * sigma ** 2), abs=1e-6)
    k = 1.5
    assert momentum_moment(gaussian_packet(G1, 0.0, 1.0, k), 1) == pytest.approx(k, abs=1e-10)
    with pytest.raises(ValueError):
        momentum_moment(psi, 0)
    with pytest.raises(ValueError):
        momentum_moment(psi, 1, axis=1)


def test_density_matrix_validation():
    psi = gaussian_packet(G1, 0.0, 1.0)
    with pytest.raises(ValueError):
        DensityMatrix(((0.5, psi),))
    with pytest.raises(ValueError):
        DensityMatrix(((1.5, psi), (-0.5, psi)))
    with pytest.raises(ValueError):
        DensityMatrix(())
    with pytest.raises(GridMismatchError):
        DensityMatrix.mixture([psi, gaussian_packet(GridSpec(1, 512, 0.1), 0.0, 1.0)])


def test_mixture_trace_cases():
    ell = 16.0
    shifted, base = gaussian_packet(G1, ell / 2, 1.0), gaussian_packet(G1, -ell / 2, 1.0)
    s = translation_operator(ell)
    assert abs(mixture_trace(DensityMatrix.mixture([shifted, base]), s)) <= 1e-10
    alpha = 0.9
    psi = superpose(shifted, base, 2 ** -0.5, np.exp(1j * alpha) * 2 ** -0.5)
    assert abs(mixture_trace(DensityMatrix.pure(psi), s) - np.exp(1j * alpha) / 2) <= 1e-10
    assert mixture_trace(DensityMatrix.pure(psi), identity_operator) == pytest.approx(1.0)


def test_multiplication_operator_is_local():
    psi = gaussian_packet(G1, 0.0, 1.0)
    op = multiplication_operator(lambda x: np.exp(1j * x[..., 0]))
    out = op(psi)
    assert abs(out.norm() - 1) <= 1e-12
    assert np.allclose(out.density(), psi.density())


def test_write_wavefunction_csv(tmp_path):
    psi = gaussian_packet(GridSpec(1, 64, 0.5), 0.0, 1.0)
    path = tmp_path / "psi.csv"
    write_wavefunction_csv(psi, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 65
    assert lines[0].split(",")[0] == "index"
