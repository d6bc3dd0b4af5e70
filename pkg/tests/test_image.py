import math

import numpy as np
import pytest

from blurinv import DataError, Image, NumericalError, add_white_gaussian_noise, convolve_full, delta, embed, rotate
from blurinv.image import measured_snr_db
from oracles import brute_convolve


def test_delta_is_unit_sample():
    d = delta()
    assert d.samples.tolist() == [[1.0]]
    assert d.origin == (0.0, 0.0)


def test_default_origin_is_center():
    assert Image(np.zeros((4, 5))).origin == (2.0, 1.5)


def test_convolve_with_delta_is_identity(rng):
    f = Image(rng.random((5, 7)), (1.25, 3.0))
    g = convolve_full(f, delta())
    assert np.array_equal(g.samples, f.samples)
    assert g.origin == f.origin


@pytest.mark.parametrize("bad", [np.nan, np.inf])
def test_rejects_nonfinite(bad):
    a = np.ones((3, 3))
    a[1, 1] = bad
    with pytest.raises(DataError):
        Image(a)


def test_rejects_empty():
    with pytest.raises(DataError):
        Image(np.zeros((0, 3)))


def test_samples_are_readonly(rng):
    f = Image(rng.random((3, 3)))
    with pytest.raises(ValueError):
        f.samples[0, 0] = 1


def test_convolution_matches_direct_loop(rng):
    f = Image(rng.random((6, 9)), (2.0, 4.5))
    h = Image(rng.random((4, 3)), (1.5, 1.0))
    got, want = convolve_full(f, h), brute_convolve(f, h)
    assert got.origin == want.origin
    assert np.allclose(got.samples, want.samples, rtol=1e-12, atol=1e-14)


def test_convolution_commutes_and_associates(rng):
    a, b, c = (Image(rng.random((8, 8))) for _ in range(3))
    ab, ba = convolve_full(a, b), convolve_full(b, a)
    assert np.max(np.abs(ab.samples - ba.samples)) <= 1e-12 * np.abs(ab.samples).max()
    left = convolve_full(ab, c)
    right = convolve_full(a, convolve_full(b, c))
    assert np.max(np.abs(left.samples - right.samples)) <= 1e-12 * np.abs(left.samples).max()


def test_mass_and_origin_additivity(rng):
    f = Image(rng.random((5, 6)), (0.5, 2.0))
    h = Image(rng.random((3, 3)), (1.0, 1.0))
    g = convolve_full(f, h)
    assert math.isclose(g.samples.sum(), f.samples.sum() * h.samples.sum(), rel_tol=1e-12)
    assert g.origin == (1.5, 3.0)


def test_noise_reaches_requested_snr():
    f = Image(np.random.default_rng(0).random((256, 256)))
    g = add_white_gaussian_noise(f, 50, seed=3)
    assert abs(measured_snr_db(f, g) - 50) <= 0.5


def test_noise_is_deterministic(rng):
    f = Image(rng.random((16, 16)))
    assert np.array_equal(add_white_gaussian_noise(f, 20, 7).samples, add_white_gaussian_noise(f, 20, 7).samples)


def test_noise_none_and_inf_are_identity(rng):
    f = Image(rng.random((4, 4)))
    assert add_white_gaussian_noise(f, None) is f
    assert add_white_gaussian_noise(f, math.inf) is f


def test_noise_on_constant_image_fails():
    with pytest.raises(NumericalError):
        add_white_gaussian_noise(Image(np.ones((4, 4))), 10, 0)


def test_rotate_quarter_turn_is_exact_on_centered_grid(rng):
    a = rng.random((5, 5))
    r = rotate(Image(a), math.pi / 2)
    assert np.allclose(r.samples, np.rot90(a), atol=1e-12)


def test_embed_preserves_samples(rng):
    f = Image(rng.random((3, 4)))
    e = embed(f, (8, 8))
    assert e.shape == (8, 8)
    assert math.isclose(e.sum(), f.samples.sum())
