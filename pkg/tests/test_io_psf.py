import math

import numpy as np
import pytest

from blurinv import DataError, Image, RADIAL, nfold, project, read_image, write_image
from blurinv.io import decode_bif, decode_bis, decode_pgm, encode_bif, encode_bis, encode_pgm
from blurinv.psf import psf_disk, psf_gaussian, psf_motion, psf_polygon, psf_random_centrosymmetric


def test_bif_round_trip_is_bit_exact(tmp_path, rng):
    f = Image(rng.standard_normal((5, 7)), (2.25, -1.0))
    path = tmp_path / "f.bif"
    write_image(path, f)
    g = read_image(path)
    assert g.samples.tobytes() == f.samples.tobytes()
    assert g.origin == f.origin


def test_bif_truncated_payload():
    data = encode_bif(Image(np.ones((3, 3))))
    with pytest.raises(DataError, match="truncated payload"):
        decode_bif(data[:-1])


@pytest.mark.parametrize("data", [b"BIF1 3 3 0\n", b"BIF1 3 x 0 0\n", b"BIF1 0 3 0 0\n", b"BIF1"])
def test_bif_malformed_header(data):
    with pytest.raises(DataError):
        decode_bif(data)


def test_unsupported_magic(tmp_path):
    p = tmp_path / "x.bin"
    p.write_bytes(b"XXXX")
    with pytest.raises(DataError):
        read_image(p)


def test_pgm_p5_max_is_one():
    img = decode_pgm(b"P5\n2 1\n255\n" + bytes([255, 0]))
    assert img.samples.tolist() == [[1.0, 0.0]]


def test_pgm_p2_with_comments_and_16_bit():
    img = decode_pgm(b"P2\n# note\n2 1\n65535\n65535 0\n")
    assert img.samples.tolist() == [[1.0, 0.0]]
    raw = decode_pgm(b"P5 1 1 65535\n" + (32768).to_bytes(2, "big"))
    assert math.isclose(raw.samples[0, 0], 32768 / 65535)


def test_pgm_round_trip_quantizes(rng):
    f = Image(rng.random((4, 6)))
    g = decode_pgm(encode_pgm(f))
    assert np.max(np.abs(g.samples - f.samples)) <= 0.5 / 255 + 1e-12


def test_pgm_truncated():
    with pytest.raises(DataError):
        decode_pgm(b"P5\n2 2\n255\n\x00")


def test_bis_round_trip(rng):
    v = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    m = rng.random((3, 4)) > 0.5
    v[~m] = 0
    values, mask, origin, eps = decode_bis(encode_bis(v, m, (1.5, 2.0), 1e-3))
    assert np.array_equal(values, v) and np.array_equal(mask, m)
    assert origin == (1.5, 2.0) and eps == 1e-3


def test_subpixel_disk_is_unit_kernel():
    assert psf_disk(0.4).samples.tolist() == [[1.0]]


@pytest.mark.parametrize(
    "h",
    [
        psf_disk(4.3),
        psf_polygon(5, 4.0, 0.2),
        psf_gaussian(1.5, 2.5, 0.3),
        psf_motion(9.0, 0.4),
        psf_random_centrosymmetric(3, seed=1),
    ],
)
def test_psfs_have_unit_mass_and_are_nonnegative(h):
    assert abs(h.samples.sum() - 1) <= 1e-12
    assert h.samples.min() >= 0


def test_random_kernel_is_exactly_centrosymmetric():
    a = psf_random_centrosymmetric(4, seed=2).samples
    assert np.array_equal(a, a[::-1, ::-1])


def test_axis_motion_kernel_is_exactly_symmetric():
    a = psf_motion(7.0, 0.0).samples
    assert np.array_equal(a, a[::-1, ::-1])


def test_square_polygon_is_fixed_point_of_fourfold_projector():
    h = psf_polygon(4, 4.0, 0.0)
    assert np.max(np.abs(project(h, nfold(4)).samples - h.samples)) <= 1e-12


def test_disk_is_near_fixed_point_of_radial_projector():
    h = psf_disk(5.0)
    p = project(h, RADIAL)
    pad = (p.height - h.height) // 2
    inner = p.samples[pad : pad + h.height, pad : pad + h.width] if pad else p.samples
    assert np.max(np.abs(inner - h.samples)) <= 1e-3


@pytest.mark.parametrize("call", [lambda: psf_disk(0), lambda: psf_polygon(2, 3.0), lambda: psf_gaussian(0, 1), lambda: psf_motion(-1)])
def test_degenerate_sizes_raise(call):
    with pytest.raises(DataError):
        call()
