"""Blur invariants: moment and Fourier features unchanged by convolution with a symmetric PSF."""

from .errors import BlurInvError, DataError, NumericalError
from .image import Image, add_white_gaussian_noise, convolve_full, delta, embed, rotate
from .invariants import (
    InvariantSpectrum,
    InvariantVector,
    fourier_invariant,
    invariant_at,
    invariant_distance,
    invariants_from_moments,
    moment_invariants,
    spectrum_distance,
)
from .io import read_image, write_image
from .matching import Gallery, MatchHit, Prediction, classify_nn, match_template
from .moments import MomentTable, complex_moments, geometric_moments, moments, transition
from .projectors import (
    CENTRO,
    DELTA,
    EVEN1D,
    GAUSS,
    IDENTITY,
    RADIAL,
    BlurClass,
    Kind,
    dihedral,
    directional,
    index_set,
    nfold,
    project,
    verify_separation,
)
from .psf import Psf, psf_disk, psf_gaussian, psf_motion, psf_polygon, psf_random_centrosymmetric
from .registration import RegistrationResult, register_shift, register_shift_rotation

__version__ = "0.1.0"
