"""Acceptance criteria 1-10. Each test prints one ``CRITERION k: PASS|FAIL`` line."""

import math
import time

import numpy as np
import pytest

from blurinv import (
    CENTRO,
    DELTA,
    GAUSS,
    IDENTITY,
    RADIAL,
    Gallery,
    Image,
    classify_nn,
    convolve_full,
    delta,
    dihedral,
    directional,
    fourier_invariant,
    invariant_at,
    match_template,
    moment_invariants,
    nfold,
    project,
    register_shift,
    register_shift_rotation,
    spectrum_distance,
)
from blurinv.experiments import mre_sweep
from blurinv.moments import complex_to_geo, order_mask
from blurinv.projectors import EVEN1D, Kind, random_member
from blurinv.synth import matching_corpus, recognition_corpus, registration_pairs, smooth_texture
from oracles import inner, max_abs_diff, on_common_canvas, oracle_invariants

SUITE_CLASSES = [CENTRO, nfold(2), nfold(4), directional(0.0)]


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {k}: {'PASS' if ok else 'FAIL'} ({detail})")
        assert ok, detail

    return emit


def suite_images(n=20, side=16, seed=0):
    rng = np.random.default_rng(seed)
    return [Image(rng.random((side, side))) for _ in range(n)]


def test_criterion_01_exact_invariance(report):
    r = 7
    start = time.perf_counter()
    worst = 0.0
    for cls in SUITE_CLASSES:
        for i, f in enumerate(suite_images()):
            L = 16.0
            a = moment_invariants(f, cls, r, L)
            sel = a.nontrivial()
            scale = np.abs(a.values[sel]).max()
            for j in range(5):
                h = random_member(cls, 3, seed=1000 * i + j)
                b = moment_invariants(convolve_full(f, h), cls, r, L)
                worst = max(worst, float(np.abs(a.values - b.values)[sel].max() / scale))
    elapsed = time.perf_counter() - start
    report(1, worst <= 1e-8 and elapsed < 10, f"max rel dev {worst:.2e}, {elapsed:.2f} s")


def test_criterion_02_forced_structure(report):
    worst_c00 = worst_forced = 0.0
    for cls in SUITE_CLASSES + [EVEN1D, dihedral(4, 0.0), RADIAL, GAUSS]:
        for f in suite_images():
            v = moment_invariants(f, cls, 7, 16.0)
            worst_c00 = max(worst_c00, abs(v.values[0, 0] - 1))
            forced = v.trivial.copy()
            forced[0, 0] = False
            if forced.any():
                worst_forced = max(worst_forced, float(np.abs(v.values[forced]).max()))
    ok = worst_c00 <= 1e-10 and worst_forced <= 1e-10
    report(2, ok, f"|C00-1| {worst_c00:.1e}, forced entries {worst_forced:.1e}")


ORACLE_CASES = [
    (CENTRO, "centro", {}),
    (EVEN1D, "even1d", {}),
    (nfold(2), "nfold", {"n": 2}),
    (nfold(3), "nfold", {"n": 3}),
    (nfold(4), "nfold", {"n": 4}),
    (RADIAL, "radial", {}),
    (dihedral(2, 0.0), "dihedral", {"n": 2, "alpha": 0.0}),
    (dihedral(3, 0.4), "dihedral", {"n": 3, "alpha": 0.4}),
    (directional(0.0), "directional", {"beta": 0.0}),
    (directional(0.9), "directional", {"beta": 0.9}),
    (GAUSS, "gauss", {}),
]


def test_criterion_03_oracle_equivalence(report):
    rng = np.random.default_rng(3)
    r = 6
    worst = 0.0
    for shape in [(8, 8), (7, 7), (5, 8)]:
        f = Image(rng.random(shape) + 0.05)
        L = max(shape) / 2
        for cls, kind, kw in ORACLE_CASES:
            got = moment_invariants(f, cls, r, L).values
            want = oracle_invariants(f, kind, r, L, **kw)
            mask = order_mask(r)
            worst = max(worst, float(np.abs(got - want)[mask].max() / np.abs(want[mask]).max()))
    report(3, worst <= 1e-10, f"max rel deviation from series quotient {worst:.2e}")


def test_criterion_04_projector_laws(report):
    rng = np.random.default_rng(4)
    exact = [EVEN1D, CENTRO, nfold(2), nfold(4), dihedral(4, 0.0), dihedral(2, math.pi / 4)]
    interpolated = [RADIAL, nfold(3), dihedral(3, 0.3)]
    worst = {"idempotence": 0.0, "distributivity": 0.0, "orthogonality": 0.0}
    for cls in exact + [directional(0.0), directional(math.pi / 2)]:
        f = Image(rng.random((11, 11)))
        p = project(f, cls)
        worst["idempotence"] = max(worst["idempotence"], max_abs_diff(project(p, cls), p))
        h = random_member(cls, 3, seed=7)
        d = max_abs_diff(project(convolve_full(f, h), cls), convolve_full(p, h))
        worst["distributivity"] = max(worst["distributivity"], d)
        if cls in exact:
            pa, fa = on_common_canvas(p, f)
            worst["orthogonality"] = max(worst["orthogonality"], abs(np.sum(pa * (fa - pa))) / np.sum(fa**2))
    interp_idem = interp_orth = 0.0
    for cls in interpolated:
        f = Image(smooth_texture((24, 24), 0, 2.0) + 0.1)
        p = project(f, cls)
        interp_idem = max(interp_idem, max_abs_diff(project(p, cls), p))
        pa, fa = on_common_canvas(p, f)
        interp_orth = max(interp_orth, abs(np.sum(pa * (fa - pa))) / np.sum(fa**2))
    all_classes = exact + interpolated + [IDENTITY, DELTA, GAUSS, directional(0.0), directional(0.7)]
    delta_exact = all(max_abs_diff(project(delta(), c), delta()) == 0.0 for c in all_classes)
    ok = (
        worst["idempotence"] <= 1e-12
        and worst["distributivity"] <= 1e-10
        and worst["orthogonality"] <= 1e-12
        and interp_idem <= 1e-6
        and interp_orth <= 1e-4
        and delta_exact
    )
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    report(4, ok, f"exact: {detail}; interpolated: idempotence {interp_idem:.1e}, orthogonality {interp_orth:.1e}; P(delta)=delta {delta_exact}")


def test_criterion_05_noise_robustness(report):
    start = time.perf_counter()
    rows = mre_sweep()
    elapsed = time.perf_counter() - start
    at50 = max(r.mre for r in rows if r.snr_db == 50)
    at10 = max(r.mre for r in rows if r.snr_db == 10)
    ok = at50 <= 0.01 and at10 <= 0.05 and elapsed < 120
    report(5, ok, f"worst MRE {at50:.3%} at SNR 50, {at10:.3%} at SNR 10, {elapsed:.1f} s")


def recognition_accuracy(corpus):
    g = Gallery.build(corpus.gallery, CENTRO, 7, corpus.L)
    hits = sum(classify_nn(g, q, CENTRO, 7, corpus.L).label == t for q, t in zip(corpus.queries, corpus.truth))
    return hits / len(corpus.queries)


def test_criterion_06_recognition(report):
    mild = recognition_accuracy(recognition_corpus(seed=0))
    harsh = recognition_accuracy(recognition_corpus(blur_diameters=(31, 31), snr_db=5.0, seed=0))
    report(6, mild == 1.0 and harsh >= 0.9, f"{mild:.0%} at SNR 50, {harsh:.0%} at SNR 5 with 31 px blur")


def test_criterion_07_template_matching(report):
    c = matching_corpus(seed=0)
    t = c.templates[0].width
    inv_ok = raw_bad = 0
    for tpl, (x, y) in zip(c.templates, c.positions):
        for raw in (False, True):
            hit = match_template(c.scene, tpl, CENTRO, 7, raw_moments=raw)[0]
            near = math.hypot(hit.x - x, hit.y - y) < t / 2
            if raw:
                raw_bad += not near
            else:
                inv_ok += near
    n = len(c.templates)
    report(7, inv_ok == n and raw_bad >= n / 2, f"invariants {inv_ok}/{n} within t/2, raw moments mislocalize {raw_bad}/{n}")


def test_criterion_08_registration(report):
    pairs = registration_pairs(seed=0)
    good = sum(
        abs((res := register_shift(p.reference, p.moving, RADIAL)).dx - p.shift[0]) <= 1 and abs(res.dy - p.shift[1]) <= 1
        for p in pairs
    )
    rot_pairs = registration_pairs(10, rotation_deg=5.0, seed=1)
    rot_errs = [abs(math.degrees(register_shift_rotation(p.reference, p.moving, RADIAL).theta) - 5.0) for p in rot_pairs]
    ok = good >= 24 and max(rot_errs) <= 1.0
    report(8, ok, f"shift within 1 px on {good}/25; rotation max error {max(rot_errs):.2f} deg over {len(rot_pairs)} pairs")


TAYLOR_CLASSES = [CENTRO, nfold(2), nfold(4), nfold(3), RADIAL, dihedral(3, 0.4), directional(0.0), directional(0.7), GAUSS]


def taylor_mismatch(f, cls, L, h=1 / 4096, K=5, degree=6, order=3):
    """Largest gap between fitted Taylor coefficients of I(f) and ``(-2 pi i)^|p| C_p L^|p| / p!``, in units of C."""
    v = moment_invariants(f, cls, degree, L)
    C = complex_to_geo(v.values, degree) if v.basis == "complex" else v.values
    k = np.arange(-K, K + 1, dtype=float)
    S, T = (a.ravel() for a in np.meshgrid(k, k))
    beta = cls.beta if cls.kind is Kind.DIRECTIONAL else 0.0
    cb, sb = math.cos(beta), math.sin(beta)
    I = invariant_at(f, cls, h * (cb * S - sb * T), h * (sb * S + cb * T))
    terms = [(p, q) for p in range(degree + 1) for q in range(degree + 1 - p)]
    coef = np.linalg.lstsq(np.stack([S**p * T**q for p, q in terms], 1), I, rcond=None)[0]
    got, want = [], []
    for (p, q), c in zip(terms, coef):
        if p + q <= order:
            scale = (-2j * math.pi * L) ** (p + q) / (math.factorial(p) * math.factorial(q))
            got.append(c / h ** (p + q) / scale)
            want.append(C[p, q])
    got, want = np.array(got), np.array(want)
    return float(np.abs(got - want).max() / np.abs(want).max())


def test_criterion_09_fourier_moment_consistency(report):
    rng = np.random.default_rng(9)
    worst = max(taylor_mismatch(Image(rng.random((16, 16))), cls, 8.0) for cls in TAYLOR_CLASSES)
    report(9, worst <= 1e-3, f"max relative Taylor mismatch {worst:.1e}")


def completeness_probe(f, g, cls):
    return max_abs_diff(convolve_full(f, project(g, cls)), convolve_full(g, project(f, cls)))


def test_criterion_10_completeness_probe(report):
    rng = np.random.default_rng(10)
    canvas = (32, 32)
    worst_equiv = 0.0
    flagged = 0
    for cls in [CENTRO, nfold(4), EVEN1D]:
        for i in range(4):
            f = Image(rng.random((16, 16)))
            g1 = convolve_full(f, random_member(cls, 2, seed=i))
            g2 = convolve_full(f, random_member(cls, 3, seed=100 + i))
            d = spectrum_distance(fourier_invariant(g1, cls, canvas), fourier_invariant(g2, cls, canvas))
            if d <= 1e-6:
                flagged += 1
                worst_equiv = max(worst_equiv, completeness_probe(g1, g2, cls))
    f, other = Image(rng.random((16, 16))), Image(rng.random((16, 16)))
    d_other = spectrum_distance(fourier_invariant(f, CENTRO, canvas), fourier_invariant(other, CENTRO, canvas))
    probe_other = completeness_probe(f, other, CENTRO)
    ok = flagged == 12 and worst_equiv <= 1e-6 and d_other > 1e-6 and probe_other > 1e-6
    report(
        10,
        ok,
        f"{flagged}/12 equivalent pairs flagged, probe residual {worst_equiv:.1e}; "
        f"non-equivalent pair distance {d_other:.2e}, probe residual {probe_other:.2e}",
    )
