"""Command-line front end: ``blurinv <subcommand> ...``.

Exit codes: 0 success, 1 usage, 2 data error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from .config import FORMATS, SessionConfig
from .errors import DataError, NumericalError
from .experiments import DEFAULT_BLUR_SIZES, DEFAULT_SNRS, mre_sweep
from .image import add_white_gaussian_noise, convolve_full
from .invariants import fourier_invariant, invariant_distance, moment_invariants, spectrum_distance
from .io import encode_bis, read_image, write_image
from .matching import Gallery, classify_nn, match_template
from .projectors import BlurClass, project
from .psf import psf_disk, psf_gaussian, psf_motion, psf_polygon, psf_random_centrosymmetric
from .registration import register_shift, register_shift_rotation

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _canvas(text):
    try:
        w, h = (int(t) for t in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"canvas must look like WxH, got {text!r}") from None
    return (h, w)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("session")
    g.add_argument("--class", dest="blur_class", default="centro",
                   help="blur class: centro, radial, nfold:N, dihedral:N:alpha, directional:beta, gauss, even1d, identity, delta")
    g.add_argument("--r", type=int, default=7, help="maximum moment order (default 7)")
    g.add_argument("--L", type=float, default=None, help="moment length scale in pixels (default: half the larger input side)")
    g.add_argument("--eps", type=float, default=1e-3, help="spectral validity threshold relative to the peak")
    g.add_argument("--lowpass-radius", type=float, default=0.25, help="fraction of Nyquist used by spectral distances")
    g.add_argument("--canvas", type=_canvas, default=None, help="DFT canvas WxH")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--format", choices=FORMATS, default=None, help="output format (default: csv for mre-sweep, json otherwise)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="blurinv", description="Blur-invariant image features, matching and registration.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def add(name, help_):
        return sub.add_parser(name, help=help_, parents=[common], description=help_)

    p = add("psf", "generate a point spread function")
    p.add_argument("kind", choices=("disk", "polygon", "gaussian", "motion", "random"))
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--radius", type=float, default=3.0, help="disk radius or polygon circumradius")
    p.add_argument("--sides", type=int, default=6, help="polygon side count")
    p.add_argument("--rotation", type=float, default=0.0, help="polygon rotation (rad)")
    p.add_argument("--sigma", type=_floats, default=(2.0,), help="sigma or sigma_x,sigma_y")
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--length", type=float, default=7.0, help="motion length")
    p.add_argument("--angle", type=float, default=0.0, help="motion angle (rad)")
    p.add_argument("--half-size", type=int, default=None)

    p = add("blur", "convolve an image with a PSF (full canvas), optionally adding noise")
    p.add_argument("image")
    p.add_argument("psf")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--snr", type=float, default=None, help="noise level in dB (default: no noise)")

    p = add("project", "apply the projector of the blur class")
    p.add_argument("image")
    p.add_argument("-o", "--output", required=True)

    p = add("invariants", "moment blur invariants of an image")
    p.add_argument("image")

    p = add("spectrum", "Fourier blur invariant of an image")
    p.add_argument("image")
    p.add_argument("-o", "--output", help="write the BIS1 spectrum here")

    p = add("dist", "distance between the invariants of two images")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--spectral", action="store_true", help="compare Fourier invariants instead of moments")

    p = add("classify", "nearest-neighbour recognition against a gallery")
    p.add_argument("queries", nargs="+")
    p.add_argument("--gallery", help="gallery directory (manifest.json)")
    p.add_argument("--train", nargs="+", metavar="LABEL=PATH", help="build the gallery from labelled images")
    p.add_argument("--save-gallery", help="persist the built gallery here")

    p = add("match", "locate a template in a blurred scene")
    p.add_argument("scene")
    p.add_argument("template")
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--topk", type=int, default=1)
    p.add_argument("--raw", action="store_true", help="use raw moments (baseline)")

    p = add("register", "blur-invariant phase correlation of two frames")
    p.add_argument("reference")
    p.add_argument("moving")
    p.add_argument("--rotation", action="store_true", help="estimate rotation too")
    p.add_argument("--no-refine", action="store_true", help="integer peak only")

    p = add("mre-sweep", "mean relative invariant error over blur size and SNR")
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--blur-sizes", type=_ints, default=DEFAULT_BLUR_SIZES)
    p.add_argument("--snrs", type=_floats, default=DEFAULT_SNRS)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--index", type=_ints, default=(4, 3), help="invariant index p,q")
    p.add_argument("--threads", type=int, default=None)
    return parser


# ---------------------------------------------------------------------------
# output


def _emit(out, cfg: SessionConfig, result, rows=None, columns=None):
    """JSON: ``{"config", "result"}``. CSV: a ``# config`` comment line, then ``rows``."""
    if cfg.format == "json" or rows is None:
        json.dump({"config": cfg.to_dict(), "result": result}, out, indent=1, allow_nan=True)
        out.write("\n")
        return
    out.write("# config: " + json.dumps(cfg.to_dict(), sort_keys=True) + "\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _write(path, img):
    try:
        write_image(path, img)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from None


# ---------------------------------------------------------------------------
# subcommands


def _cmd_psf(a, cfg, out):
    if a.kind == "disk":
        h = psf_disk(a.radius)
    elif a.kind == "polygon":
        h = psf_polygon(a.sides, a.radius, a.rotation)
    elif a.kind == "gaussian":
        sx, sy = (a.sigma * 2)[:2]
        h = psf_gaussian(sx, sy, a.rho, a.half_size)
    elif a.kind == "motion":
        h = psf_motion(a.length, a.angle)
    else:
        h = psf_random_centrosymmetric(3 if a.half_size is None else a.half_size, cfg.seed)
    _write(a.output, h)
    _emit(out, cfg, {"output": a.output, "kind": a.kind, "width": h.width, "height": h.height, "origin": list(h.origin)})


def _cmd_blur(a, cfg, out):
    g = convolve_full(read_image(a.image), read_image(a.psf))
    if a.snr is not None:
        g = add_white_gaussian_noise(g, a.snr, cfg.seed)
    _write(a.output, g)
    _emit(out, cfg, {"output": a.output, "width": g.width, "height": g.height, "origin": list(g.origin), "snr_db": a.snr})


def _cmd_project(a, cfg, out):
    pf = project(read_image(a.image), cfg.cls)
    _write(a.output, pf)
    _emit(out, cfg, {"output": a.output, "width": pf.width, "height": pf.height, "origin": list(pf.origin)})


def _cmd_invariants(a, cfg, out):
    f = read_image(a.image)
    v = moment_invariants(f, cfg.cls, cfg.r, cfg.length(f))
    d = v.to_dict()
    rows = [(e["p"], e["q"], e["re"], e["im"], int(e["trivial"])) for e in d["entries"]]
    _emit(out, cfg, d, rows, ("p", "q", "re", "im", "trivial"))


def _cmd_spectrum(a, cfg, out):
    f = read_image(a.image)
    s = fourier_invariant(f, cfg.cls, cfg.canvas, cfg.eps)
    if a.output:
        try:
            with open(a.output, "wb") as fh:
                fh.write(encode_bis(s.values, s.mask, s.origin, s.eps))
        except OSError as exc:
            raise DataError(f"cannot write {a.output}: {exc}") from None
    U, V = s.frequencies()
    result = {
        "output": a.output,
        "canvas": [s.canvas[1], s.canvas[0]],
        "eps": s.eps,
        "valid_fraction": float(s.mask.mean()),
    }
    rows = ((float(u), float(v), float(z.real), float(z.imag), int(m))
            for u, v, z, m in zip(U.ravel(), V.ravel(), s.values.ravel(), s.mask.ravel()))
    _emit(out, cfg, result, rows, ("u", "v", "re", "im", "mask"))


def _cmd_dist(a, cfg, out):
    f, g = read_image(a.a), read_image(a.b)
    if a.spectral:
        canvas = cfg.canvas or tuple(max(x, y) for x, y in zip(f.shape, g.shape))
        d = spectrum_distance(
            fourier_invariant(f, cfg.cls, canvas, cfg.eps),
            fourier_invariant(g, cfg.cls, canvas, cfg.eps),
            cfg.lowpass_radius,
        )
    else:
        L = cfg.length(f, g)
        d = invariant_distance(moment_invariants(f, cfg.cls, cfg.r, L), moment_invariants(g, cfg.cls, cfg.r, L))
    _emit(out, cfg, {"distance": d}, [(d,)], ("distance",))


def _cmd_classify(a, cfg, out):
    queries = [read_image(q) for q in a.queries]
    if a.gallery and not a.train:
        gallery = Gallery.load(a.gallery)
        cls_, _, r, L = gallery.config
        blur_class, r, L = BlurClass.parse(cls_), r, L
    elif a.train:
        items = []
        for spec in a.train:
            label, sep, path = spec.partition("=")
            if not sep or not label:
                raise UsageError(f"--train expects LABEL=PATH, got {spec!r}")
            items.append((label, read_image(path)))
        blur_class, r = cfg.cls, cfg.r
        L = cfg.length(*(img for _, img in items), *queries)
        gallery = Gallery.build(items, blur_class, r, L)
        if a.save_gallery or a.gallery:
            gallery.save(a.save_gallery or a.gallery)
    else:
        raise UsageError("classify needs --gallery DIR or --train LABEL=PATH ...")
    preds = []
    for path, q in zip(a.queries, queries):
        preds.append({"query": path, **classify_nn(gallery, q, blur_class, r, L).to_dict()})
    rows = [(p["query"], p["label"], p["distance"], p["margin"], int(p["ambiguous"])) for p in preds]
    _emit(out, cfg, preds, rows, ("query", "label", "distance", "margin", "ambiguous"))


def _cmd_match(a, cfg, out):
    scene, t = read_image(a.scene), read_image(a.template)
    hits = match_template(scene, t, cfg.cls, cfg.r, cfg.L, a.stride, a.topk, raw_moments=a.raw)
    res = [h.to_dict() for h in hits]
    _emit(out, cfg, res, [(h.rank, h.x, h.y, h.distance) for h in hits], ("rank", "x", "y", "distance"))


def _cmd_register(a, cfg, out):
    f, g = read_image(a.reference), read_image(a.moving)
    if a.rotation:
        res = register_shift_rotation(f, g, cfg.cls, cfg.eps, cfg.lowpass_radius, not a.no_refine)
    else:
        res = register_shift(f, g, cfg.cls, cfg.eps, cfg.lowpass_radius, not a.no_refine, canvas=cfg.canvas)
    d = res.to_dict()
    _emit(out, cfg, d, [(d["dx"], d["dy"], d["theta"], d["confidence"], int(d["reliable"]))],
          ("dx", "dy", "theta", "confidence", "reliable"))


def _cmd_mre_sweep(a, cfg, out):
    if len(a.index) != 2:
        raise UsageError("--index expects p,q")
    rows = mre_sweep(a.size, a.blur_sizes, a.snrs, a.trials, cfg.cls, cfg.r, a.index, cfg.seed, threads=a.threads)
    result = [{"blur_size": x.blur_size, "snr_db": x.snr_db, "mre": x.mre} for x in rows]
    _emit(out, cfg, result, [(x.blur_size, x.snr_db, x.mre) for x in rows], ("blur_size", "snr_db", "mre"))


_COMMANDS = {
    "psf": _cmd_psf,
    "blur": _cmd_blur,
    "project": _cmd_project,
    "invariants": _cmd_invariants,
    "spectrum": _cmd_spectrum,
    "dist": _cmd_dist,
    "classify": _cmd_classify,
    "match": _cmd_match,
    "register": _cmd_register,
    "mre-sweep": _cmd_mre_sweep,
}


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
        if a.format is None:
            a.format = "csv" if a.command == "mre-sweep" else "json"
        cfg = SessionConfig(a.blur_class, a.r, a.L, a.eps, a.lowpass_radius, a.canvas, a.seed, a.format)
        buf = io.StringIO()
        _COMMANDS[a.command](a, cfg, buf)
        out.write(buf.getvalue())
        return EXIT_OK
    except UsageError as exc:
        err.write(f"blurinv: usage error: {exc}\n")
        return EXIT_USAGE
    except DataError as exc:
        err.write(f"blurinv: data error: {exc}\n")
        return EXIT_DATA
    except NumericalError as exc:
        err.write(f"blurinv: numerical error: {exc}\n")
        return EXIT_NUMERICAL
    except OSError as exc:
        err.write(f"blurinv: data error: {exc}\n")
        return EXIT_DATA
    except ValueError as exc:
        err.write(f"blurinv: usage error: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
