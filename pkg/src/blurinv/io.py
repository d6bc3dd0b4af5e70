"""Image file formats: PGM (P2/P5) and the raw float formats BIF1 / BIS1.

BIF1 layout::

    BIF1 W H ox oy\\n
    W*H float64 little-endian samples, row-major

BIS1 (invariant spectra) layout::

    BIS1 W H ox oy eps\\n
    W*H complex samples as interleaved float64 LE (re, im), row-major
    W*H mask bytes (0 or 1)
"""

from __future__ import annotations

import os
import re

import numpy as np

from .errors import DataError
from .image import Image

_BIF_DTYPE = np.dtype("<f8")


def _split_header(data: bytes, fields: int) -> tuple[list[bytes], int]:
    nl = data.find(b"\n")
    if nl < 0:
        raise DataError("malformed header: missing newline")
    parts = data[:nl].split()
    if len(parts) != fields:
        raise DataError(f"malformed header: expected {fields} fields, got {len(parts)}")
    return parts, nl + 1


def _parse_dims(parts):
    try:
        w, h = int(parts[1]), int(parts[2])
        rest = [float(p) for p in parts[3:]]
    except ValueError as exc:
        raise DataError(f"malformed header: {exc}") from None
    if w < 1 or h < 1:
        raise DataError(f"malformed header: bad size {w}x{h}")
    return w, h, rest


def encode_bif(f: Image) -> bytes:
    ox, oy = f.origin
    header = f"BIF1 {f.width} {f.height} {ox!r} {oy!r}\n".encode("ascii")
    return header + np.ascontiguousarray(f.samples, dtype=_BIF_DTYPE).tobytes()


def decode_bif(data: bytes) -> Image:
    if not data.startswith(b"BIF1"):
        raise DataError("unsupported magic (expected BIF1)")
    parts, off = _split_header(data, 5)
    w, h, (ox, oy) = _parse_dims(parts)
    need = w * h * 8
    payload = data[off:]
    if len(payload) < need:
        raise DataError("truncated payload")
    a = np.frombuffer(payload[:need], dtype=_BIF_DTYPE).reshape(h, w)
    return Image(a.astype(np.float64), (ox, oy))


def encode_bis(values: np.ndarray, mask: np.ndarray, origin, eps: float) -> bytes:
    h, w = values.shape
    header = f"BIS1 {w} {h} {origin[0]!r} {origin[1]!r} {eps!r}\n".encode("ascii")
    inter = np.empty((h, w, 2), dtype=_BIF_DTYPE)
    inter[..., 0] = values.real
    inter[..., 1] = values.imag
    return header + inter.tobytes() + np.asarray(mask, dtype=np.uint8).tobytes()


def decode_bis(data: bytes):
    """Return ``(values, mask, origin, eps)``."""
    if not data.startswith(b"BIS1"):
        raise DataError("unsupported magic (expected BIS1)")
    parts, off = _split_header(data, 6)
    w, h, (ox, oy, eps) = _parse_dims(parts)
    need = w * h * 17
    payload = data[off:]
    if len(payload) < need:
        raise DataError("truncated payload")
    inter = np.frombuffer(payload[: w * h * 16], dtype=_BIF_DTYPE).reshape(h, w, 2)
    mask = np.frombuffer(payload[w * h * 16 : need], dtype=np.uint8).reshape(h, w)
    if np.any(mask > 1):
        raise DataError("mask plane must contain only 0 and 1")
    return inter[..., 0] + 1j * inter[..., 1], mask.astype(bool), (ox, oy), eps


_PGM_TOKEN = re.compile(rb"(#[^\n]*\n?)|(\S+)")


def _pgm_tokens(data: bytes, start: int, count: int):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    out = []
    pos = start
    while len(out) < count:
        m = _PGM_TOKEN.search(data, pos)
        if m is None:
            raise DataError("malformed header: PGM header ended early")
        pos = m.end()
        if m.group(2) is not None:
            out.append(m.group(2))
    return out, pos


def decode_pgm(data: bytes) -> Image:
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise DataError(f"unsupported magic {magic!r} (expected P2 or P5)")
    toks, pos = _pgm_tokens(data, 2, 3)
    try:
        w, h, maxval = (int(t) for t in toks)
    except ValueError:
        raise DataError("malformed header: non-integer PGM field") from None
    if w < 1 or h < 1 or not 0 < maxval < 65536:
        raise DataError(f"malformed header: size {w}x{h}, maxval {maxval}")
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype("u1") if maxval < 256 else np.dtype(">u2")
        need = w * h * dtype.itemsize
        if len(data) - pos < need:
            raise DataError("truncated payload")
        a = np.frombuffer(data[pos : pos + need], dtype=dtype).reshape(h, w)
    else:
        body = re.sub(rb"#[^\n]*", b"", data[pos:]).split()
        if len(body) < w * h:
            raise DataError("truncated payload")
        try:
            a = np.array([int(t) for t in body[: w * h]], dtype=np.int64).reshape(h, w)
        except ValueError:
            raise DataError("malformed P2 payload") from None
    if np.any(a > maxval):
        raise DataError("PGM sample exceeds maxval")
    return Image(a.astype(np.float64) / maxval)


def encode_pgm(f: Image, maxval: int = 255, ascii: bool = False) -> bytes:
    """Quantize samples clipped to [0, 1]; the origin is not stored."""
    if not 0 < maxval < 65536:
        raise DataError(f"bad maxval {maxval}")
    q = np.rint(np.clip(f.samples, 0.0, 1.0) * maxval).astype(np.int64)
    if ascii:
        rows = "\n".join(" ".join(str(v) for v in row) for row in q)
        return f"P2\n{f.width} {f.height}\n{maxval}\n{rows}\n".encode("ascii")
    header = f"P5\n{f.width} {f.height}\n{maxval}\n".encode("ascii")
    dtype = np.dtype("u1") if maxval < 256 else np.dtype(">u2")
    return header + q.astype(dtype).tobytes()


def read_image(path) -> Image:
    """Read a PGM (P2/P5) or BIF1 file, dispatching on the magic bytes."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data.startswith(b"BIF1"):
        return decode_bif(data)
    if data[:2] in (b"P2", b"P5"):
        return decode_pgm(data)
    raise DataError(f"unsupported magic in {os.fspath(path)!r}")


def write_image(path, f: Image, maxval: int = 255) -> None:
    """Write BIF1 unless the extension is ``.pgm``."""
    path = os.fspath(path)
    if path.lower().endswith(".pgm"):
        data = encode_pgm(f, maxval=maxval)
    else:
        data = encode_bif(f)
    with open(path, "wb") as fh:
        fh.write(data)
