"""File formats: TRT1 tensors, masks, core lists and binary PPM images.

TRT1 layout (all little-endian)::

    b"TRT1" | uint64 N | N x uint64 dims | prod(dims) x float64, first index fastest

A core file is several TRT1 records back to back, one per core.
"""

import json
import math
import struct
from pathlib import Path

import numpy as np

from .ring import TRCores
from .tensor import as_tensor

__all__ = [
    "FormatError",
    "MAGIC",
    "dump_tensor",
    "load_tensor",
    "read_tensor",
    "write_tensor",
    "read_mask",
    "write_mask",
    "check_mask",
    "read_cores",
    "write_cores",
    "read_ppm",
    "write_ppm",
    "is_ppm",
    "write_json",
]

MAGIC = b"TRT1"


class FormatError(ValueError):
    """Malformed or truncated file contents."""


def dump_tensor(x):
    """Serialize one tensor to a TRT1 record."""
    x = as_tensor(x)
    header = MAGIC + struct.pack(f"<{x.ndim + 1}Q", x.ndim, *x.shape)
    return header + x.ravel(order="F").astype("<f8").tobytes()


def load_tensor(buf, offset=0):
    """Parse one TRT1 record from ``buf`` at ``offset``.

    Returns the tensor and the offset just past the record.
    """
    if buf[offset:offset + 4] != MAGIC:
        raise FormatError("bad magic, not a TRT1 record")
    pos = offset + 4
    if len(buf) < pos + 8:
        raise FormatError("truncated header")
    (ndim,) = struct.unpack_from("<Q", buf, pos)
    pos += 8
    if ndim < 1 or len(buf) < pos + 8 * ndim:
        raise FormatError(f"truncated or invalid header (N={ndim})")
    dims = struct.unpack_from(f"<{ndim}Q", buf, pos)
    pos += 8 * ndim
    if any(d < 1 for d in dims):
        raise FormatError(f"invalid dims {dims}")
    count = math.prod(dims)
    end = pos + 8 * count
    if len(buf) < end:
        raise FormatError(f"truncated payload: need {8 * count} bytes, have {len(buf) - pos}")
    data = np.frombuffer(buf, dtype="<f8", count=count, offset=pos).astype(np.float64)
    try:
        x = as_tensor(data.reshape(dims, order="F"))
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    return x, end


def write_tensor(path, x):
    Path(path).write_bytes(dump_tensor(x))


def read_tensor(path):
    buf = Path(path).read_bytes()
    x, end = load_tensor(buf)
    if end != len(buf):
        raise FormatError(f"{len(buf) - end} trailing bytes after tensor record")
    return x


def check_mask(w):
    w = np.asarray(w, dtype=np.float64)
    bad = ~((w == 0) | (w == 1))
    if np.any(bad):
        idx = tuple(int(i) + 1 for i in np.argwhere(bad)[0])
        raise ValueError(f"mask entry at {idx} is {w[bad][0]!r}, expected 0 or 1")
    return w


def write_mask(path, w):
    write_tensor(path, check_mask(w))


def read_mask(path):
    try:
        return check_mask(read_tensor(path))
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_cores(path, cores):
    Path(path).write_bytes(b"".join(dump_tensor(c) for c in cores.cores))


def read_cores(path):
    buf = Path(path).read_bytes()
    cores, pos = [], 0
    while pos < len(buf):
        c, pos = load_tensor(buf, pos)
        cores.append(c)
    return TRCores(cores)


def _ppm_tokens(buf, count):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(buf) and buf[pos:pos + 1].isspace():
            pos += 1
        if buf[pos:pos + 1] == b"#":
            while pos < len(buf) and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(buf) and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError("truncated PPM header")
        tokens.append(buf[start:pos])
    # exactly one whitespace byte separates the header from the raster
    return tokens, pos + 1


def read_ppm(path):
    """Read a binary (P6) PPM with maxval 255 as a ``height x width x 3`` tensor."""
    buf = Path(path).read_bytes()
    tokens, pos = _ppm_tokens(buf, 4)
    if tokens[0] != b"P6":
        raise FormatError(f"not a binary PPM (magic {tokens[0]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise FormatError(f"bad PPM header: {exc}") from exc
    if maxval != 255:
        raise FormatError(f"unsupported PPM maxval {maxval}, expected 255")
    if width < 1 or height < 1:
        raise FormatError(f"bad PPM size {width}x{height}")
    n = width * height * 3
    if len(buf) < pos + n:
        raise FormatError(f"truncated PPM raster: need {n} bytes, have {len(buf) - pos}")
    raster = np.frombuffer(buf, dtype=np.uint8, count=n, offset=pos)
    return raster.reshape(height, width, 3).astype(np.float64)


def write_ppm(path, img):
    """Write a ``height x width x 3`` tensor as P6, clipping to [0, 255] and rounding."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected a height x width x 3 image, got shape {img.shape}")
    height, width = img.shape[:2]
    raster = np.rint(np.clip(img, 0, 255)).astype(np.uint8)
    Path(path).write_bytes(b"P6\n%d %d\n255\n" % (width, height) + raster.tobytes())


def is_ppm(path):
    with open(path, "rb") as fh:
        return fh.read(2) == b"P6"


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
