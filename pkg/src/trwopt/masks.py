"""Observation masks (1 = observed, 0 = missing)."""

import numpy as np

__all__ = ["gen_mask_random", "gen_mask_block", "gen_mask_lines", "missing_rate"]


def _dims(dims):
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise ValueError(f"invalid dims {dims}")
    return dims


def gen_mask_random(dims, missing_rate, seed=None):
    """Mask with exactly ``round((1 - missing_rate) * num)`` observed entries.

    The observed positions are drawn uniformly without replacement.
    """
    dims = _dims(dims)
    if not 0 <= missing_rate <= 1:
        raise ValueError(f"missing rate must lie in [0, 1], got {missing_rate}")
    num = int(np.prod(dims))
    observed = int(round((1 - missing_rate) * num))
    rng = np.random.default_rng(seed)
    w = np.zeros(num)
    w[rng.permutation(num)[:observed]] = 1.0
    return w.reshape(dims, order="F")


def gen_mask_block(dims, origin, size):
    """Zeros on the box starting at 1-based ``origin`` with extent ``size``."""
    dims = _dims(dims)
    if len(origin) != len(dims) or len(size) != len(dims):
        raise ValueError("origin and size need one entry per mode")
    box = []
    for d, o, s in zip(dims, origin, size):
        if o < 1 or s < 0 or o - 1 + s > d:
            raise ValueError(f"block {tuple(origin)}+{tuple(size)} exceeds dims {dims}")
        box.append(slice(o - 1, o - 1 + s))
    w = np.ones(dims)
    w[tuple(box)] = 0.0
    return w


def gen_mask_lines(dims, axis, indices):
    """Zeros on whole hyperplanes ``i_axis in indices`` (both 1-based)."""
    dims = _dims(dims)
    if not 1 <= axis <= len(dims):
        raise ValueError(f"axis {axis} out of range 1..{len(dims)}")
    idx = [int(i) for i in indices]
    if any(not 1 <= i <= dims[axis - 1] for i in idx):
        raise ValueError(f"line indices {idx} out of range 1..{dims[axis - 1]}")
    w = np.ones(dims)
    sel = [slice(None)] * len(dims)
    sel[axis - 1] = [i - 1 for i in idx]
    w[tuple(sel)] = 0.0
    return w


def missing_rate(w):
    w = np.asarray(w)
    return 1.0 - float(np.count_nonzero(w)) / w.size
