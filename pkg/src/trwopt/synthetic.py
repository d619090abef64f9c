"""Synthetic oscillating test signals."""

import numpy as np

FORMS = ("literal", "x4")

# dimension settings used for the synthetic completion benchmarks
DEFAULT_SHAPES = ((48, 48, 48), (16, 16, 16, 16), (10,) * 5, (7,) * 6)

# x ranges over [0, DEFAULT_SCALE) whatever the length; cos(x**2) then spans
# about 16 periods and stays far below the sampling limit for all shapes above
DEFAULT_SCALE = 10.0


def oscillating(x, form="literal"):
    """``sin(pi/4) * cos(x**2)`` (``"literal"``) or ``sin(x/4) * cos(x**2)`` (``"x4"``)."""
    x = np.asarray(x, dtype=np.float64)
    if form == "literal":
        return np.sin(np.pi / 4) * np.cos(x * x)
    if form == "x4":
        return np.sin(x / 4) * np.cos(x * x)
    raise ValueError(f"unknown form {form!r}, expected one of {FORMS}")


def gen_synthetic(length, scale=DEFAULT_SCALE, form="literal"):
    """Sample the oscillating signal on a uniform grid.

    Sample ``k`` (0-based) sits at ``x = k * scale / length``.
    """
    length = int(length)
    if length < 1:
        raise ValueError("length must be >= 1")
    if scale <= 0:
        raise ValueError("scale must be positive")
    x = np.arange(length, dtype=np.float64) * (scale / length)
    return oscillating(x, form)


def synthetic_tensor(dims, scale=DEFAULT_SCALE, form="literal"):
    """Synthetic signal reshaped to ``dims`` (first index fastest)."""
    dims = tuple(int(d) for d in dims)
    return gen_synthetic(int(np.prod(dims)), scale, form).reshape(dims, order="F")
