"""Dense tensors, matricizations and elementwise algebra.

Tensors are plain ``numpy.ndarray`` objects of dtype float64.  Whenever a
tensor is linearized (flattened, matricized, written to disk) the first
index varies fastest, i.e. numpy ``order='F'``.  Mode arguments are 1-based
to match the usual ``X_(n)`` / ``X_<n>`` notation.
"""

import numpy as np

__all__ = [
    "as_tensor",
    "from_flat",
    "flat",
    "unfold_classic",
    "unfold_shift",
    "fold_shift",
    "hadamard",
    "inner",
    "frobenius_norm",
]


def as_tensor(x, copy=False):
    """Validate ``x`` and return it as a float64 array.

    Rejects zero-dimensional input, empty dimensions and non-finite values.
    """
    arr = np.array(x, dtype=np.float64, copy=copy) if copy else np.asarray(x, dtype=np.float64)
    if arr.ndim < 1:
        raise ValueError("a tensor needs at least one mode")
    if any(d < 1 for d in arr.shape):
        raise ValueError(f"all dimensions must be >= 1, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("tensor contains NaN or Inf")
    return arr


def from_flat(dims, data):
    """Build a tensor from a flat first-index-fastest data list."""
    dims = tuple(int(d) for d in dims)
    data = np.asarray(data, dtype=np.float64).ravel()
    if data.size != int(np.prod(dims)):
        raise ValueError(f"data length {data.size} does not match dims {dims}")
    return as_tensor(data.reshape(dims, order="F"))


def flat(x):
    """Flat data of ``x`` in first-index-fastest order."""
    return np.asarray(x).ravel(order="F")


def _check_mode(x, n):
    if not 1 <= n <= x.ndim:
        raise ValueError(f"mode {n} out of range for a tensor of order {x.ndim}")


def unfold_classic(x, n):
    """Classical mode-n unfolding ``X_(n)``.

    Remaining modes keep their natural order, the smallest-numbered one
    varying fastest along the columns.
    """
    x = np.asarray(x)
    _check_mode(x, n)
    return np.moveaxis(x, n - 1, 0).reshape(x.shape[n - 1], -1, order="F")


def _shift_axes(ndim, n):
    # (n, n+1, ..., N, 1, ..., n-1) as 0-based axes
    return [(n - 1 + k) % ndim for k in range(ndim)]


def unfold_shift(x, n):
    """Circular mode-n unfolding ``X_<n>``.

    Columns enumerate ``(i_{n+1}, ..., i_N, i_1, ..., i_{n-1})`` with
    ``i_{n+1}`` varying fastest.
    """
    x = np.asarray(x)
    _check_mode(x, n)
    return x.transpose(_shift_axes(x.ndim, n)).reshape(x.shape[n - 1], -1, order="F")


def fold_shift(m, n, dims):
    """Inverse of :func:`unfold_shift`."""
    m = np.asarray(m)
    dims = tuple(int(d) for d in dims)
    if not 1 <= n <= len(dims):
        raise ValueError(f"mode {n} out of range for a tensor of order {len(dims)}")
    axes = _shift_axes(len(dims), n)
    shifted = tuple(dims[a] for a in axes)
    if m.ndim != 2 or m.shape[0] != dims[n - 1] or m.size != int(np.prod(dims)):
        raise ValueError(f"matrix of shape {m.shape} cannot be folded into {dims} along mode {n}")
    return m.reshape(shifted, order="F").transpose(np.argsort(axes))


def _check_same(x, y):
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")


def hadamard(x, y):
    """Elementwise product of two equally sized tensors."""
    x, y = np.asarray(x), np.asarray(y)
    _check_same(x, y)
    return x * y


def inner(x, y):
    """Sum of ``x * y`` over all entries.

    Summation runs over the first-index-fastest linearization with numpy's
    pairwise reduction, so the result is reproducible for a given shape.
    """
    x, y = np.asarray(x), np.asarray(y)
    _check_same(x, y)
    return float(np.sum(flat(x) * flat(y)))


def frobenius_norm(x):
    return float(np.sqrt(inner(x, x)))
