"""Tensor-ring cores and reconstruction.

A tensor ring of order N is a list of third-order cores ``G[n]`` of shape
``(R_n, I_n, R_{n+1})`` with the ring closed by ``R_{N+1} = R_1``.  Entry
``(i_1, ..., i_N)`` of the represented tensor is the trace of the product of
the lateral slices ``G[1][:, i_1, :] @ ... @ G[N][:, i_N, :]``.
"""

import numpy as np

from .tensor import fold_shift, unfold_classic, unfold_shift

__all__ = [
    "TRCores",
    "normalize_ranks",
    "init_random",
    "slice_core",
    "reconstruct_elem",
    "reconstruct_full",
    "subchain",
    "matricized_product",
]


def normalize_ranks(ranks, order):
    """Return the closed rank tuple ``(R_1, ..., R_N, R_1)``.

    Accepts a scalar (uniform ranks), ``N`` values, or ``N + 1`` values whose
    ends agree.
    """
    if order < 2:
        raise ValueError("a tensor ring needs at least two cores")
    if np.isscalar(ranks):
        ranks = [ranks]
    ranks = [int(r) for r in ranks]
    if len(ranks) == 1:
        ranks = ranks * order
    if len(ranks) == order:
        ranks = ranks + [ranks[0]]
    if len(ranks) != order + 1:
        raise ValueError(f"expected 1, {order} or {order + 1} ranks, got {len(ranks)}")
    if ranks[-1] != ranks[0]:
        raise ValueError(f"ring is not closed: R_1={ranks[0]} but R_{order + 1}={ranks[-1]}")
    if any(r < 1 for r in ranks):
        raise ValueError(f"ranks must be positive, got {ranks}")
    return tuple(ranks)


class TRCores:
    """Immutable container for the cores of a tensor ring.

    Parameters
    ----------
    cores : sequence of array_like
        Third-order cores; core ``n`` has shape ``(R_n, I_n, R_{n+1})``.

    Attributes
    ----------
    dims : tuple of int
        ``(I_1, ..., I_N)``.
    ranks : tuple of int
        ``(R_1, ..., R_N, R_{N+1})`` with ``R_{N+1} == R_1``.
    """

    def __init__(self, cores):
        cores = [np.array(c, dtype=np.float64) for c in cores]
        if len(cores) < 2:
            raise ValueError("a tensor ring needs at least two cores")
        for k, c in enumerate(cores):
            if c.ndim != 3:
                raise ValueError(f"core {k + 1} must be third-order, got shape {c.shape}")
            if not np.all(np.isfinite(c)):
                raise ValueError(f"core {k + 1} contains NaN or Inf")
            nxt = cores[(k + 1) % len(cores)]
            if c.shape[2] != nxt.shape[0]:
                raise ValueError(
                    f"rank mismatch between core {k + 1} {c.shape} and core "
                    f"{(k + 1) % len(cores) + 1} {nxt.shape}"
                )
            c.setflags(write=False)
        self._cores = tuple(cores)
        self.dims = tuple(c.shape[1] for c in cores)
        self.ranks = tuple(c.shape[0] for c in cores) + (cores[0].shape[0],)

    @property
    def cores(self):
        return self._cores

    @property
    def order(self):
        return len(self._cores)

    def __len__(self):
        return len(self._cores)

    def __getitem__(self, n):
        """Core ``n`` (1-based)."""
        if not 1 <= n <= self.order:
            raise IndexError(f"core {n} out of range 1..{self.order}")
        return self._cores[n - 1]

    def __repr__(self):
        return f"TRCores(dims={self.dims}, ranks={self.ranks})"

    @property
    def num_params(self):
        return sum(c.size for c in self._cores)

    def replace(self, n, core):
        """New ring with core ``n`` (1-based) swapped for ``core``."""
        cores = list(self._cores)
        cores[n - 1] = core
        return TRCores(cores)

    def rotate(self, shift=1):
        """Cyclically rotate the core list left by ``shift`` positions."""
        shift %= self.order
        return TRCores(self._cores[shift:] + self._cores[:shift])


def init_random(dims, ranks, seed=None):
    """Gaussian cores with standard deviation ``1/sqrt(mean rank)``."""
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ValueError(f"dimensions must be positive, got {dims}")
    ranks = normalize_ranks(ranks, len(dims))
    rng = np.random.default_rng(seed)
    scale = 1.0 / np.sqrt(np.mean(ranks[:-1]))
    cores = [
        scale * rng.standard_normal((ranks[k], dims[k], ranks[k + 1]))
        for k in range(len(dims))
    ]
    return TRCores(cores)


def slice_core(cores, n, i):
    """Lateral slice ``G[n][:, i, :]`` with 1-based ``n`` and ``i``."""
    core = cores[n]
    if not 1 <= i <= core.shape[1]:
        raise IndexError(f"index {i} out of range 1..{core.shape[1]} for mode {n}")
    return core[:, i - 1, :]


def reconstruct_elem(cores, index):
    """Single entry of the ring, computed as a trace of slice products.

    ``index`` is 1-based.
    """
    if len(index) != cores.order:
        raise IndexError(f"expected {cores.order} indices, got {len(index)}")
    prod = slice_core(cores, 1, index[0])
    for n in range(2, cores.order + 1):
        prod = prod @ slice_core(cores, n, index[n - 1])
    return float(np.trace(prod))


def subchain(cores, n):
    """Merge every core except ``n`` into one third-order tensor.

    The result has shape ``(R_{n+1}, prod_{k != n} I_k, R_n)``; its middle
    index enumerates ``(i_{n+1}, ..., i_N, i_1, ..., i_{n-1})`` with
    ``i_{n+1}`` fastest, the same column order as ``unfold_shift(X, n)``.
    """
    N = cores.order
    if not 1 <= n <= N:
        raise ValueError(f"mode {n} out of range 1..{N}")
    order = [(n + k) % N for k in range(N - 1)]
    out = cores.cores[order[0]]
    for k in order[1:]:
        g = cores.cores[k]
        merged = np.einsum("ajb,bic->ajic", out, g)
        out = merged.reshape(out.shape[0], -1, g.shape[2], order="F")
    return out


def core_unfolding(cores, n):
    """``G[n]_(2)``: mode-2 classical unfolding of core ``n``.

    Columns enumerate ``(r_n, r_{n+1})`` with ``r_n`` fastest.
    """
    return unfold_classic(cores[n], 2)


def subchain_unfolding(cores, n):
    """``G^{(!=n)}_<2>``, the circular mode-2 unfolding of the subchain.

    Columns enumerate ``(r_n, r_{n+1})`` with ``r_n`` fastest, matching
    :func:`core_unfolding`.
    """
    return unfold_shift(subchain(cores, n), 2)


def matricized_product(cores, n):
    """``G[n]_(2) @ G^{(!=n)}_<2>.T``, the circular mode-n unfolding of the ring."""
    return core_unfolding(cores, n) @ subchain_unfolding(cores, n).T


def reconstruct_full(cores):
    """The full dense tensor represented by ``cores``."""
    return np.ascontiguousarray(fold_shift(matricized_product(cores, 1), 1, cores.dims))
