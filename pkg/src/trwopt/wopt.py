"""Weighted optimization of tensor-ring cores (TR-WOPT).

The cores are fitted to the observed entries of a zero-filled tensor ``T``
by minimizing ``0.5 * ||W * (T - X(G))||_F^2`` with nonlinear conjugate
gradients, after which the missing entries are filled from the fitted ring.
"""

import logging
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import line_search
from scipy.optimize._linesearch import LineSearchWarning

from .ring import (
    TRCores,
    core_unfolding,
    init_random,
    normalize_ranks,
    reconstruct_full,
    subchain_unfolding,
)
from .tensor import as_tensor, fold_shift, unfold_shift

__all__ = [
    "OptimizerConfig",
    "IterationRecord",
    "CompletionReport",
    "NumericalAbort",
    "objective",
    "gradient",
    "gradient_all",
    "pack",
    "unpack",
    "pack_cores",
    "unpack_cores",
    "optimize",
    "complete",
]

log = logging.getLogger(__name__)


class NumericalAbort(ArithmeticError):
    """The objective became NaN or infinite."""


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for :func:`optimize`.

    ``c1`` and ``c2`` are the strong-Wolfe constants, ``max_ls_steps`` bounds
    the number of line-search iterations and every ``cg_restart_period``
    iterations the search direction is reset to steepest descent.
    """

    max_iters: int = 500
    rel_tol: float = 1e-6
    c1: float = 1e-4
    c2: float = 0.9
    max_ls_steps: int = 25
    cg_restart_period: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0 < self.c1 < self.c2 < 1:
            raise ValueError("line-search constants must satisfy 0 < c1 < c2 < 1")
        if self.rel_tol < 0:
            raise ValueError("rel_tol must be non-negative")
        if self.max_ls_steps < 1 or self.cg_restart_period < 1:
            raise ValueError("max_ls_steps and cg_restart_period must be >= 1")


@dataclass
class IterationRecord:
    iter: int
    objective: float
    rel_change: float


@dataclass
class CompletionReport:
    """Trace of an :func:`optimize` run.

    ``rse`` is the relative error of the final fit on the observed entries
    (``None`` when the observed part of ``T`` is identically zero).
    ``stop_reason`` is one of ``"max_iters"``, ``"tolerance"`` or
    ``"line_search_failed"``.
    """

    iterations: list = field(default_factory=list)
    initial_objective: float = float("nan")
    rse: float = None
    stop_reason: str = ""

    @property
    def objectives(self):
        return [r.objective for r in self.iterations]

    @property
    def final_objective(self):
        return self.iterations[-1].objective if self.iterations else self.initial_objective

    def to_dict(self):
        return {
            "iterations": [asdict(r) for r in self.iterations],
            "initial_objective": self.initial_objective,
            "final": {"rse": self.rse, "stop_reason": self.stop_reason},
        }


def _check_problem(cores, T, W):
    T = np.asarray(T, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    if T.shape != W.shape:
        raise ValueError(f"T has shape {T.shape} but W has shape {W.shape}")
    if cores is not None and tuple(cores.dims) != T.shape:
        raise ValueError(f"cores represent dims {cores.dims} but T has shape {T.shape}")
    return T, W


def _residual(X, T, W):
    # where() rather than a product so that values of T under W == 0 never leak
    return np.where(W != 0, X - T, 0.0)


def objective(cores, T, W):
    """``0.5 * ||W * (T - X)||_F^2`` summed over observed entries only."""
    T, W = _check_problem(cores, T, W)
    E = _residual(reconstruct_full(cores), T, W)
    return 0.5 * float(np.sum(E * E))


def gradient(cores, T, W, n):
    """Partial derivative of the objective w.r.t. ``G[n]_(2)``.

    Returns an ``I_n x (R_n * R_{n+1})`` matrix with the column layout of
    :func:`trwopt.ring.core_unfolding`.
    """
    T, W = _check_problem(cores, T, W)
    if not 1 <= n <= cores.order:
        raise ValueError(f"mode {n} out of range 1..{cores.order}")
    G2 = core_unfolding(cores, n)
    S2 = subchain_unfolding(cores, n)
    E = np.where(unfold_shift(W, n) != 0, G2 @ S2.T - unfold_shift(T, n), 0.0)
    return E @ S2


def _value_and_gradients(cores, T, W):
    """Objective, per-mode gradients and full reconstruction in one pass."""
    S = [subchain_unfolding(cores, n) for n in range(1, cores.order + 1)]
    X = fold_shift(core_unfolding(cores, 1) @ S[0].T, 1, cores.dims)
    E = _residual(X, T, W)
    f = 0.5 * float(np.sum(E * E))
    grads = [unfold_shift(E, n) @ S[n - 1] for n in range(1, cores.order + 1)]
    return f, grads, X


def gradient_all(cores, T, W):
    """Gradients of all modes, ``n = 1..N``."""
    T, W = _check_problem(cores, T, W)
    return _value_and_gradients(cores, T, W)[1]


def pack(mats):
    """Concatenate matrices into one vector, each in first-index-fastest order."""
    return np.concatenate([np.asarray(m).ravel(order="F") for m in mats])


def unpack(vec, shapes):
    """Split ``vec`` back into matrices of the given ``shapes``."""
    vec = np.asarray(vec)
    sizes = [int(np.prod(s)) for s in shapes]
    if vec.ndim != 1 or vec.size != sum(sizes):
        raise ValueError(f"vector of length {vec.size} does not match total size {sum(sizes)}")
    out, start = [], 0
    for s, k in zip(shapes, sizes):
        out.append(vec[start:start + k].reshape(s, order="F"))
        start += k
    return out


def _unfolding_shapes(dims, ranks):
    return [(dims[k], ranks[k] * ranks[k + 1]) for k in range(len(dims))]


def pack_cores(cores):
    """Flatten the ``G[n]_(2)`` unfoldings of all cores, matching :func:`pack` of gradients."""
    return pack([core_unfolding(cores, n) for n in range(1, cores.order + 1)])


def unpack_cores(vec, dims, ranks):
    """Inverse of :func:`pack_cores`."""
    mats = unpack(vec, _unfolding_shapes(dims, ranks))
    cores = [
        m.reshape(dims[k], ranks[k], ranks[k + 1], order="F").transpose(1, 0, 2)
        for k, m in enumerate(mats)
    ]
    return TRCores(cores)


class _Problem:
    """Objective/gradient oracle over the packed core vector, caching the last point."""

    def __init__(self, T, W, dims, ranks):
        self.T, self.W = T, W
        self.dims, self.ranks = dims, ranks
        self._key = None
        self._val = None

    def evaluate(self, x):
        key = x.tobytes()
        if key != self._key:
            with np.errstate(over="ignore", invalid="ignore"):
                cores = _unsafe_cores(x, self.dims, self.ranks)
                f, grads, X = _value_and_gradients(cores, self.T, self.W)
                g = pack(grads)
            if not (np.isfinite(f) and np.all(np.isfinite(g))):
                f = np.inf
            self._key, self._val = key, (f, g, X)
        return self._val

    def f(self, x):
        return self.evaluate(x)[0]

    def g(self, x):
        return self.evaluate(x)[1]


class _RawCores(TRCores):
    # skips the finiteness check; only used for trial points inside the line search
    def __init__(self, cores):
        self._cores = cores = tuple(cores)
        self.dims = tuple(c.shape[1] for c in cores)
        self.ranks = tuple(c.shape[0] for c in cores) + (cores[0].shape[0],)


def _unsafe_cores(x, dims, ranks):
    mats = unpack(x, _unfolding_shapes(dims, ranks))
    return _RawCores(
        m.reshape(dims[k], ranks[k], ranks[k + 1], order="F").transpose(1, 0, 2)
        for k, m in enumerate(mats)
    )


def _rel_change(X_new, X_old):
    den = np.linalg.norm(X_new)
    num = np.linalg.norm(X_new - X_old)
    if den == 0:
        return 0.0 if num == 0 else np.inf
    return float(num / den)


def _observed_rse(X, T, W):
    den = np.linalg.norm(np.where(W != 0, T, 0.0))
    if den == 0:
        return None
    return float(np.linalg.norm(_residual(X, T, W)) / den)


def optimize(T, W, ranks, cfg=None, init=None):
    """Fit tensor-ring cores to the observed entries of ``T``.

    Parameters
    ----------
    T : ndarray
        Data tensor, zero-filled at missing entries.
    W : ndarray
        Binary weight tensor, 1 where ``T`` is observed.
    ranks : int or sequence of int
        Uniform rank, ``N`` ranks, or ``N + 1`` ranks with matching ends.
    cfg : OptimizerConfig, optional
    init : TRCores, optional
        Starting cores; drawn with :func:`trwopt.ring.init_random` and
        ``cfg.seed`` when omitted.

    Returns
    -------
    cores : TRCores
    report : CompletionReport

    Notes
    -----
    Polak-Ribiere+ conjugate gradients with a strong-Wolfe line search over
    all cores jointly.  The run stops after ``cfg.max_iters`` iterations or
    once ``||X_k - X_{k-1}||_F / ||X_k||_F < cfg.rel_tol``.  A line search
    that fails twice in a row (the second time along steepest descent) also
    ends the run; the last accepted iterate is returned.
    """
    cfg = cfg or OptimizerConfig()
    # fixed memory layout so BLAS reductions do not depend on how inputs were built
    T = np.ascontiguousarray(as_tensor(T))
    W = np.ascontiguousarray(as_tensor(W))
    if T.shape != W.shape:
        raise ValueError(f"T has shape {T.shape} but W has shape {W.shape}")
    if not np.all((W == 0) | (W == 1)):
        raise ValueError("weight tensor must be binary")
    dims = T.shape
    if init is None:
        ranks = normalize_ranks(ranks, len(dims))
        init = init_random(dims, ranks, cfg.seed)
    else:
        if init.dims != dims:
            raise ValueError(f"initial cores have dims {init.dims}, expected {dims}")
        ranks = init.ranks

    prob = _Problem(T, W, dims, ranks)
    x = pack_cores(init)
    f, g, X = prob.evaluate(x)
    if not np.isfinite(f):
        raise NumericalAbort("objective is not finite at the initial point")
    report = CompletionReport(initial_objective=f)
    d = -g
    # first trial step of roughly unit length along -g
    f_prev = f + np.linalg.norm(g) / 2
    stop = "max_iters"

    for it in range(1, cfg.max_iters + 1):
        gg = float(g @ g)
        if gg == 0.0:
            # stationary point: any further iterate equals the current one
            report.iterations.append(IterationRecord(it, f, 0.0))
            stop = "tolerance"
            break
        if float(g @ d) >= 0:
            d = -g
        alpha = _search(prob, x, d, g, f, f_prev, cfg)
        if alpha is None and not np.array_equal(d, -g):
            d = -g
            alpha = _search(prob, x, d, g, f, f_prev, cfg)
        if alpha is None:
            log.info("line search failed at iteration %d", it)
            stop = "line_search_failed"
            break

        x_new = x + alpha * d
        f_new, g_new, X_new = prob.evaluate(x_new)
        if not np.isfinite(f_new):
            raise NumericalAbort(f"objective is not finite at iteration {it}")
        if f_new > f:
            # Wolfe acceptance should rule this out; keep the better iterate
            stop = "line_search_failed"
            break

        rel = _rel_change(X_new, X)
        report.iterations.append(IterationRecord(it, f_new, rel))
        log.debug("iter %d  f=%.6e  rel=%.3e", it, f_new, rel)

        beta = 0.0
        if it % cfg.cg_restart_period != 0:
            beta = max(0.0, float(g_new @ (g_new - g)) / gg)
        d = -g_new + beta * d
        f_prev, f = f, f_new
        x, g, X = x_new, g_new, X_new
        if rel < cfg.rel_tol:
            stop = "tolerance"
            break

    cores = unpack_cores(x, dims, ranks)
    report.rse = _observed_rse(X, T, W)
    report.stop_reason = stop
    return cores, report


def _search(prob, x, d, g, f, f_prev, cfg):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LineSearchWarning)
        with np.errstate(over="ignore", invalid="ignore"):
            alpha = line_search(
                prob.f,
                prob.g,
                x,
                d,
                gfk=g,
                old_fval=f,
                old_old_fval=f_prev,
                c1=cfg.c1,
                c2=cfg.c2,
                maxiter=cfg.max_ls_steps,
            )[0]
    if alpha is None or not np.isfinite(alpha) or alpha <= 0:
        return None
    return float(alpha)


def complete(T, W, cores):
    """Observed entries from ``T``, missing ones from the ring reconstruction."""
    T, W = _check_problem(cores, T, W)
    return np.where(W != 0, T, reconstruct_full(cores))
