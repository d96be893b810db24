from typing import Optional, Union

import logging
from dataclasses import dataclass

import numpy as np

from ..geometry.schottky import SchottkyGroup
from ..geometry.words import (
    LengthCache,
    LengthCacheEntry,
    primitive_class_representatives,
    word_lengths,
)
from ..tools.exceptions import IndexOutOfRangeError, OutsideConvergenceError
from ..tools.utilities import chunked, compensated_sum

"""
Module Overview:

Evaluation of the Selberg zeta function of a Schottky surface through the cluster
expansion of the transfer operator determinant,

    Z_N(s) = 1 + d_1(s) + ... + d_N(s),

where the d_n are built from the traces a_n(s) of the n-th operator powers. The traces
only need the length multisets stored in a `LengthCache`.

Key Classes:

- `ZetaConfig`: Truncation policy and evaluation floor.
- `ZetaEvaluation`: Value, derivative, truncation order and error indicator at one point.
- `ZetaBatch`: The same for an array of points.

Usage Guide:

1. Load or build a `LengthCache`.
2. Evaluate with `zeta_eval(cache, s)` for one point or `zeta_values(cache, points)` for
   many; pass `with_deriv=True` for Z'.
3. Cross-check against `euler_product_eval(group, s)` for Re s > 1.
"""

log = logging.getLogger(__name__)

Points = Union[complex, np.ndarray]


@dataclass
class ZetaConfig:
    """
    Truncation policy of the determinant expansion.

    Args:
        truncation (int, optional): Fixed order N. None selects N adaptively per point.
        n_start (int): First adaptive order. Defaults to 6.
        n_step (int): Adaptive order increment. Defaults to 2.
        tol (float): Adaptive target for the error indicator |d_N / Z_N|. Defaults to 1e-9.
        floor (float): Lowest Re s accepted by callers that guard the reliable region.
        block_terms (int): Largest number of exponentials evaluated in one block.
    """

    truncation: Optional[int] = None
    n_start: int = 6
    n_step: int = 2
    tol: float = 1e-9
    floor: float = -0.5
    block_terms: int = 2**20


DEFAULT_ZETA_CONFIG = ZetaConfig()


@dataclass(frozen=True)
class ZetaEvaluation:
    """
    Truncated zeta value at one point.

    Args:
        s (complex): Evaluation point
        value (complex): Z_N(s)
        derivative (complex, optional): Z_N'(s), when requested
        N (int): Truncation order used
        rel_err (float): |d_N(s) / Z_N(s)|
        capped (bool): Adaptive order reached the cache limit without meeting the tolerance
        overflow (bool): The value or indicator is not finite
    """

    s: complex
    value: complex
    derivative: Optional[complex]
    N: int
    rel_err: float
    capped: bool = False
    overflow: bool = False

    def __repr__(self) -> str:
        return f"ZetaEvaluation[s={self.s}, N={self.N}]"


@dataclass(frozen=True)
class ZetaBatch:
    s: np.ndarray
    values: np.ndarray
    derivatives: Optional[np.ndarray]
    N: np.ndarray
    rel_err: np.ndarray
    capped: np.ndarray
    overflow: np.ndarray

    def __repr__(self) -> str:
        return f"ZetaBatch[{self.s.size} points]"

    def __len__(self) -> int:
        return self.s.size

    def __getitem__(self, index: int) -> ZetaEvaluation:
        return ZetaEvaluation(
            s=complex(self.s.flat[index]),
            value=complex(self.values.flat[index]),
            derivative=None if self.derivatives is None else complex(
                self.derivatives.flat[index]
            ),
            N=int(self.N.flat[index]),
            rel_err=float(self.rel_err.flat[index]),
            capped=bool(self.capped.flat[index]),
            overflow=bool(self.overflow.flat[index]),
        )


def _as_points(s: Points) -> np.ndarray:
    return np.atleast_1d(np.asarray(s, dtype=complex)).reshape(-1)


def _like(s: Points, values: np.ndarray):
    if np.ndim(s) == 0:
        return complex(values[0])
    return values.reshape(np.shape(s))


def _trace_sums(
    entry: LengthCacheEntry,
    points: np.ndarray,
    with_deriv: bool,
    block_terms: int = DEFAULT_ZETA_CONFIG.block_terms,
) -> tuple[np.ndarray, Optional[np.ndarray]]:
    # sum_l w e^{-s l} and sum_l w l e^{-s l}, ascending-length order, compensated
    weights, lengths = entry.weights, entry.lengths
    rows = max(1, block_terms // max(1, len(lengths)))

    sums, dsums = [], []
    for block in chunked(points, rows):
        with np.errstate(over="ignore", invalid="ignore"):
            terms = weights * np.exp(-np.outer(block, lengths))
            sums.append(compensated_sum(terms))
            if with_deriv:
                dsums.append(compensated_sum(terms * lengths))

    if len(points) == 0:
        empty = np.zeros(0, dtype=complex)
        return empty, (empty if with_deriv else None)
    return np.concatenate(sums), (np.concatenate(dsums) if with_deriv else None)


def a_coeff(cache: LengthCache, n: int, s: Points) -> Points:
    """
    Trace of the n-th power of the transfer operator,

        a_n(s) = -(1/n) sum over words of length n of e^{-s l} / (1 - e^{-l}),

    summed over the (length, multiplicity) pairs of the cache.

    Args:
        cache (LengthCache): Length cache with an entry for n
        n (int): Power
        s (complex or np.ndarray): Evaluation point(s)

    Returns:
        complex or np.ndarray: a_n(s), shaped like `s`.
    """
    sums, _ = _trace_sums(cache.entry(n), _as_points(s), with_deriv=False)
    return _like(s, -sums / n)


def a_coeff_deriv(cache: LengthCache, n: int, s: Points) -> Points:
    """
    Derivative a_n'(s) = (1/n) sum of l e^{-s l} / (1 - e^{-l}).
    """
    _, dsums = _trace_sums(cache.entry(n), _as_points(s), with_deriv=True)
    return _like(s, dsums / n)


def _cluster_coefficients(
    a: list[np.ndarray], da: Optional[list[np.ndarray]]
) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """
    d_1..d_N from a_1..a_N through b_{n,1} = a_n and
    b_{n,k} = (1/k) sum_{m=1}^{n-k+1} b_{n-m,k-1} a_m, plus the product-rule derivatives.
    """
    N = len(a)
    b: dict[tuple[int, int], np.ndarray] = {}
    db: dict[tuple[int, int], np.ndarray] = {}
    d = np.zeros((N,) + a[0].shape, dtype=complex)
    dd = np.zeros_like(d) if da is not None else None

    for n in range(1, N + 1):
        b[n, 1] = a[n - 1]
        if da is not None:
            db[n, 1] = da[n - 1]
        for k in range(2, n + 1):
            total = np.zeros_like(a[0])
            dtotal = np.zeros_like(a[0])
            for m in range(1, n - k + 2):
                total = total + b[n - m, k - 1] * a[m - 1]
                if da is not None:
                    term = db[n - m, k - 1] * a[m - 1] + b[n - m, k - 1] * da[m - 1]
                    dtotal = dtotal + term
            b[n, k] = total / k
            if da is not None:
                db[n, k] = dtotal / k

        for k in range(1, n + 1):
            d[n - 1] += b[n, k]
            if dd is not None:
                dd[n - 1] += db[n, k]
    return d, dd


def d_coeffs(
    cache: LengthCache, N: int, s: Points, with_deriv: bool = False
) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """
    Cluster coefficients d_1(s)..d_N(s) and optionally their derivatives.

    Args:
        cache (LengthCache): Cache with entries 1..N
        N (int): Truncation order
        s (complex or np.ndarray): Evaluation point(s)
        with_deriv (bool): Also return d_n'(s). Defaults to False.

    Returns:
        tuple: (d, d') arrays of shape (N,) + shape of `s`; d' is None unless requested.

    Raises:
        IndexOutOfRangeError: If N exceeds the cache.
    """
    if N > cache.n_max or N < 1:
        raise IndexOutOfRangeError(f"Truncation {N} outside 1..{cache.n_max}")

    points = _as_points(s)
    a, da = [], []
    for n in range(1, N + 1):
        sums, dsums = _trace_sums(cache.entry(n), points, with_deriv)
        a.append(-sums / n)
        if with_deriv:
            da.append(dsums / n)
    d, dd = _cluster_coefficients(a, da if with_deriv else None)

    shape = (N,) + np.shape(s)
    return d.reshape(shape), (dd.reshape(shape) if dd is not None else None)


def _orders(config: ZetaConfig, n_max: int) -> list[int]:
    if config.n_start >= n_max:
        return [n_max]
    return list(range(config.n_start, n_max, config.n_step)) + [n_max]


def zeta_values(
    cache: LengthCache,
    s: Points,
    N: Optional[int] = None,
    with_deriv: bool = False,
    config: ZetaConfig = DEFAULT_ZETA_CONFIG,
) -> ZetaBatch:
    """
    Truncated zeta values at an array of points.

    With a fixed order every point uses Z_N. In adaptive mode the order of every point
    is the first of n_start, n_start + n_step, ... (capped at the cache limit) with
    |d_N / Z_N| below the tolerance; the choice depends on the point alone, never on
    the rest of the batch.

    Args:
        cache (LengthCache): Length cache
        s (complex or np.ndarray): Evaluation points
        N (int, optional): Fixed truncation order, overrides `config.truncation`
        with_deriv (bool): Also compute Z'. Defaults to False.
        config (ZetaConfig): Truncation policy

    Returns:
        ZetaBatch: Flat arrays over the points.

    Raises:
        IndexOutOfRangeError: If the fixed order exceeds the cache.
    """
    points = _as_points(s)
    fixed = N if N is not None else config.truncation
    if fixed is not None and not 1 <= fixed <= cache.n_max:
        raise IndexOutOfRangeError(f"Truncation {fixed} outside 1..{cache.n_max}")
    orders = [fixed] if fixed is not None else _orders(config, cache.n_max)

    a: list[np.ndarray] = []
    da: list[np.ndarray] = []
    chosen = np.zeros(len(points), dtype=np.int64)
    pending = np.ones(len(points), dtype=bool)

    for order in orders:
        for n in range(len(a) + 1, order + 1):
            sums, dsums = _trace_sums(
                cache.entry(n), points, with_deriv, config.block_terms
            )
            a.append(-sums / n)
            if with_deriv:
                da.append(dsums / n)

        d, _ = _cluster_coefficients(a, None)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            rel = np.abs(d[order - 1] / (1.0 + d.sum(axis=0)))
        done = pending & (rel < config.tol)
        chosen[done] = order
        pending &= ~done
        if not pending.any():
            break

    chosen[pending] = orders[-1]
    top = int(chosen.max()) if len(points) else orders[0]
    d, dd = _cluster_coefficients(a[:top], da[:top] if with_deriv else None)

    # Z_N per point: partial sums in fixed n order
    partial = 1.0 + np.cumsum(d, axis=0)
    columns = np.arange(len(points))
    values = partial[chosen - 1, columns]
    derivatives = np.cumsum(dd, axis=0)[chosen - 1, columns] if dd is not None else None
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        rel_err = np.abs(d[chosen - 1, columns] / values)

    overflow = ~np.isfinite(values) | ~np.isfinite(rel_err)
    capped = (fixed is None) & pending & ~overflow
    if capped.any():
        log.warning(
            f"[ZETA] {int(capped.sum())} point(s) reached N={orders[-1]} with |d_N/Z_N| >= {config.tol:g}"
        )
    if overflow.any():
        log.debug(f"[ZETA] {int(overflow.sum())} point(s) overflowed")

    return ZetaBatch(
        s=points,
        values=values,
        derivatives=derivatives,
        N=chosen,
        rel_err=rel_err,
        capped=capped,
        overflow=overflow,
    )


def zeta_eval(
    cache: LengthCache,
    s: complex,
    N: Optional[int] = None,
    with_deriv: bool = False,
    config: ZetaConfig = DEFAULT_ZETA_CONFIG,
) -> ZetaEvaluation:
    """
    Truncated zeta value Z_N(s) = 1 + d_1(s) + ... + d_N(s) at one point.

    Args:
        cache (LengthCache): Length cache
        s (complex): Evaluation point
        N (int, optional): Fixed truncation order; adaptive when None
        with_deriv (bool): Also compute Z'(s). Defaults to False.
        config (ZetaConfig): Truncation policy

    Returns:
        ZetaEvaluation: Value, derivative, order and error indicator.
    """
    return zeta_values(cache, complex(s), N=N, with_deriv=with_deriv, config=config)[0]


def log_derivative(
    cache: LengthCache,
    s: Points,
    N: Optional[int] = None,
    config: ZetaConfig = DEFAULT_ZETA_CONFIG,
) -> Points:
    """
    Z'(s) / Z(s) along a set of points.
    """
    batch = zeta_values(cache, s, N=N, with_deriv=True, config=config)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = batch.derivatives / batch.values
    return _like(s, ratio)


def error_profile(cache: LengthCache, points: Points, N: int) -> np.ndarray:
    """
    Error indicator |d_N(s) / Z_N(s)| at a fixed order along a set of points.
    """
    batch = zeta_values(cache, points, N=N)
    return batch.rel_err.reshape(np.shape(points))


def euler_product_eval(
    g: SchottkyGroup, s: complex, n_max: int = 8, k_max: int = 10
) -> complex:
    """
    Product formula of the zeta function,

        Z(s) = prod over primitive classes prod_{k=0}^{k_max} (1 - e^{-(s+k) l}),

    over the primitive cyclic word classes of length at most n_max (a class and its
    inverse are separate factors). Converges absolutely for Re s > 1.

    Args:
        g (SchottkyGroup): The group
        s (complex): Evaluation point with Re s > 1
        n_max (int): Largest word length. Defaults to 8.
        k_max (int): Last factor index. Defaults to 10.

    Returns:
        complex: The truncated product.

    Raises:
        OutsideConvergenceError: If Re s <= 1.
    """
    s = complex(s)
    if s.real <= 1.0:
        raise OutsideConvergenceError(f"Product formula needs Re s > 1, got s = {s}")

    representatives = primitive_class_representatives(g.r, n_max)
    lengths = np.concatenate(
        [word_lengths(g, words) for words in representatives.values() if len(words)]
    )
    lengths.sort()
    shifts = s + np.arange(k_max + 1)
    logs = np.log1p(-np.exp(-np.outer(lengths, shifts)))
    return complex(np.exp(compensated_sum(logs.reshape(-1))))
