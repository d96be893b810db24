from typing import Callable, Iterable, Sequence, TypeVar

from concurrent.futures import ThreadPoolExecutor

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def two_sum(a, b):
    """
    Error free transformation of a sum: a + b = s + t exactly, with s = fl(a + b).

    Works elementwise on numpy arrays, real or complex (the transformation is applied
    to the real and imaginary parts independently).

    Args:
        a: First summand (scalar or array).
        b: Second summand (scalar or array).

    Returns:
        tuple: (s, t) with s the rounded sum and t the rounding error.
    """
    s = a + b
    bp = s - a
    ap = s - bp
    t = (a - ap) + (b - bp)
    return s, t


def compensated_sum(values: np.ndarray, axis: int = -1) -> np.ndarray:
    """
    Cascaded compensated summation along one axis.

    The terms are added pairwise in a fixed tree; every pairwise addition goes through
    `two_sum` and the rounding errors are accumulated in a second tree and added back
    at the end. The result does not depend on how many threads produced the input and
    is bit-reproducible for a given term order.

    Args:
        values (np.ndarray): Terms, real or complex.
        axis (int): Axis to reduce. Defaults to the last axis.

    Returns:
        np.ndarray: The sums, with `axis` removed.

    Example:
        >>> float(compensated_sum(np.array([1e16, 1.0, -1e16])))
        1.0
    """
    terms = np.moveaxis(np.asarray(values), axis, -1)
    if terms.shape[-1] == 0:
        return np.zeros(terms.shape[:-1], dtype=terms.dtype)

    sums = terms
    errors = np.zeros_like(terms)
    while sums.shape[-1] > 1:
        if sums.shape[-1] % 2 == 1:
            pad = [(0, 0)] * (sums.ndim - 1) + [(0, 1)]
            sums = np.pad(sums, pad)
            errors = np.pad(errors, pad)
        s, t = two_sum(sums[..., 0::2], sums[..., 1::2])
        errors = errors[..., 0::2] + errors[..., 1::2] + t
        sums = s

    return sums[..., 0] + errors[..., 0]


def ordered_map(
    function: Callable[[T], R], items: Sequence[T], threads: int = 1
) -> list[R]:
    """
    Applies `function` to every item, optionally on a thread pool, and returns the
    results in input order.

    The order of the returned list never depends on `threads`, so reductions over it
    are deterministic.

    Args:
        function (Callable): Pure function of one item.
        items (Sequence): Work items.
        threads (int): Worker count. 1 runs inline. Defaults to 1.

    Returns:
        list: Results, aligned with `items`.
    """
    if threads <= 1 or len(items) <= 1:
        return [function(item) for item in items]

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(function, items))


def chunked(items: Sequence[T], size: int) -> Iterable[Sequence[T]]:
    """
    Splits a sequence into consecutive chunks of at most `size` items.

    Args:
        items (Sequence): Sequence to split.
        size (int): Chunk size.

    Returns:
        Iterable: Chunks in order.
    """
    for start in range(0, len(items), size):
        yield items[start : start + size]
