from typing import Iterable, Optional, Sequence, Union

import itertools
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..tools.exceptions import (
    AmbiguousClassError,
    CacheFormatError,
    CorruptGroupError,
    IndexOutOfRangeError,
    InvalidParametersError,
    TooLargeError,
)
from .schottky import (
    SchottkyGroup,
    SurfaceSpec,
    build_generic,
    build_three_funnel,
    format_surface_spec,
    parse_surface_spec,
    trace_lengths,
)

"""
Module Overview:

Cyclically reduced words, their length classes and the length caches built from them.

A word of length n over r generators is a sequence of letters in 1..2r (letter j + r
stands for the inverse of generator j) with no letter followed by its inverse, also
cyclically. The set of such words is grouped into length classes: words whose group
elements have the same geodesic length for every choice of generators. Classes depend
only on (r, n) and are found numerically by correlating the lengths of several random
groups.

Key Classes:

- `ClassTableConfig`: Draw count, matching tolerance, seed and resource cap.
- `LengthClassTable`: Representatives and multiplicities of the length classes of one n.
- `LengthCacheEntry`: Sorted (length, multiplicity) pairs of one n for a concrete group.
- `LengthCache`: Entries 1..N_max for one surface, with a versioned text format.

Usage Guide:

1. Enumerate words with `enumerate_words(r, n)`.
2. Build class tables with `build_class_table(r, n)` (group independent, reusable).
3. Evaluate them on a group with `evaluate_lengths(group, table)`, or build a full
   cache with `build_length_cache(group, n_max)`.
4. Persist caches with `LengthCache.save` and `LengthCache.load`.
"""

log = logging.getLogger(__name__)

Word = tuple[int, ...]

CACHE_VERSION: int = 1


@dataclass
class ClassTableConfig:
    """
    Settings for the numerical length-class correlation.

    Args:
        trials (int): Number of random generator draws. Defaults to 3.
        tol (float): Relative length matching tolerance. Defaults to 1e-9.
        seed (int): Seed of the draws. Defaults to 20130519.
        length_range (tuple[float, float]): Range of the drawn generator lengths. Defaults to
            (1, 2); longer generators push the differences between classes below `tol`
            from n = 6 on.
        cap (int): Largest allowed (2r - 1)^n. Defaults to 10**8.
    """

    trials: int = 3
    tol: float = 1e-9
    seed: int = 20130519
    length_range: tuple[float, float] = (1.0, 2.0)
    cap: int = 10**8


DEFAULT_CLASS_TABLE_CONFIG = ClassTableConfig()


def inverse_letter(letter: int, r: int) -> int:
    return (letter - 1 + r) % (2 * r) + 1


def inverse_word(word: Sequence[int], r: int) -> Word:
    return tuple(inverse_letter(letter, r) for letter in reversed(word))


def reverse_word(word: Sequence[int]) -> Word:
    return tuple(reversed(word))


def rotations(word: Sequence[int]) -> list[Word]:
    word = tuple(word)
    return [word[k:] + word[:k] for k in range(len(word))]


def is_reduced(word: Sequence[int], r: int) -> bool:
    return all(b != inverse_letter(a, r) for a, b in zip(word, word[1:]))


def is_cyclically_reduced(word: Sequence[int], r: int) -> bool:
    if len(word) == 0 or not all(1 <= letter <= 2 * r for letter in word):
        return False
    return is_reduced(word, r) and word[0] != inverse_letter(word[-1], r)


def free_reduce(word: Sequence[int], r: int) -> Word:
    stack: list[int] = []
    for letter in word:
        if stack and stack[-1] == inverse_letter(letter, r):
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


def cyclic_reduce(word: Sequence[int], r: int) -> Word:
    reduced = list(free_reduce(word, r))
    while len(reduced) > 1 and reduced[0] == inverse_letter(reduced[-1], r):
        reduced = reduced[1:-1]
    return tuple(reduced)


def word_count(r: int, n: int) -> int:
    """
    Number of cyclically reduced words of length n in the free group of rank r.

    Example:
        >>> [word_count(2, n) for n in (1, 2, 3, 4, 9)]
        [4, 12, 28, 84, 19684]
    """
    if r < 1 or n < 1:
        raise InvalidParametersError(
            f"word_count needs r >= 1 and n >= 1, got r={r}, n={n}"
        )
    return (2 * r - 1) ** n + 1 + (r - 1) * (1 + (-1) ** n)


def enumerate_words(
    r: int, n: int, cap: int = DEFAULT_CLASS_TABLE_CONFIG.cap
) -> np.ndarray:
    """
    All cyclically reduced words of length n, in lexicographic order.

    The words are grown one letter at a time as an integer array; each prefix is
    repeated 2r times and the inverse of its last letter is masked out, which keeps
    the rows sorted.

    Args:
        r (int): Generator count, at least 2
        n (int): Word length, at least 1
        cap (int): Largest allowed (2r - 1)^n

    Returns:
        np.ndarray: (#W_n, n) array of 1-based letters.

    Raises:
        InvalidParametersError: If r < 2 or n < 1.
        TooLargeError: If (2r - 1)^n exceeds `cap`.
    """
    if r < 2 or n < 1:
        raise InvalidParametersError(
            f"enumerate_words needs r >= 2 and n >= 1, got r={r}, n={n}"
        )
    if (2 * r - 1) ** n > cap:
        raise TooLargeError(
            f"(2r-1)^n = {(2 * r - 1) ** n} exceeds the cap {cap}", r=r, n=n
        )

    letters = np.arange(1, 2 * r + 1, dtype=np.int16)
    words = letters[:, None]
    for _ in range(1, n):
        prefixes = np.repeat(words, 2 * r, axis=0)
        candidates = np.tile(letters, len(words))
        last = prefixes[:, -1]
        allowed = candidates != (last - 1 + r) % (2 * r) + 1
        words = np.column_stack([prefixes[allowed], candidates[allowed]])

    cyclic = words[:, 0] != (words[:, -1] - 1 + r) % (2 * r) + 1
    return np.ascontiguousarray(words[cyclic])


def word_traces(stack: np.ndarray, words: np.ndarray) -> np.ndarray:
    """
    Traces of T_w = S_{w_1} ... S_{w_n} for every row w.

    Args:
        stack (np.ndarray): (2r, 2, 2) generator array, row j - 1 holding S_j
        words (np.ndarray): (W, n) array of 1-based letters

    Returns:
        np.ndarray: (W,) traces.
    """
    words = np.asarray(words)
    products = stack[words[:, 0] - 1]
    for column in range(1, words.shape[1]):
        products = np.matmul(products, stack[words[:, column] - 1])
    return products[:, 0, 0] + products[:, 1, 1]


def word_lengths(g: SchottkyGroup, words: np.ndarray) -> np.ndarray:
    """
    Geodesic lengths of the group elements of every row of `words`.

    Raises:
        CorruptGroupError: If some word gives a non-hyperbolic element.
    """
    traces = word_traces(g.stack(), words)
    if np.any(np.abs(traces) <= 2.0) or not np.all(np.isfinite(traces)):
        bad = int(np.argmax((np.abs(traces) <= 2.0) | ~np.isfinite(traces)))
        raise CorruptGroupError(
            f"{g!r}: word {tuple(int(x) for x in words[bad])} has trace {traces[bad]!r}",
            word=tuple(int(x) for x in words[bad]),
        )
    return trace_lengths(traces)


def _reversed_block_images(word: Word, r: int) -> set[Word]:
    """
    Images of w(U, V) -> w(U^{-1}, V^{-1})^{-1} over every way of cutting `word` into
    consecutive blocks drawn from {U, U^{-1}, V, V^{-1}}. The image is the block
    sequence in reverse order with each block left intact.
    """
    n = len(word)
    images: set[Word] = set()

    def parse(pos: int, u: Word, v: Optional[Word], blocks: list[Word]) -> None:
        if pos == n:
            images.add(tuple(letter for block in reversed(blocks) for letter in block))
            return

        candidates = {u, inverse_word(u, r)}
        if v is not None:
            candidates |= {v, inverse_word(v, r)}
        for block in candidates:
            if word[pos : pos + len(block)] == block:
                parse(pos + len(block), u, v, blocks + [block])

        if v is None:
            for q in range(1, n - pos + 1):
                block = word[pos : pos + q]
                if block not in candidates:
                    parse(pos + q, u, block, blocks + [block])

    for p in range(1, n + 1):
        parse(p, word[:p], None, [word[:p]])
    return images


def symmetry_orbit(w: Sequence[int], r: int = 2) -> set[Word]:
    """
    Closure of {w} under the length-preserving operations: cyclic permutation,
    inversion, reversal and w(U, V) -> w(U^{-1}, V^{-1})^{-1} for factorizations of
    w into two block words U, V. All members are cyclically reduced words of len(w).

    Args:
        w (Sequence[int]): Cyclically reduced word
        r (int): Generator count. Defaults to 2.

    Returns:
        set[Word]: The orbit.

    Example:
        >>> sorted(symmetry_orbit((1, 2)))
        [(1, 2), (2, 1), (3, 4), (4, 3)]
    """
    start = tuple(int(letter) for letter in w)
    if not is_cyclically_reduced(start, r):
        raise InvalidParametersError(f"{start} is not cyclically reduced for r={r}")

    n = len(start)
    orbit = {start}
    frontier = [start]
    while frontier:
        word = frontier.pop()
        images = set(rotations(word))
        images.add(inverse_word(word, r))
        images.add(reverse_word(word))
        images |= _reversed_block_images(word, r)

        for image in images:
            image = cyclic_reduce(image, r)
            if len(image) == n and image not in orbit:
                orbit.add(image)
                frontier.append(image)
    return orbit


@dataclass(frozen=True)
class LengthClassTable:
    """
    Length classes of the cyclically reduced words of one length.

    Args:
        r (int): Generator count
        n (int): Word length
        representatives (np.ndarray): (K, n) lexicographically minimal class members,
            in lexicographic order
        multiplicities (np.ndarray): (K,) class sizes
        seed (int): Seed of the generator draws the table was correlated on
        labels (np.ndarray, optional): Class index of every word of `enumerate_words(r, n)`,
            only present for freshly built tables
    """

    r: int
    n: int
    representatives: np.ndarray
    multiplicities: np.ndarray
    seed: int = DEFAULT_CLASS_TABLE_CONFIG.seed
    labels: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if len(self.representatives) != len(self.multiplicities):
            raise CacheFormatError(
                "Class table has mismatched representatives and multiplicities"
            )
        if np.any(self.multiplicities <= 0):
            raise CacheFormatError("Class multiplicities must be positive")

    def __repr__(self) -> str:
        return f"LengthClassTable[r={self.r}, n={self.n}, classes={len(self)}]"

    def __len__(self) -> int:
        return len(self.multiplicities)

    @property
    def classes(self) -> list[tuple[Word, int]]:
        return [
            (tuple(int(x) for x in row), int(m))
            for row, m in zip(self.representatives, self.multiplicities)
        ]

    @property
    def total(self) -> int:
        return int(self.multiplicities.sum())


def _random_group(
    r: int, rng: np.random.Generator, length_range: tuple[float, float]
) -> SchottkyGroup:
    lengths = rng.uniform(*length_range, size=3 if r == 2 else r)
    if r == 2:
        return build_three_funnel(*lengths)

    # fixed points at most 0.75 apart keep the isometric circles of lengths >= 1 within
    # 1.6 of 4j, so the pairs for different j stay disjoint
    offsets = rng.uniform(0.0, 0.25, size=(r, 2))
    fixed_points = [
        (4.0 * j + offsets[j, 0], 4.0 * j + 0.5 + offsets[j, 1]) for j in range(r)
    ]
    return build_generic(lengths, fixed_points)


def _cluster_labels(lengths: np.ndarray, tol: float) -> np.ndarray:
    order = np.argsort(lengths, kind="stable")
    ordered = lengths[order]
    breaks = np.diff(ordered) > tol * np.abs(ordered[1:])
    labels = np.empty(len(lengths), dtype=np.int64)
    labels[order] = np.concatenate([[0], np.cumsum(breaks)])
    return labels


def _partition_size(columns: np.ndarray) -> int:
    return len(np.unique(columns, axis=0))


def build_class_table(
    r: int,
    n: int,
    trials: Optional[int] = None,
    tol: Optional[float] = None,
    config: ClassTableConfig = DEFAULT_CLASS_TABLE_CONFIG,
) -> LengthClassTable:
    """
    Partitions the cyclically reduced words of length n into length classes.

    Every word length is computed for `trials` random admissible groups. Each draw
    partitions the words by agreeing lengths (relative `tol`), and the classes are the
    common refinement of all draws. A draw may join two classes by an accidental
    near-coincidence of lengths; that is tolerated as long as every subset of
    min(2, trials - 1) draws already yields the full partition. Anything else is
    reported as ambiguous.

    Args:
        r (int): Generator count
        n (int): Word length
        trials (int, optional): Number of draws, overrides `config.trials`
        tol (float, optional): Relative matching tolerance, overrides `config.tol`
        config (ClassTableConfig): Remaining settings

    Returns:
        LengthClassTable: Classes ordered by their lexicographically minimal member.

    Raises:
        InvalidParametersError: If trials < 2.
        TooLargeError: If the word set exceeds the cap.
        AmbiguousClassError: If the draws disagree on the partition.
    """
    trials = config.trials if trials is None else trials
    tol = config.tol if tol is None else tol
    if trials < 2:
        raise InvalidParametersError(
            f"build_class_table needs at least 2 trials, got {trials}"
        )

    words = enumerate_words(r, n, cap=config.cap)
    rng = np.random.default_rng(config.seed)

    draws = np.empty((len(words), trials), dtype=np.int64)
    for trial in range(trials):
        group = _random_group(r, rng, config.length_range)
        draws[:, trial] = _cluster_labels(word_lengths(group, words), tol)

    combined = _partition_size(draws)
    subset_size = min(2, trials - 1)
    for subset in itertools.combinations(range(trials), subset_size):
        size = _partition_size(draws[:, list(subset)])
        if size != combined:
            raise AmbiguousClassError(
                f"Draws {subset} give {size} classes at n={n} against {combined} for all "
                f"{trials} draws; lower tol (now {tol:g}) or raise the number of trials",
                n=n,
                draws=subset,
            )
    for trial in range(trials):
        size = _partition_size(draws[:, [trial]])
        if size != combined:
            log.debug(
                f"[WORDS] n={n}: draw {trial} merges {combined - size} class(es), outvoted"
            )

    _, first, inverse = np.unique(draws, axis=0, return_index=True, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)

    # relabel classes in order of first appearance in the lexicographic enumeration
    order = np.argsort(first, kind="stable")
    relabel = np.empty_like(order)
    relabel[order] = np.arange(len(order))
    labels = relabel[inverse]

    table = LengthClassTable(
        r=r,
        n=n,
        representatives=words[np.sort(first)],
        multiplicities=np.bincount(labels, minlength=len(order)).astype(np.int64),
        seed=config.seed,
        labels=labels,
    )
    log.info(f"[WORDS] r={r} n={n}: {len(words)} words in {len(table)} length classes")
    return table


@dataclass(frozen=True)
class LengthCacheEntry:
    """
    Length multiset of the words of length n for one group, as sorted
    (length, multiplicity) pairs.
    """

    n: int
    lengths: np.ndarray
    multiplicities: np.ndarray

    def __repr__(self) -> str:
        return f"LengthCacheEntry[n={self.n}, classes={len(self.lengths)}]"

    @property
    def total(self) -> int:
        return int(self.multiplicities.sum())

    @property
    def weights(self) -> np.ndarray:
        """
        m / (1 - e^{-l}), the s-independent factor of every trace term.
        """
        return self.multiplicities / -np.expm1(-self.lengths)


def evaluate_lengths(g: SchottkyGroup, table: LengthClassTable) -> LengthCacheEntry:
    """
    Lengths of the class representatives of `table` for the group `g`.

    Args:
        g (SchottkyGroup): The group
        table (LengthClassTable): Class table with table.r == g.r

    Returns:
        LengthCacheEntry: Pairs sorted by ascending length.

    Raises:
        InvalidParametersError: If the generator counts differ.
        CorruptGroupError: If a representative is not hyperbolic.
    """
    if table.r != g.r:
        raise InvalidParametersError(f"Class table has r={table.r}, group has r={g.r}")

    lengths = word_lengths(g, table.representatives)
    order = np.argsort(lengths, kind="stable")
    return LengthCacheEntry(
        n=table.n,
        lengths=lengths[order],
        multiplicities=np.asarray(table.multiplicities)[order].astype(np.int64),
    )


@dataclass(frozen=True)
class LengthCache:
    """
    Length multisets of the words of length 1..N_max for one surface.

    Args:
        spec (SurfaceSpec): Surface the lengths belong to
        r (int): Generator count
        seed (int): Seed of the class tables the cache was built from
        entries (dict[int, LengthCacheEntry]): Entry per word length
    """

    spec: SurfaceSpec
    r: int
    seed: int
    entries: dict[int, LengthCacheEntry]

    def __repr__(self) -> str:
        return f"LengthCache[{format_surface_spec(self.spec)}, nmax={self.n_max}]"

    @property
    def n_max(self) -> int:
        return max(self.entries) if self.entries else 0

    @property
    def min_length(self) -> float:
        return float(self.entries[1].lengths[0])

    def entry(self, n: int) -> LengthCacheEntry:
        if n not in self.entries:
            raise IndexOutOfRangeError(f"{self!r} has no entry for n={n}")
        return self.entries[n]

    def to_text(self) -> str:
        lines = [
            f"version {CACHE_VERSION}",
            f"surface {format_surface_spec(self.spec)}",
            f"r {self.r}",
            f"nmax {self.n_max}",
            f"seed {self.seed}",
        ]
        for n in sorted(self.entries):
            entry = self.entries[n]
            lines.append(f"n {n} classes {len(entry.lengths)}")
            lines.extend(
                f"{length:.17g} {int(m)}"
                for length, m in zip(
                    entry.lengths.tolist(), entry.multiplicities.tolist()
                )
            )
        return "\n".join(lines) + "\n"

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_text())
        log.info(f"[WORDS] Wrote {self!r} to {path}")

    @classmethod
    def from_text(cls, text: str) -> "LengthCache":
        header, lines = _read_header(
            text.splitlines(), ["version", "surface", "r", "nmax", "seed"]
        )
        _check_version(header)
        spec = parse_surface_spec(header["surface"])
        entries: dict[int, LengthCacheEntry] = {}
        for n, rows in _read_blocks(lines):
            try:
                values = [row.split() for row in rows]
                lengths = np.array([float(value[0]) for value in values])
                multiplicities = np.array(
                    [int(value[1]) for value in values], dtype=np.int64
                )
            except (ValueError, IndexError):
                raise CacheFormatError(
                    f"Malformed length line in block n={n}"
                ) from None
            entries[n] = LengthCacheEntry(n, lengths, multiplicities)

        cache = cls(
            spec=spec, r=int(header["r"]), seed=int(header["seed"]), entries=entries
        )
        if cache.n_max != int(header["nmax"]):
            raise CacheFormatError(
                f"Header says nmax {header['nmax']}, file has {cache.n_max}"
            )
        return cache

    @classmethod
    def load(cls, path: Union[str, Path]) -> "LengthCache":
        try:
            text = Path(path).read_text()
        except OSError as error:
            raise CacheFormatError(
                f"Cannot read length cache {path}: {error}"
            ) from None
        return cls.from_text(text)


def _read_header(lines: list[str], keys: list[str]) -> tuple[dict[str, str], list[str]]:
    header: dict[str, str] = {}
    for position, key in enumerate(keys):
        if position >= len(lines):
            raise CacheFormatError(f"Missing header line '{key}'")
        name, _, value = lines[position].partition(" ")
        if name != key or not value:
            raise CacheFormatError(f"Expected header '{key}', got '{lines[position]}'")
        header[key] = value.strip()
    return header, lines[len(keys) :]


def _check_version(header: dict[str, str]) -> None:
    if header["version"] != str(CACHE_VERSION):
        raise CacheFormatError(f"Unsupported file version {header['version']}")


def _read_blocks(lines: list[str]) -> Iterable[tuple[int, list[str]]]:
    position = 0
    lines = [line for line in lines if line.strip()]
    while position < len(lines):
        fields = lines[position].split()
        if len(fields) != 4 or fields[0] != "n" or fields[2] != "classes":
            raise CacheFormatError(
                f"Expected 'n <n> classes <k>', got '{lines[position]}'"
            )
        n, k = int(fields[1]), int(fields[3])
        rows = lines[position + 1 : position + 1 + k]
        if len(rows) != k:
            raise CacheFormatError(
                f"Block n={n} announces {k} classes, has {len(rows)}"
            )
        yield n, rows
        position += 1 + k


def save_class_tables(
    tables: Sequence[LengthClassTable], path: Union[str, Path]
) -> None:
    """
    Writes class tables in the versioned text format: a header with r, nmax and seed,
    then per n the representatives as space separated letters followed by the
    multiplicity.
    """
    if not tables:
        raise InvalidParametersError("No class tables to write")
    ordered = sorted(tables, key=lambda table: table.n)
    lines = [
        f"version {CACHE_VERSION}",
        f"r {ordered[0].r}",
        f"nmax {ordered[-1].n}",
        f"seed {ordered[0].seed}",
    ]
    for table in ordered:
        lines.append(f"n {table.n} classes {len(table)}")
        lines.extend(
            " ".join(str(int(x)) for x in row) + f" {int(m)}"
            for row, m in zip(table.representatives, table.multiplicities)
        )
    Path(path).write_text("\n".join(lines) + "\n")


def load_class_tables(path: Union[str, Path]) -> dict[int, LengthClassTable]:
    try:
        text = Path(path).read_text()
    except OSError as error:
        raise CacheFormatError(f"Cannot read class tables {path}: {error}") from None

    header, lines = _read_header(text.splitlines(), ["version", "r", "nmax", "seed"])
    _check_version(header)
    r, seed = int(header["r"]), int(header["seed"])
    tables: dict[int, LengthClassTable] = {}
    for n, rows in _read_blocks(lines):
        try:
            values = np.array(
                [[int(x) for x in row.split()] for row in rows], dtype=np.int64
            )
        except ValueError:
            raise CacheFormatError(f"Malformed class line in block n={n}") from None
        if values.ndim != 2 or values.shape[1] != n + 1:
            raise CacheFormatError(
                f"Class lines of block n={n} need {n} letters and a multiplicity"
            )
        tables[n] = LengthClassTable(
            r=r,
            n=n,
            representatives=values[:, :n].astype(np.int16),
            multiplicities=values[:, n],
            seed=seed,
        )
    return tables


def build_length_cache(
    g: SchottkyGroup,
    n_max: int,
    config: ClassTableConfig = DEFAULT_CLASS_TABLE_CONFIG,
    tables: Optional[dict[int, LengthClassTable]] = None,
) -> LengthCache:
    """
    Length cache of `g` for word lengths 1..n_max.

    Args:
        g (SchottkyGroup): The group
        n_max (int): Largest word length
        config (ClassTableConfig): Settings for building missing class tables
        tables (dict[int, LengthClassTable], optional): Prebuilt class tables by n

    Returns:
        LengthCache: The cache.
    """
    if n_max < 1:
        raise InvalidParametersError(f"n_max must be at least 1, got {n_max}")

    tables = dict(tables or {})
    entries: dict[int, LengthCacheEntry] = {}
    for n in range(1, n_max + 1):
        if n not in tables:
            tables[n] = build_class_table(g.r, n, config=config)
        entries[n] = evaluate_lengths(g, tables[n])
        log.debug(f"[WORDS] {g!r} n={n}: {len(entries[n].lengths)} lengths")

    return LengthCache(spec=g.spec, r=g.r, seed=config.seed, entries=entries)


def _word_codes(words: np.ndarray, base: int) -> np.ndarray:
    powers = base ** np.arange(words.shape[1] - 1, -1, -1, dtype=np.int64)
    return (words.astype(np.int64) - 1) @ powers


def primitive_class_representatives(r: int, n_max: int) -> dict[int, np.ndarray]:
    """
    One word per primitive cyclic class (its lexicographically minimal rotation), for
    every n in 1..n_max. A word and its inverse lie in different cyclic classes.

    Returns:
        dict[int, np.ndarray]: (K_n, n) letter arrays by word length.
    """
    representatives: dict[int, np.ndarray] = {}
    for n in range(1, n_max + 1):
        words, primitive, own, minimal = _cyclic_structure(r, n)
        representatives[n] = words[primitive & (own == minimal)]
    return representatives


def _cyclic_structure(r: int, n: int) -> tuple[
    np.ndarray, np.ndarray, np.ndarray, np.ndarray
]:
    if n * math.log2(2 * r) > 62:
        raise TooLargeError(
            f"Cyclic class codes of length {n} over {2 * r} letters overflow"
        )

    words = enumerate_words(r, n)
    own = _word_codes(words, 2 * r)
    minimal = own.copy()
    primitive = np.ones(len(words), dtype=bool)
    for shift in range(1, n):
        rotated = np.roll(words, -shift, axis=1)
        minimal = np.minimum(minimal, _word_codes(rotated, 2 * r))
        if n % shift == 0:
            primitive &= ~np.all(rotated == words, axis=1)
    return words, primitive, own, minimal


def primitive_classes(r: int, n_max: int) -> list[tuple[Word, bool, int]]:
    """
    Every cyclically reduced word of length 1..n_max with its primitivity flag and the
    id of its cyclic class. Ids are assigned in order of (word length, minimal rotation).

    Args:
        r (int): Generator count
        n_max (int): Largest word length

    Returns:
        list[tuple[Word, bool, int]]: (word, primitive, class id) in enumeration order.

    Example:
        >>> [(w, p) for w, p, _ in primitive_classes(2, 2) if w[0] == 1]
        [((1,), True), ((1, 1), False), ((1, 2), True), ((1, 4), True)]
    """
    result: list[tuple[Word, bool, int]] = []
    offset = 0
    for n in range(1, n_max + 1):
        words, primitive, _, minimal = _cyclic_structure(r, n)
        codes = np.unique(minimal)
        ids = offset + np.searchsorted(codes, minimal)
        offset += len(codes)
        result.extend(
            (tuple(int(x) for x in row), bool(flag), int(class_id))
            for row, flag, class_id in zip(words, primitive, ids)
        )
    return result
