import numpy as np
import pytest

from schottkyzeta.geometry.schottky import (
    MoebiusTransform,
    SchottkyGroup,
    SurfaceKind,
    SurfaceSpec,
    build_three_funnel,
    trace_length,
)
from schottkyzeta.geometry.words import (
    ClassTableConfig,
    LengthCache,
    build_class_table,
    cyclic_reduce,
    enumerate_words,
    evaluate_lengths,
    free_reduce,
    inverse_word,
    is_cyclically_reduced,
    load_class_tables,
    primitive_class_representatives,
    primitive_classes,
    save_class_tables,
    symmetry_orbit,
    word_count,
    word_lengths,
)
from schottkyzeta.tools.exceptions import (
    AmbiguousClassError,
    CacheFormatError,
    CorruptGroupError,
    IndexOutOfRangeError,
    InvalidParametersError,
    TooLargeError,
)


def test_word_helpers():
    """
    Tests the reduction helpers\n
    Asserts free and cyclic reduction and the inverse convention j + r.
    """
    assert inverse_word((1, 2), 2) == (4, 3)
    assert free_reduce((1, 2, 4, 3), 2) == ()
    assert free_reduce((1, 2, 4, 1), 2) == (1, 1)
    assert cyclic_reduce((3, 2, 1), 2) == (2,)
    assert is_cyclically_reduced((1, 2), 2)
    assert not is_cyclically_reduced((1, 2, 3), 2)


@pytest.mark.parametrize(
    "r, n", [(2, 1), (2, 2), (2, 3), (2, 6), (3, 1), (3, 2), (3, 4)]
)
def test_enumerate_words_count(r, n):
    """
    Tests enumerate_words against word_count\n
    Asserts the closed-form count, lexicographic order and cyclic reduction.
    """
    words = enumerate_words(r, n)
    assert words.shape == (word_count(r, n), n)
    rows = [tuple(int(x) for x in row) for row in words]
    assert rows == sorted(rows)
    assert len(set(rows)) == len(rows)
    assert all(is_cyclically_reduced(row, r) for row in rows)


def test_enumerate_words_small():
    """
    Tests enumerate_words for r = 2 and n = 1, 2\n
    Asserts the single letters and the four excluded pairs.
    """
    np.testing.assert_array_equal(enumerate_words(2, 1), [[1], [2], [3], [4]])

    pairs = {tuple(int(x) for x in row) for row in enumerate_words(2, 2)}
    every = {(i, j) for i in range(1, 5) for j in range(1, 5)}
    assert every - pairs == {(1, 3), (3, 1), (2, 4), (4, 2)}


def test_enumerate_words_errors():
    """
    Tests the enumerate_words guards\n
    Asserts TooLargeError above the cap and InvalidParametersError for r < 2 or n < 1.
    """
    with pytest.raises(TooLargeError):
        enumerate_words(2, 5, cap=100)
    with pytest.raises(InvalidParametersError):
        enumerate_words(1, 3)
    with pytest.raises(InvalidParametersError):
        enumerate_words(2, 0)


def test_symmetry_orbit():
    """
    Tests symmetry_orbit\n
    Asserts the orbits of single letters and of S_1 S_2.
    """
    assert symmetry_orbit((1,)) == {(1,), (3,)}
    assert symmetry_orbit((1, 2)) == {(1, 2), (2, 1), (3, 4), (4, 3)}
    with pytest.raises(InvalidParametersError):
        symmetry_orbit((1, 3))


def test_symmetry_orbit_inside_length_class(class_tables):
    """
    Tests symmetry_orbit against the numerical length classes\n
    Asserts every orbit lies inside the class of its word for n = 5.
    """
    table = class_tables[5]
    words = enumerate_words(2, 5)
    index = {tuple(int(x) for x in row): i for i, row in enumerate(words)}
    for representative, _ in table.classes:
        label = table.labels[index[representative]]
        orbit = symmetry_orbit(representative)
        assert {int(table.labels[index[word]]) for word in orbit} == {int(label)}


CLASS_COUNTS = [
    (1, 2),
    (2, 4),
    (3, 6),
    (4, 13),
    (5, 22),
    (6, 52),
    (7, 106),
    (8, 266),
    pytest.param(9, 626, marks=pytest.mark.slow),
    pytest.param(10, 1632, marks=pytest.mark.slow),
    pytest.param(11, 4218, marks=pytest.mark.slow),
    pytest.param(12, 11471, marks=pytest.mark.slow),
]


@pytest.mark.parametrize("n, classes", CLASS_COUNTS)
def test_build_class_table(request, class_tables, n, classes):
    """
    Tests build_class_table for n = 1..12\n
    Asserts the number of length classes and that the multiplicities add up to the
    number of words.
    """
    tables = class_tables if n in class_tables else request.getfixturevalue(
        "deep_class_tables"
    )
    table = tables[n]
    assert len(table) == classes
    assert table.total == word_count(2, n)


def test_class_table_n2(class_tables):
    """
    Tests the n = 2 class table\n
    Asserts class sizes {2, 2, 4, 4} with lexicographically minimal representatives.
    """
    table = class_tables[2]
    assert sorted(int(m) for m in table.multiplicities) == [2, 2, 4, 4]
    words = [tuple(int(x) for x in row) for row in enumerate_words(2, 2)]
    for position, (representative, _) in enumerate(table.classes):
        members = [w for w, label in zip(words, table.labels) if label == position]
        assert representative == min(members)
    representatives = [rep for rep, _ in table.classes]
    assert representatives == sorted(representatives)


def test_class_table_totals(class_tables):
    """
    Tests all class tables up to n = 8\n
    Asserts the multiplicities add up to word_count.
    """
    for n, table in class_tables.items():
        assert table.total == word_count(2, n)
        assert table.seed == ClassTableConfig().seed


def test_class_members_share_lengths(class_tables):
    """
    Tests the class partition on an unrelated group\n
    Asserts every word has the length of its class representative for n = 6.
    """
    group = build_three_funnel(10.5, 11.25, 14.75)
    table = class_tables[6]
    words = enumerate_words(2, 6)
    lengths = word_lengths(group, words)
    reference = word_lengths(group, table.representatives)
    np.testing.assert_allclose(lengths, reference[table.labels], rtol=1e-10)


def test_build_class_table_deterministic():
    """
    Tests build_class_table reproducibility\n
    Asserts two builds with the same seed agree.
    """
    first, second = build_class_table(2, 4), build_class_table(2, 4)
    np.testing.assert_array_equal(first.representatives, second.representatives)
    np.testing.assert_array_equal(first.multiplicities, second.multiplicities)


def test_build_class_table_errors(mocker):
    """
    Tests the build_class_table guards\n
    Asserts InvalidParametersError for a single trial and AmbiguousClassError when the
    draws disagree.
    """
    with pytest.raises(InvalidParametersError):
        build_class_table(2, 2, trials=1)

    mocker.patch(
        "schottkyzeta.geometry.words._cluster_labels",
        side_effect=[
            np.array([0, 1, 0, 1]),
            np.array([0, 1, 1, 0]),
            np.array([0, 1, 0, 1]),
        ],
    )
    with pytest.raises(AmbiguousClassError):
        build_class_table(2, 1, trials=3)


def test_class_table_file(class_tables, tmp_path):
    """
    Tests save_class_tables and load_class_tables\n
    Asserts the tables come back unchanged.
    """
    path = tmp_path / "tables.txt"
    save_class_tables([class_tables[n] for n in range(1, 5)], path)
    loaded = load_class_tables(path)
    assert sorted(loaded) == [1, 2, 3, 4]
    for n in range(1, 5):
        np.testing.assert_array_equal(
            loaded[n].representatives, class_tables[n].representatives
        )
        np.testing.assert_array_equal(
            loaded[n].multiplicities, class_tables[n].multiplicities
        )
        assert loaded[n].seed == class_tables[n].seed

    path.write_text(path.read_text().replace("version 1", "version 7"))
    with pytest.raises(CacheFormatError):
        load_class_tables(path)


def test_evaluate_lengths(x121314, class_tables):
    """
    Tests evaluate_lengths on X(12, 13, 14)\n
    Asserts the generator lengths at n = 1 and the lengths 14, 24 and 26 at n = 2.
    """
    first = evaluate_lengths(x121314, class_tables[1])
    np.testing.assert_allclose(first.lengths, [12.0, 13.0], rtol=1e-12)
    np.testing.assert_array_equal(first.multiplicities, [2, 2])

    second = evaluate_lengths(x121314, class_tables[2])
    assert np.all(np.diff(second.lengths) >= 0)
    pairs = {
        (round(float(length), 9), int(m))
        for length, m in zip(second.lengths, second.multiplicities)
    }
    assert (14.0, 4) in pairs
    assert (24.0, 2) in pairs
    assert (26.0, 2) in pairs
    assert second.total == 12


def test_evaluate_lengths_torus(y_torus, class_tables):
    """
    Tests evaluate_lengths on Y(12, 13, pi/2)\n
    Asserts the generator lengths at n = 1.
    """
    entry = evaluate_lengths(y_torus, class_tables[1])
    np.testing.assert_allclose(entry.lengths, [12.0, 13.0], rtol=1e-12)
    np.testing.assert_array_equal(entry.multiplicities, [2, 2])


def test_evaluate_lengths_errors(class_tables):
    """
    Tests evaluate_lengths and word_lengths guards\n
    Asserts a CorruptGroupError for a word with trace 2 and an error on a rank mismatch.
    """
    A = MoebiusTransform(2.0, 0.0, 0.0, 0.5)
    spec = SurfaceSpec(SurfaceKind.Generic, (trace_length(A), trace_length(A)))
    group = SchottkyGroup(r=2, gens=(A, A), spec=spec)
    with pytest.raises(CorruptGroupError):
        evaluate_lengths(group, class_tables[2])

    table = build_class_table(3, 1)
    with pytest.raises(InvalidParametersError):
        evaluate_lengths(group, table)


def test_length_cache(x121314_cache):
    """
    Tests the LengthCache invariants\n
    Asserts the totals per n, sorted lengths and the minimal length.
    """
    assert x121314_cache.n_max == 8
    assert x121314_cache.min_length == pytest.approx(12.0)
    for n in range(1, 9):
        entry = x121314_cache.entry(n)
        assert entry.total == word_count(2, n)
        assert np.all(np.diff(entry.lengths) >= 0)
        assert entry.lengths[0] >= 12.0 - 1e-9
    with pytest.raises(IndexOutOfRangeError):
        x121314_cache.entry(9)


def test_length_cache_file(x121314_cache, tmp_path):
    """
    Tests the LengthCache file format\n
    Asserts a bit-exact round trip and errors on corrupt files.
    """
    path = tmp_path / "x121314.cache"
    x121314_cache.save(path)
    text = path.read_text()
    assert text.splitlines()[:5] == [
        "version 1", "surface X:12,13,14", "r 2", "nmax 8", "seed 20130519"
    ]

    loaded = LengthCache.load(path)
    assert loaded.spec == x121314_cache.spec
    for n in range(1, 9):
        np.testing.assert_array_equal(
            loaded.entry(n).lengths, x121314_cache.entry(n).lengths
        )
        np.testing.assert_array_equal(
            loaded.entry(n).multiplicities, x121314_cache.entry(n).multiplicities
        )
    assert loaded.to_text() == text

    with pytest.raises(CacheFormatError):
        LengthCache.from_text(text.replace("nmax 8", "nmax 9"))
    with pytest.raises(CacheFormatError):
        LengthCache.from_text(text.replace("version 1", "version 2"))
    with pytest.raises(CacheFormatError):
        LengthCache.from_text("\n".join(text.splitlines()[:-1]))
    with pytest.raises(CacheFormatError):
        LengthCache.load(tmp_path / "missing.cache")


def test_primitive_classes():
    """
    Tests primitive_classes\n
    Asserts primitivity flags and shared cyclic class ids.
    """
    classes = {
        word: (primitive, cid) for word, primitive, cid in primitive_classes(2, 3)
    }
    assert classes[(1, 1)][0] is False
    assert classes[(1, 2)][0] is True
    assert classes[(1, 2)][1] == classes[(2, 1)][1]
    assert classes[(1, 2)][1] != classes[(4, 3)][1]
    assert classes[(1, 1, 2)][1] == classes[(1, 2, 1)][1] == classes[(2, 1, 1)][1]
    assert len({cid for word, (_, cid) in classes.items() if len(word) == 1}) == 4


def test_primitive_class_representatives():
    """
    Tests primitive_class_representatives\n
    Asserts one representative per primitive cyclic class.
    """
    representatives = primitive_class_representatives(2, 3)
    assert len(representatives[1]) == 4
    assert len(representatives[2]) == 4
    # 28 words of length 3, 4 proper cubes, the rest in classes of size 3
    assert len(representatives[3]) == 8
    assert sum(len(v) for v in representatives.values()) == 16
