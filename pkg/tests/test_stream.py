import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sigstream.stream import (
    EmptyChannelError,
    NonIncreasingTimeError,
    NonNumericCellError,
    PiecewiseLinearPath,
    RaggedRowError,
    Stream,
    TickTable,
    UnknownCategoryError,
    embed_counting,
    embed_linear,
    insert_points,
    parse_table,
    parse_ticks,
    restrict,
    total_variation,
)

from helpers import random_path


def test_parse_simple():
    s = parse_table(b"0,1.0\n1,2.0")
    assert s.length == 2 and s.n_channels == 1
    np.testing.assert_array_equal(s.values[:, 0], [1.0, 2.0])


def test_parse_duplicate_timestamp():
    with pytest.raises(NonIncreasingTimeError) as err:
        parse_table(b"0,1.0\n0,2.0")
    assert err.value.row == 2
    assert "duplicate" in str(err.value)


def test_parse_missing_cell():
    s = parse_table(b"0,\n1,2.0")
    assert s.length == 2
    assert np.isnan(s.values[0, 0]) and s.values[1, 0] == 2.0


def test_parse_errors_carry_rows():
    with pytest.raises(NonNumericCellError) as err:
        parse_table("0,1\n1,abc\n")
    assert err.value.row == 2
    with pytest.raises(RaggedRowError) as err:
        parse_table("0,1,2\n1,2\n")
    assert err.value.row == 2
    with pytest.raises(NonIncreasingTimeError) as err:
        parse_table("0,1\n2,1\n1,1\n")
    assert err.value.row == 3
    with pytest.raises(NonNumericCellError):
        parse_table("x,1\n")


def test_parse_header_and_tabs():
    s = parse_table("t\ta\tb\n0\t1\t2\n1\t3\t4\n", delimiter="\t", header=True)
    assert s.channels == ("a", "b")
    np.testing.assert_array_equal(s.values, [[1, 2], [3, 4]])


def test_embed_full_is_lossless():
    s = parse_table("0,1,2\n0.5,3,4\n2,5,6\n")
    p = embed_linear(s)
    np.testing.assert_array_equal(p.times, s.times)
    np.testing.assert_array_equal(p.points, s.values)


def test_forward_fill():
    s = Stream([0, 1, 2], [[1.0], [np.nan], [3.0]])
    np.testing.assert_array_equal(embed_linear(s).points[:, 0], [1, 1, 3])


def test_leading_backfill():
    s = Stream([0, 1], [[np.nan], [2.0]])
    np.testing.assert_array_equal(embed_linear(s).points[:, 0], [2, 2])


def test_empty_channel():
    s = Stream([0, 1], [[1.0, np.nan], [2.0, np.nan]])
    with pytest.raises(EmptyChannelError):
        embed_linear(s)


def test_time_augmentation():
    s = Stream([0.0, 0.5, 2.0], [[1.0], [2.0], [0.0]])
    p = embed_linear(s, time_augment=True)
    assert p.dim == 2
    np.testing.assert_array_equal(p.points[:, 0], s.times)


def test_counting_three_categories():
    ticks = TickTable([1, 2, 3], [1, 2, 3], 3)
    np.testing.assert_array_equal(
        embed_counting(ticks).points, [[0, 0, 0], [1, 0, 0], [1, 1, 0], [1, 1, 1]]
    )


def test_counting_empty_table():
    p = embed_counting(TickTable([], [], 2))
    assert p.n_vertices == 1
    np.testing.assert_array_equal(p.points, [[0, 0]])


def test_counting_reversed_order():
    p = embed_counting(TickTable([1, 2], [2, 1], 2))
    np.testing.assert_array_equal(p.points, [[0, 0], [0, 1], [1, 1]])


@given(st.lists(st.integers(1, 4), max_size=30))
def test_counting_monotone_with_final_counts(cats):
    ticks = TickTable(np.arange(len(cats), dtype=float), cats, 4)
    p = embed_counting(ticks)
    assert np.all(np.diff(p.points, axis=0) >= 0)
    np.testing.assert_array_equal(p.points[-1], np.bincount(np.array(cats, dtype=int), minlength=5)[1:])


def test_counting_allows_simultaneous_ticks():
    p = embed_counting(TickTable([1, 1, 1], [1, 2, 3], 3))
    assert p.n_vertices == 4


def test_parse_ticks_labels():
    t = parse_ticks("1,trade\n2,call\n3,trade\n")
    assert t.labels == ("trade", "call")
    np.testing.assert_array_equal(t.categories, [1, 2, 1])
    fixed = parse_ticks("1,call\n2,move\n", labels=("call", "trade", "move"))
    np.testing.assert_array_equal(fixed.categories, [1, 3])
    with pytest.raises(UnknownCategoryError) as err:
        parse_ticks("1,call\n2,sell\n", labels=("call", "trade", "move"))
    assert err.value.row == 2
    with pytest.raises(NonIncreasingTimeError):
        parse_ticks("2,call\n1,move\n")


def test_tick_category_range():
    with pytest.raises(UnknownCategoryError):
        TickTable([0, 1], [1, 4], 3)


def test_insert_midpoint():
    p = PiecewiseLinearPath([0.0, 1.0], [[0.0, 0.0], [2.0, 2.0]])
    q = insert_points(p, [0.5])
    np.testing.assert_array_equal(q.times, [0, 0.5, 1])
    np.testing.assert_array_equal(q.points[1], [1, 1])


def test_insert_existing_time_is_noop(lpath):
    assert insert_points(lpath, [1.0]) is lpath


def test_insert_out_of_span(lpath):
    with pytest.raises(ValueError):
        insert_points(lpath, [2.5])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 10))
def test_insert_preserves_total_variation(seed, d, segments):
    rng = np.random.default_rng(seed)
    p = random_path(rng, d, segments)
    t0, t1 = p.span
    q = insert_points(p, rng.uniform(t0, t1, size=20))
    assert abs(total_variation(q) - total_variation(p)) <= 1e-12 * max(1.0, total_variation(p))
    # original vertices are kept exactly
    np.testing.assert_array_equal(q(p.times), p.points)


def test_restrict(lpath):
    sub = restrict(lpath, 0.5, 1.5)
    np.testing.assert_array_equal(sub.times, [0.5, 1.0, 1.5])
    np.testing.assert_array_equal(sub.points, [[0.5, 0], [1, 0], [1, 0.5]])
    with pytest.raises(ValueError):
        restrict(lpath, -1.0, 1.0)


def test_path_validation():
    with pytest.raises(ValueError):
        PiecewiseLinearPath([0, 0], [[0], [1]])
    with pytest.raises(ValueError):
        PiecewiseLinearPath([0, 1], [[0], [np.inf]])
    assert PiecewiseLinearPath([3.0], [[1.0, 2.0]]).n_vertices == 1
