import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sigstream.tensor_algebra import (
    AlgebraShape,
    TruncatedTensor,
    add,
    concat_mul,
    dim,
    exp_level1,
    from_level1,
    scale,
    str_to_word,
    tensor_exp,
    tensor_log,
    unit,
    word_to_str,
    zero,
)

from oracles import all_words, triple_split, word_mul

shapes = st.tuples(st.integers(1, 3), st.integers(0, 4)).map(lambda t: AlgebraShape(*t))


def random_tensor(shape, rng, scalar=None):
    c = rng.normal(size=shape.dim)
    if scalar is not None:
        c[0] = scalar
    return TruncatedTensor(shape, c)


def as_dict(t):
    return dict(zip(t.shape.words(), t.coeffs))


@pytest.mark.parametrize("d,n,expected", [(2, 3, 15), (1, 5, 6), (3, 3, 40), (5, 0, 1), (1, 0, 1)])
def test_dim_examples(d, n, expected):
    assert dim(d, n) == expected


@pytest.mark.parametrize("d", range(1, 6))
@pytest.mark.parametrize("n", range(0, 6))
def test_dim_matches_enumeration(d, n):
    assert dim(d, n) == len(all_words(d, n))
    assert AlgebraShape(d, n).dim == dim(d, n)


def test_dim_overflow_is_loud():
    with pytest.raises(OverflowError):
        dim(10, 18)
    # largest safe neighbour still works
    assert dim(10, 17) == (10**18 - 1) // 9


def test_bad_shapes():
    with pytest.raises(ValueError):
        AlgebraShape(0, 2)
    with pytest.raises(ValueError):
        AlgebraShape(2, -1)


@given(shapes)
def test_word_index_is_bijection(shape):
    words = shape.words()
    assert len(set(words)) == shape.dim
    assert [shape.index(w) for w in words] == list(range(shape.dim))
    # degree-major, lexicographic within degree
    assert words == sorted(words, key=lambda w: (len(w), w))


def test_word_strings():
    assert word_to_str((1, 1, 2), 2) == "112"
    assert word_to_str((), 3) == ""
    assert word_to_str((1, 12, 3), 12) == "(1,12,3)"
    assert str_to_word("(1,12,3)", 12) == (1, 12, 3)
    assert str_to_word("21", 2) == (2, 1)


def test_dict_roundtrip_large_alphabet():
    shape = AlgebraShape(11, 2)
    t = random_tensor(shape, np.random.default_rng(0))
    back = TruncatedTensor.from_dict(shape, t.to_dict())
    np.testing.assert_array_equal(back.coeffs, t.coeffs)
    assert "(11,3)" in t.to_dict()


def test_unit():
    np.testing.assert_array_equal(unit(AlgebraShape(2, 2)).coeffs, [1, 0, 0, 0, 0, 0, 0])


@given(shapes, st.integers(0, 2**32 - 1))
def test_unit_laws_exact(shape, seed):
    t = random_tensor(shape, np.random.default_rng(seed))
    np.testing.assert_array_equal(concat_mul(unit(shape), t).coeffs, t.coeffs)
    np.testing.assert_array_equal(concat_mul(t, unit(shape)).coeffs, t.coeffs)


def test_concat_basis_words():
    shape = AlgebraShape(2, 2)
    a = TruncatedTensor.from_words(shape, {(1,): 1.0})
    b = TruncatedTensor.from_words(shape, {(2,): 1.0})
    c = concat_mul(a, b)
    expected = np.zeros(shape.dim)
    expected[shape.index((1, 2))] = 1.0
    np.testing.assert_array_equal(c.coeffs, expected)


def test_concat_distributes():
    shape = AlgebraShape(2, 3)
    one_v1 = TruncatedTensor.from_words(shape, {(): 1.0, (1,): 1.0})
    one_v2 = TruncatedTensor.from_words(shape, {(): 1.0, (2,): 1.0})
    got = concat_mul(one_v1, one_v2).to_dict(skip_zeros=True)
    assert got == {"": 1.0, "1": 1.0, "2": 1.0, "12": 1.0}


def test_concat_discards_overflow_degrees():
    shape = AlgebraShape(2, 2)
    v1v1 = TruncatedTensor.from_words(shape, {(1, 1): 1.0})
    np.testing.assert_array_equal(concat_mul(v1v1, v1v1).coeffs, 0.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_concat_matches_pairwise_oracle(seed):
    rng = np.random.default_rng(seed)
    shape = AlgebraShape(2, 3)
    a, b = random_tensor(shape, rng), random_tensor(shape, rng)
    ref = word_mul(as_dict(a), as_dict(b), shape.n)
    got = as_dict(concat_mul(a, b))
    for w in shape.words():
        assert got[w] == pytest.approx(ref.get(w, 0.0), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_associativity_against_triple_split(seed):
    rng = np.random.default_rng(seed)
    shape = AlgebraShape(2, 3)
    a, b, c = (random_tensor(shape, rng) for _ in range(3))
    left = concat_mul(concat_mul(a, b), c)
    right = concat_mul(a, concat_mul(b, c))
    np.testing.assert_allclose(left.coeffs, right.coeffs, rtol=0, atol=1e-12)
    ref = triple_split(as_dict(a), as_dict(b), as_dict(c), 2, 3)
    np.testing.assert_allclose(left.coeffs, [ref[w] for w in shape.words()], rtol=0, atol=1e-12)


@given(shapes, st.integers(0, 2**32 - 1))
def test_degree_grading(shape, seed):
    rng = np.random.default_rng(seed)
    a, b = random_tensor(shape, rng), random_tensor(shape, rng)
    full = concat_mul(a, b)
    for k in range(shape.n + 1):
        # kill every degree above k; degree k of the product must not move
        mask = np.zeros(shape.dim)
        mask[: shape.offsets[k + 1]] = 1.0
        cut = concat_mul(TruncatedTensor(shape, a.coeffs * mask), TruncatedTensor(shape, b.coeffs * mask))
        sl = shape.level_slice(k)
        np.testing.assert_array_equal(cut.coeffs[sl], full.coeffs[sl])


def test_add_scale():
    shape = AlgebraShape(2, 2)
    rng = np.random.default_rng(1)
    a, b = random_tensor(shape, rng), random_tensor(shape, rng)
    np.testing.assert_array_equal(add(a, scale(a, -1)).coeffs, 0.0)
    assert scale(unit(shape), 2).coeffs[0] == 2.0
    np.testing.assert_array_equal(add(a, b).coeffs, add(b, a).coeffs)
    with pytest.raises(ValueError):
        add(a, unit(AlgebraShape(2, 3)))
    with pytest.raises(ValueError):
        concat_mul(a, unit(AlgebraShape(3, 2)))


def test_values_are_immutable_and_finite():
    t = unit(AlgebraShape(2, 2))
    with pytest.raises(ValueError):
        t.coeffs[0] = 3.0
    with pytest.raises(FloatingPointError):
        TruncatedTensor(AlgebraShape(1, 1), [1.0, np.nan])
    with pytest.raises(ValueError):
        TruncatedTensor(AlgebraShape(1, 1), [1.0, 2.0, 3.0])


def test_exp_of_unit_vector():
    shape = AlgebraShape(2, 2)
    e = tensor_exp(from_level1(shape, [1.0, 0.0]))
    assert e.to_dict() == {"": 1.0, "1": 1.0, "2": 0.0, "11": 0.5, "12": 0.0, "21": 0.0, "22": 0.0}


def test_exp_of_zero_is_unit():
    shape = AlgebraShape(3, 3)
    np.testing.assert_array_equal(tensor_exp(zero(shape)).coeffs, unit(shape).coeffs)


@given(st.integers(0, 2**32 - 1))
def test_exp_degree4_word(seed):
    x = np.random.default_rng(seed).normal(size=2)
    e = tensor_exp(from_level1(AlgebraShape(2, 4), x))
    assert e["1122"] == pytest.approx(x[0] * x[0] * x[1] * x[1] / 24, rel=1e-12, abs=1e-15)
    np.testing.assert_allclose(e.coeffs, exp_level1(AlgebraShape(2, 4), x).coeffs, rtol=1e-13, atol=1e-15)


def test_exp_rejects_scalar_part():
    with pytest.raises(ValueError):
        tensor_exp(unit(AlgebraShape(2, 2)))


def test_log_of_unit_is_zero():
    np.testing.assert_array_equal(tensor_log(unit(AlgebraShape(2, 3))).coeffs, 0.0)


def test_log_series_d1():
    g = TruncatedTensor.from_words(AlgebraShape(1, 3), {(): 1.0, (1,): 1.0})
    np.testing.assert_allclose(tensor_log(g).coeffs, [0.0, 1.0, -0.5, 1.0 / 3.0], rtol=0, atol=1e-15)


def test_log_rejects_non_group_like():
    with pytest.raises(ValueError):
        tensor_log(scale(unit(AlgebraShape(2, 2)), 2.0))


@settings(max_examples=50, deadline=None)
@given(shapes, st.integers(0, 2**32 - 1))
def test_exp_log_inverse(shape, seed):
    rng = np.random.default_rng(seed)
    t = random_tensor(shape, rng, scalar=0.0)
    np.testing.assert_allclose(tensor_log(tensor_exp(t)).coeffs, t.coeffs, rtol=0, atol=1e-10)
    g = random_tensor(shape, rng, scalar=1.0)
    np.testing.assert_allclose(tensor_exp(tensor_log(g)).coeffs, g.coeffs, rtol=0, atol=1e-10)


def test_level_view():
    shape = AlgebraShape(2, 2)
    t = TruncatedTensor.from_words(shape, {(2, 1): 5.0})
    assert t.level(2)[1, 0] == 5.0
    assert t.level(0).shape == ()
    assert math.isclose(t["21"], 5.0)
