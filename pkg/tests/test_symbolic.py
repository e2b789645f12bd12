import pytest
from hypothesis import given, strategies as st

from hypercantor.errors import DepthCapError, ParameterError
from hypercantor.symbolic import (BiWindow, as_word, beta_metric, dual_str, enumerate_cylinders,
                                  index_word, pad_dual, shift, word_index, word_str)

bits = st.lists(st.integers(0, 1), max_size=12).map(tuple)


def test_shift_examples():
    w = shift(BiWindow((0,), (1, 0)))
    assert (w.past, w.future) == ((0, 1), (0,))
    w = shift(BiWindow((), (1,)))
    assert (w.past, w.future) == ((1,), ())


def test_shift_empty_future():
    with pytest.raises(ParameterError):
        shift(BiWindow((0, 1), ()))


@given(bits, bits, st.integers(0, 12))
def test_shift_moves_prefix_of_future(past, future, n):
    n = min(n, len(future))
    w = shift(BiWindow(past, future), n)
    assert w.past == past + future[:n]
    assert w.future == future[n:]


def test_beta_metric_examples():
    assert beta_metric((0, 1, 1), (1, 1, 1), 1 / 3).value == pytest.approx((1 / 3) ** 2)
    d = beta_metric((0, 1, 0, 1, 1), (0, 1, 0, 1, 1), 0.5)
    assert d.value == 0 and d.truncated
    assert beta_metric((0,), (1,), 0.4333).value == 1


def test_beta_metric_strict_suffix_is_upper_bound():
    d = beta_metric((1, 0, 1), (0, 1), 0.5)
    assert d.truncated and d.value == d.upper == 0.25 and d.lower == 0


@pytest.mark.parametrize("beta", [0, 1, -0.2, 1.5])
def test_beta_metric_range(beta):
    with pytest.raises(ParameterError):
        beta_metric((0,), (1,), beta)


@given(st.integers(1, 10).flatmap(lambda n: st.tuples(*[st.lists(st.integers(0, 1), min_size=n, max_size=n).map(tuple)] * 3)),
       st.floats(0.05, 0.95))
def test_beta_metric_ultrametric(triple, beta):
    y, w, z = triple
    d = lambda a, b: beta_metric(a, b, beta).value
    assert d(y, w) == d(w, y)
    assert d(y, w) <= max(d(y, z), d(z, w)) + 1e-15


def test_enumerate_cylinders():
    assert enumerate_cylinders(0) == [()]
    assert enumerate_cylinders(1) == [(0,), (1,)]
    c = enumerate_cylinders(3)
    assert len(c) == 8 and c[0] == (0, 0, 0) and c[-1] == (1, 1, 1)
    assert c == sorted(c)


@given(st.integers(0, 10))
def test_enumerate_counts(n):
    c = enumerate_cylinders(n)
    assert len(set(c)) == 2**n
    assert [word_index(w) for w in c] == list(range(2**n))


def test_depth_cap():
    with pytest.raises(DepthCapError):
        enumerate_cylinders(27)
    with pytest.raises(DepthCapError):
        enumerate_cylinders(5, cap=4)


def test_word_parsing_and_printing():
    assert as_word("…0110") == (0, 1, 1, 0)
    assert word_str((0, 1)) == "01"
    assert dual_str((0, 1), human=True).startswith("…")
    with pytest.raises(ParameterError):
        as_word("012")


@given(st.integers(0, 12).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 2**n - 1))))
def test_index_roundtrip(pair):
    n, i = pair
    assert word_index(index_word(i, n)) == i


def test_pad_dual():
    assert pad_dual((1,), 3) == (0, 0, 1)
    assert pad_dual((1, 0, 1), 2) == (1, 0, 1)
