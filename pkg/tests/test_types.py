import pytest
from hypothesis import given, strategies as st

from hogpred.types import UNIT, Arrow, TypeSyntaxError, arrow, enumerate_types, parse_type, show_type, types_of_size


def catalan(n):
    # binary trees with n leaves
    from math import comb
    return comb(2 * (n - 1), n - 1) // n


@pytest.mark.parametrize("n", range(1, 8))
def test_types_of_size_counts(n):
    assert len(types_of_size(n)) == catalan(n)
    assert len(set(types_of_size(n))) == len(types_of_size(n))


def test_enumerate_types_ascending():
    tys = enumerate_types(4)
    assert [t.size for t in tys] == sorted(t.size for t in tys)
    assert len(tys) == 1 + 1 + 2 + 5


def test_arrow_is_interned_and_right_nested():
    a = arrow(UNIT, UNIT, UNIT)
    assert a is Arrow(UNIT, Arrow(UNIT, UNIT))
    assert show_type(a) == "(-> unit unit unit)"


def test_parse_known_forms():
    assert parse_type("unit") is UNIT
    assert parse_type("(-> (-> unit unit) unit)") is Arrow(Arrow(UNIT, UNIT), UNIT)


@pytest.mark.parametrize("src", ["", "(-> unit)", "(-> unit unit", "bool", "unit unit"])
def test_parse_rejects(src):
    with pytest.raises(TypeSyntaxError):
        parse_type(src)


@given(st.integers(1, 6).flatmap(lambda n: st.sampled_from(types_of_size(n))))
def test_show_parse_roundtrip(ty):
    assert parse_type(show_type(ty)) is ty
