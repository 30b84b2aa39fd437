from shopkit.money import round_money
from shopkit.pricing import apply_discount
from shopkit.tax import gross


def test_apply_discount():
    assert apply_discount(100.0, 0.25, country="XX") == 75.0


def test_round_money():
    assert round_money(2.675) == 2.68


def test_gross():
    assert gross(100.0, "DE") == 119.0
