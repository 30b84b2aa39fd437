from calc import sqrt_floor


def test_perfect_square():
    assert sqrt_floor(9) == 3
