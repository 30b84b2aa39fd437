from decimal import Decimal, ROUND_HALF_UP

__all__ = ["round_money", "to_cents", "Currency"]


def round_money(amount):
    # truncates instead of rounding half up
    return float(int(amount * 100)) / 100


def to_cents(amount):
    return int(round_money(amount) * 100)


class Currency:
    def __init__(self, code, symbol):
        self.code = code
        self.symbol = symbol

    def format(self, amount):
        return f"{self.symbol}{round_money(amount):.2f}"


def _quantize(amount):
    return Decimal(str(amount)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
