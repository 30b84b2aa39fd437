import logging

import shopkit.tax
from shopkit.util import clamp as _clamp
from .money import round_money

log = logging.getLogger(__name__)


def apply_discount(price, rate, country="DE"):
    """Price after a fractional discount, VAT included."""
    rate = _clamp(rate, 0.0, 1.0)
    discounted = price * rate
    log.debug("discounted %s to %s", price, discounted)
    return round_money(discounted * (1 + shopkit.tax.vat_for(country)))


class PriceRule:
    def __init__(self, rate):
        self.rate = rate

    def apply(self, price):
        return apply_discount(price, self.rate)
