from shopkit import pricing
from shopkit.cart import Cart


def checkout(cart: Cart, coupon_rate):
    subtotal = cart.total()
    if coupon_rate:
        return pricing.apply_discount(subtotal, coupon_rate)
    return subtotal
