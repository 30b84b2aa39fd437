from shopkit.pricing import apply_discount


class Cart:
    def __init__(self, items=None):
        self.items = list(items or [])

    def add(self, name, price):
        self.items.append((name, price))

    def total(self, rate=0.0):
        return sum(apply_discount(price, rate) for _, price in self.items)
