from shopkit.pricing import apply_discount


def summary(orders):
    lines = []
    for price, rate in orders:
        lines.append(f"{price} -> {apply_discount(price, rate)}")
    return "\n".join(lines)
