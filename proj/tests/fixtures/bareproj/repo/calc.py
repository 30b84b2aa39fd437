def _check(x):
    if x < 0:
        raise ValueError("negative")
    return x


def sqrt_floor(x):
    _check(x)
    r = 0
    while (r + 1) * (r + 1) < x:
        r += 1
    return r
