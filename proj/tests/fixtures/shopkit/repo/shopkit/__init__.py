from .pricing import apply_discount
from .money import *

__all__ = ["apply_discount", "round_money", "to_cents", "Currency"]
