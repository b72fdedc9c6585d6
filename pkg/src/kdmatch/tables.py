"""Reference tables and their display conventions.

Lower bounds and f values are shown truncated, upper bounds rounded up, so a
displayed figure never overstates what was proven. A computed value
reproduces a cell when its display under the cell's rule equals the
reference digits. The (k,d) grid mixes rounding styles, so its cells are
compared within 1e-3 after capping at 0.999 instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .analysis import eta, kd_ocs_lb, kd_ranking_ub
from .candidate import optimal_candidate

__all__ = [
    "REF_F_VALUES",
    "REF_OCS_SMALL_D",
    "REF_OCS_LARGE_D",
    "REF_OCS_LARGE_D_HEAVY",
    "REF_RANKING_SMALL_D",
    "REF_ETA",
    "REF_KD",
    "KD_CAP",
    "truncate",
    "round_up",
    "Cell",
    "f_value_cells",
    "ocs_small_d_cells",
    "ocs_large_d_cells",
    "ranking_small_d_cells",
    "eta_cells",
    "kd_cells",
    "all_cells",
]

REF_F_VALUES = {
    3: (1.5, 2.625, 6.0703),
    4: (1.3333, 1.9259, 3.1623, 6.4516),
    5: (1.25, 1.6406, 2.3135, 3.6516, 6.7673),
    6: (1.2, 1.488, 1.9308, 2.6764, 4.0926, 7.0412),
    7: (1.1666, 1.3935, 1.7171, 2.2086, 3.0216, 4.4831, 7.2863),
    8: (1.1428, 1.3294, 1.5819, 1.9394, 2.4767, 3.3464, 4.8307, 7.5050),
    9: (1.125, 1.2832, 1.4890, 1.7661, 2.1561, 2.7372, 3.6486, 5.1336, 7.6643),
    10: (1.1111, 1.2482, 1.4214, 1.6459, 1.9469, 2.3680, 2.9879, 3.9297, 5.4065, 7.8134),
}
REF_OCS_SMALL_D = {3: 0.8352, 4: 0.8450, 5: 0.8522, 6: 0.8579, 7: 0.8627, 8: 0.8667, 9: 0.8695, 10: 0.8720}
REF_OCS_LARGE_D = {20: 0.8842, 40: 0.8907, 80: 0.8941, 200: 0.8962, 400: 0.8969, 800: 0.8972, 2000: 0.8974}
REF_OCS_LARGE_D_HEAVY = {4000: 0.8975, 8000: 0.8976}
REF_RANKING_SMALL_D = {2: 0.8264, 3: 0.8251, 4: 0.8228, 5: 0.8223, 6: 0.8219}
REF_ETA = {2: 0.875, 3: 0.9013, 4: 0.9063, 5: 0.9171, 6: 0.9219, 7: 0.9281, 8: 0.9317, 9: 0.9358, 10: 0.9385}
# (k, d) -> (OCS lower bound, RANKING upper bound)
REF_KD = {
    (3, 2): (0.992, 0.968),
    (4, 2): (0.999, 0.987), (4, 3): (0.954, 0.934),
    (5, 2): (0.999, 0.994), (5, 3): (0.993, 0.962), (5, 4): (0.943, 0.911),
    (6, 2): (0.999, 0.997), (6, 3): (0.999, 0.978), (6, 4): (0.985, 0.941), (6, 5): (0.933, 0.895),
    (7, 2): (0.999, 0.999), (7, 3): (0.999, 0.987), (7, 4): (0.997, 0.960), (7, 5): (0.976, 0.924),
    (7, 6): (0.928, 0.884),
    (8, 2): (0.999, 0.999), (8, 3): (0.999, 0.992), (8, 4): (0.999, 0.973), (8, 5): (0.993, 0.944),
    (8, 6): (0.968, 0.911), (8, 7): (0.924, 0.875),
    (9, 2): (0.999, 0.999), (9, 3): (0.999, 0.995), (9, 4): (0.999, 0.981), (9, 5): (0.998, 0.959),
    (9, 6): (0.988, 0.931), (9, 7): (0.962, 0.900),
    (10, 2): (0.999, 0.999), (10, 3): (0.999, 0.997), (10, 4): (0.999, 0.987), (10, 5): (0.999, 0.969),
    (10, 6): (0.996, 0.946), (10, 7): (0.983, 0.920),
}
KD_CAP = 0.999

_FUZZ = 1e-9  # keeps exact decimals such as 2.625 from slipping a digit


def truncate(v: float, digits: int) -> float:
    s = 10**digits
    return math.floor(v * s + _FUZZ) / s


def round_up(v: float, digits: int) -> float:
    s = 10**digits
    return math.ceil(v * s - _FUZZ) / s


@dataclass(frozen=True)
class Cell:
    table: str
    key: str
    computed: float
    shown: float
    reference: float
    tol: float = 0.0

    @property
    def ok(self) -> bool:
        return abs(self.shown - self.reference) <= self.tol + 1e-12

    def diff_line(self) -> str:
        return (f"{self.table}[{self.key}]: computed {self.computed:.8f} shows {self.shown} "
                f"expected {self.reference}")


def _cells(table: str, refs: dict, compute: Callable, show: Callable) -> list[Cell]:
    out = []
    for key, ref in refs.items():
        v = float(compute(key))
        out.append(Cell(table, str(key), v, show(v), ref))
    return out


def f_value_cells() -> list[Cell]:
    out = []
    for d, row in REF_F_VALUES.items():
        f = optimal_candidate(d, d)
        for l, ref in enumerate(row, start=1):
            out.append(Cell("f_values", f"d={d},l={l}", f.values[l], truncate(f.values[l], 4), ref))
    return out


def ocs_small_d_cells() -> list[Cell]:
    return _cells("ocs_small_d", REF_OCS_SMALL_D, lambda d: optimal_candidate(d, d).ratio(), lambda v: truncate(v, 4))


def ocs_large_d_cells(heavy: bool = False) -> list[Cell]:
    refs = dict(REF_OCS_LARGE_D)
    if heavy:
        refs.update(REF_OCS_LARGE_D_HEAVY)
    return _cells("ocs_large_d", refs, lambda d: optimal_candidate(d, d).ratio(), lambda v: truncate(v, 4))


def ranking_small_d_cells(heavy: bool = False) -> list[Cell]:
    from .exact import ranking_exact_smalld

    refs = {d: v for d, v in REF_RANKING_SMALL_D.items() if heavy or d <= 5}
    return _cells("ranking_small_d", refs, lambda d: ranking_exact_smalld(d, heavy=heavy).value,
                  lambda v: round_up(v, 4))


def eta_cells() -> list[Cell]:
    return _cells("eta", REF_ETA, eta, lambda v: round_up(v, 4))


def kd_cells(tol: float = 1e-3) -> list[Cell]:
    out = []
    for (k, d), (ocs, rk) in REF_KD.items():
        a, b = kd_ocs_lb(k, d), kd_ranking_ub(k, d)
        out.append(Cell("kd_ocs", f"k={k},d={d}", a, min(a, KD_CAP), ocs, tol))
        out.append(Cell("kd_ranking", f"k={k},d={d}", b, min(b, KD_CAP), rk, tol))
    return out


def all_cells(heavy: bool = False) -> list[Cell]:
    return (f_value_cells() + ocs_small_d_cells() + ocs_large_d_cells(heavy)
            + ranking_small_d_cells(heavy) + eta_cells() + kd_cells())


def exact_fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"
