"""Published reference CDF values, stored exactly as printed.

Each row is ``(x, nu, delta, lower-tail CDF)``; the CDF strings keep all
18 printed digits so comparisons are made against the parsed double.
"""
from typing import NamedTuple


class GoldRow(NamedTuple):
    x: float
    nu: float
    delta: float
    cdf: float
    cdf_text: str


_TABLE = """\
1     1    0    7.50000000000000000E-001
-35   1    0    9.09209467564843408E-003
-35   1    1    1.89903487263458750E-003
-5    1    5    8.52042451613777143E-009
-15   1    15   1.29043391190105994E-053
-35   1    35   7.31501102529248499E-272
1     10   5    4.34725285650591657E-005
1     10   10   7.95914542988750673E-019
1     10   15   1.41346486009205976E-042
1     10   35   1.69061467860900429E-237
150   10   200  5.88999020094520836E-002
150   10   500  3.25241635439258347E-019
50    100  75   4.99615060338271916E-011
500   100  510  3.71160937464178059E-001
1     1000 10   1.14935521338266224E-019
100   1000 105  2.05403544901854621E-002
1000  1000 1010 3.22438286661716843E-001
"""


def _parse(text):
    rows = []
    for line in text.splitlines():
        x, nu, delta, value = line.split()
        rows.append(GoldRow(float(x), float(nu), float(delta), float(value), value))
    return tuple(rows)


TABLE1 = _parse(_TABLE)

# integrand figure: x = 5, nu = 100, delta = 15, plotted with 6 panels
FIGURE1 = GoldRow(5.0, 100.0, 15.0, 2.640405806735035e-21, "2.640405806735035e-21")
FIGURE1_N_SUBS = 6
