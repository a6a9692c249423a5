import numpy as np
import pytest

TABLE4_COLUMNS = ("SHADE+NewRestart", "SaDE+NewRestart", "SHADE+OldRestart", "IHDELS")
TABLE4 = np.array([
    [2.69e-24, 1.21e-24, 1.76e-28, 4.80e-29],
    [1.00e+03, 1.26e+03, 1.40e+03, 1.27e+03],
    [2.01e+01, 2.01e+01, 2.01e+01, 2.00e+01],
    [1.48e+08, 1.58e+08, 2.99e+08, 3.09e+08],
    [1.39e+06, 3.07e+06, 1.76e+06, 9.68e+06],
    [1.02e+06, 1.03e+06, 1.03e+06, 1.03e+06],
    [7.41e+01, 8.35e+01, 2.44e+02, 3.18e+04],
    [3.17e+11, 3.59e+11, 8.55e+11, 1.36e+12],
    [1.64e+08, 2.48e+08, 2.09e+08, 7.12e+08],
    [9.18e+07, 9.19e+07, 9.25e+07, 9.19e+07],
    [5.11e+05, 4.76e+05, 5.20e+05, 9.87e+06],
    [6.18e+01, 1.10e+02, 3.42e+02, 5.16e+02],
    [1.00e+05, 1.34e+05, 9.61e+05, 4.02e+06],
    [5.76e+06, 6.14e+06, 7.40e+06, 1.48e+07],
    [6.25e+05, 8.69e+05, 1.01e+06, 3.13e+06],
])
TABLE4_FUNCTIONS = tuple(f"F{i}" for i in range(1, 16))

# raw p-values of the control against three opponents, with the opponent names
TABLE3_OPPONENTS = ("MOS-CEC2013", "IHDELS", "DECCG")
TABLE3_RAW = (4.79e-02, 1.53e-03, 8.36e-03)


@pytest.fixture
def table4():
    return TABLE4.copy()


def hand_rank(row):
    """Mean ranks by counting, no sorting library (lower is better)."""
    out = []
    for v in row:
        less = sum(1 for u in row if u < v)
        equal = sum(1 for u in row if u == v)
        out.append(less + (equal + 1) / 2)
    return out
