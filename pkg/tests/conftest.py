import mpmath as mp
import pytest


@pytest.fixture(autouse=True)
def _mpmath_precision():
    # oracle comparisons need plenty of slack over the 256-bit targets; reset
    # around every test so no test can leak a reduced precision into another
    old = mp.mp.prec
    mp.mp.prec = 700
    yield
    mp.mp.prec = old
