import math

import pytest

from supnorm.domain import load_domain, modular_group
from supnorm.engine import compute_constants

ROOT3_HALF = math.sqrt(3.0) / 2.0
RHO = complex(0.5, ROOT3_HALF)
RHO_LEFT = complex(-0.5, ROOT3_HALF)


@pytest.fixture(scope="session")
def psl2z():
    return modular_group()


@pytest.fixture(scope="session")
def psl2z_constants(psl2z):
    return compute_constants(psl2z, Y0=2.0)


@pytest.fixture(scope="session")
def genus2_domain():
    return load_domain(
        {
            "name": "genus2-cocompact",
            "genus": 2,
            "cusps": [],
            "elliptic": [],
            "boundary": [],
            "region": [],
            "min_hyperbolic_trace": 3.0,
        }
    )


def sigma_direct(a: int, b: int, c: int, d: int, z: complex) -> float:
    """Displacement via 4 y^2 (sigma - 1) = |c z^2 + (d-a) z - b|^2."""
    y = z.imag
    return 1.0 + abs(c * z * z + (d - a) * z - b) ** 2 / (4.0 * y * y)


def brute_force_ball(z: complex, R: float, entry_bound: int) -> set:
    """Entry-bounded raw search for PSL(2,Z) elements with displacement <= R.

    Scans every canonical matrix with |a|,|b|,|c|,|d| <= entry_bound directly,
    with no structural shortcuts; serves as the oracle for the coset-based
    enumeration.
    """
    found = set()
    B = entry_bound
    for n in range(-B, B + 1):
        if sigma_direct(1, n, 0, 1, z) <= R:
            found.add((1, n, 0, 1))
    for c in range(1, B + 1):
        for a in range(-B, B + 1):
            for d in range(-B, B + 1):
                if (a * d - 1) % c:
                    continue
                b = (a * d - 1) // c
                if abs(b) > B:
                    continue
                if sigma_direct(a, b, c, d, z) <= R:
                    found.add((a, b, c, d))
    return found
