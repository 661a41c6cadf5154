"""Exact-arithmetic helpers: integer parsing, primality, and phase reduction.

Every trigonometric evaluation in the package goes through :func:`expi`,
which reduces the rational phase modulo 1 *before* converting to a float.
Products N_1...N_j grow geometrically, so a naive float phase b*lam/N loses
all significant digits after a handful of stages.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from numbers import Rational

TWO_PI = 2.0 * math.pi

# Deterministic Miller-Rabin witness set, valid for n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_LIMIT = 3317044064679887385961981


def parse_int(value, name: str = "value") -> int:
    """Accept a Python int or a decimal string; reject floats and bools."""
    if isinstance(value, bool):
        raise ValueError(f"{name}: expected an integer, got a boolean")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        text = value.strip()
        body = text[1:] if text[:1] in "+-" else text
        if not body.isdigit():
            raise ValueError(f"{name}: {value!r} is not a decimal integer")
        return int(text)
    raise ValueError(f"{name}: expected an integer or decimal string, got {type(value).__name__}")


def to_fraction(value) -> Fraction:
    """Exact rational from int, Fraction, or a string like ``"7/6"``."""
    if isinstance(value, bool):
        raise ValueError("expected a rational, got a boolean")
    if isinstance(value, float):
        raise ValueError("floats are not exact; pass an int, Fraction or 'p/q' string")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise ValueError(f"cannot interpret {value!r} as an exact rational")


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    if n >= _MR_LIMIT:
        raise ValueError("primality test is only deterministic below 3.3e24")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def frac_mod1(x: Fraction) -> Fraction:
    """Fractional part of an exact rational, in [0, 1)."""
    return x - (x.numerator // x.denominator)


def expi(turns: Fraction) -> complex:
    """``exp(2*pi*i*turns)`` with the phase reduced exactly to [-1/2, 1/2)."""
    r = frac_mod1(turns)
    if r >= Fraction(1, 2):
        r -= 1
    if r == 0:
        return 1.0 + 0.0j
    return cmath.exp(1j * TWO_PI * (r.numerator / r.denominator))


def expi_ratio(num: int, den: int) -> complex:
    """``exp(2*pi*i*num/den)`` for integers, reducing ``num mod den`` first."""
    r = num % den
    if 2 * r >= den:
        r -= den
    if r == 0:
        return 1.0 + 0.0j
    return cmath.exp(1j * TWO_PI * (r / den))

