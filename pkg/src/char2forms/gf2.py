"""Bitmask arithmetic for GF(2^e).

Elements are ints whose bits are the coefficients of the residue class
modulo a fixed primitive polynomial; bit i is the coefficient of w^i where
w is the distinguished generator. The modulus table is compiled in so that
every run of the library produces identical field tables.
"""
from __future__ import annotations

from .errors import NotSquare, ZeroInput

# Primitive polynomials over GF(2), bit k = coefficient of x^k.
MODULUS = {
    1: 0b11,                # x + 1
    2: 0b111,               # x^2 + x + 1
    3: 0b1011,              # x^3 + x + 1
    4: 0b10011,             # x^4 + x + 1
    5: 0b100101,            # x^5 + x^2 + 1
    6: 0b1000011,           # x^6 + x + 1
    7: 0b10000011,          # x^7 + x + 1
    8: 0b100011101,         # x^8 + x^4 + x^3 + x^2 + 1
    9: 0b1000010001,        # x^9 + x^4 + 1
    10: 0b10000001001,      # x^10 + x^3 + 1
    11: 0b100000000101,     # x^11 + x^2 + 1
    12: 0b1000001010011,    # x^12 + x^6 + x^4 + x + 1
}

MAX_DEGREE = max(MODULUS)


def mul(a: int, b: int, e: int) -> int:
    """Carry-less product of a and b reduced modulo the degree-e modulus."""
    mod = MODULUS[e]
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        b >>= 1
        a <<= 1
        if a >> e & 1:
            a ^= mod
    return acc


def power(a: int, n: int, e: int) -> int:
    acc, base = 1, a
    while n:
        if n & 1:
            acc = mul(acc, base, e)
        base = mul(base, base, e)
        n >>= 1
    return acc


def inv(a: int, e: int) -> int:
    if a == 0:
        raise ZeroInput("inverse of 0 in GF(2^%d)" % e)
    return power(a, (1 << e) - 2, e)


def sqrt(a: int, e: int) -> int:
    """The unique square root (Frobenius is bijective): a^(2^(e-1))."""
    return power(a, 1 << (e - 1), e)


def trace(a: int, e: int) -> int:
    """Absolute trace to GF(2): sum of the e Frobenius conjugates."""
    acc, x = 0, a
    for _ in range(e):
        acc ^= x
        x = mul(x, x, e)
    return acc & ((1 << e) - 1)


def artin_schreier_solve(a: int, e: int) -> int | None:
    """Some y with y^2 + y = a, or None when trace(a) = 1.

    Fields here are tiny (e <= 12), so a direct scan is already instant and
    keeps this function free of any precomputed table.
    """
    for y in range(1 << e):
        if mul(y, y, e) ^ y == a:
            return y
    return None


def trace_one_element(e: int) -> int:
    """The smallest element (as an int) of absolute trace 1; exists always."""
    for a in range(1, 1 << e):
        if trace(a, e) == 1:
            return a
    raise NotSquare("no trace-one element — impossible")  # pragma: no cover
