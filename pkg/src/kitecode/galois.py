"""Table-driven arithmetic over GF(2^m)."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

# Primitive polynomials, bit pattern includes the x^m term.
PRIMITIVE_POLYS = {
    3: 0b1011,  # x^3 + x + 1
    4: 0b10011,  # x^4 + x + 1
    5: 0b100101,  # x^5 + x^2 + 1
    6: 0b1000011,  # x^6 + x + 1
    7: 0b10001001,  # x^7 + x^3 + 1
    8: 0x11D,  # x^8 + x^4 + x^3 + x^2 + 1
    9: 0x211,  # x^9 + x^4 + 1
    10: 0x409,  # x^10 + x^3 + 1
    11: 0x805,  # x^11 + x^2 + 1
    12: 0x1053,  # x^12 + x^6 + x^4 + x + 1
    13: 0x201B,  # x^13 + x^4 + x^3 + x + 1
    14: 0x4443,  # x^14 + x^10 + x^6 + x + 1
    15: 0x8003,  # x^15 + x + 1
    16: 0x1100B,  # x^16 + x^12 + x^3 + x + 1
}


class GfField:
    """GF(2^m) with exp/log tables built from a primitive polynomial.

    ``exp`` has length ``2*(q-1)`` so that ``exp[log a + log b]`` needs no
    reduction. ``log[0]`` is unused and set to -1.
    """

    def __init__(self, m: int, prim_poly: int | None = None):
        if not 3 <= m <= 16:
            raise ValueError(f"extension degree must be in [3, 16], got {m}")
        if prim_poly is None:
            prim_poly = PRIMITIVE_POLYS[m]
        if prim_poly >> m != 1:
            raise ValueError("primitive polynomial must have degree m")
        self.m = m
        self.q = 1 << m
        self.prim_poly = prim_poly
        order = self.q - 1
        exp = np.zeros(2 * order, dtype=np.int64)
        log = np.full(self.q, -1, dtype=np.int64)
        x = 1
        for i in range(order):
            if log[x] != -1:
                raise ValueError(f"polynomial {prim_poly:#x} is not primitive")
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & self.q:
                x ^= prim_poly
        if x != 1:
            raise ValueError(f"polynomial {prim_poly:#x} is not primitive")
        exp[order:] = exp[:order]
        exp.setflags(write=False)
        log.setflags(write=False)
        self.exp = exp
        self.log = log

    def __repr__(self):
        return f"GfField(m={self.m}, prim_poly={self.prim_poly:#x})"

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def div(self, a: int, b: int) -> int:
        if b == 0:
            raise ZeroDivisionError("division by zero in GF(2^m)")
        if a == 0:
            return 0
        return int(self.exp[(self.log[a] - self.log[b]) % (self.q - 1)])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse in GF(2^m)")
        return int(self.exp[(self.q - 1 - self.log[a]) % (self.q - 1)])

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 1 if e == 0 else 0
        return int(self.exp[(self.log[a] * e) % (self.q - 1)])

    def alpha_pow(self, e: int) -> int:
        return int(self.exp[e % (self.q - 1)])

    def mul_vec(self, a, b) -> np.ndarray:
        """Elementwise product of two integer arrays (broadcasting)."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.exp[(self.log[a] + self.log[b]) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, out)

    def inv_vec(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("zero has no inverse in GF(2^m)")
        return self.exp[(self.q - 1 - self.log[a]) % (self.q - 1)]


@lru_cache(maxsize=None)
def gf(m: int) -> GfField:
    """Shared field instance with the default primitive polynomial."""
    return GfField(m)


def gf_add(a: int, b: int) -> int:
    return a ^ b


def gf_mul(field: GfField, a: int, b: int) -> int:
    return field.mul(a, b)


def gf_inv(field: GfField, a: int) -> int:
    return field.inv(a)
