"""Systematic Reed-Solomon codes with Berlekamp-Massey decoding.

Codewords are sequences of ``N`` symbols with position ``i`` carrying the
coefficient of ``x^(N-1-i)``: the message occupies the first ``K`` positions
and the parity the last ``N-K``. Codes with ``N < 2^m - 1`` are shortened
codes (virtual leading zeros).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .galois import GfField, gf


class RsDecodeFailure(Exception):
    """Raised by :meth:`RsCode.decode_or_raise` when BM decoding fails."""


@dataclass(frozen=True)
class DecodeResult:
    success: bool
    codeword: np.ndarray | None = None
    n_errors: int = 0

    @property
    def failure(self) -> bool:
        return not self.success


def _poly_mul(fld: GfField, a: list[int], b: list[int]) -> list[int]:
    # coefficient lists, lowest degree first
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            if bj:
                out[i + j] ^= fld.mul(ai, bj)
    return out


def _poly_eval(fld: GfField, p: list[int], x: int) -> int:
    # lowest degree first, Horner from the top
    acc = 0
    for c in reversed(p):
        acc = fld.mul(acc, x) ^ c
    return acc


@dataclass(frozen=True)
class RsCode:
    """Narrow-sense RS[N, K] code over GF(2^m); generator roots alpha^1..alpha^(N-K)."""

    m: int
    N: int
    K: int
    field: GfField = dc_field(init=False, repr=False, compare=False)
    gen_poly: tuple = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self):
        fld = gf(self.m)
        if not 0 < self.K < self.N <= fld.q - 1:
            raise ValueError(f"invalid RS parameters N={self.N}, K={self.K} for m={self.m}")
        g = [1]
        for i in range(1, self.N - self.K + 1):
            g = _poly_mul(fld, g, [fld.alpha_pow(i), 1])
        object.__setattr__(self, "field", fld)
        object.__setattr__(self, "gen_poly", tuple(g))  # lowest degree first

    @property
    def q(self) -> int:
        return 1 << self.m

    @property
    def n_parity(self) -> int:
        return self.N - self.K

    @property
    def t_max(self) -> int:
        return (self.N - self.K) // 2

    @property
    def d_min(self) -> int:
        return self.N - self.K + 1

    def encode(self, msg) -> np.ndarray:
        msg = np.asarray(msg, dtype=np.int64)
        if msg.shape != (self.K,):
            raise ValueError(f"message must have {self.K} symbols, got shape {msg.shape}")
        if np.any((msg < 0) | (msg >= self.q)):
            raise ValueError("message symbols out of field range")
        fld = self.field
        r = self.n_parity
        # generator highest degree first, monic; skip the leading 1
        g_hi = list(reversed(self.gen_poly))[1:]
        rem = [0] * r
        for sym in msg.tolist():
            fb = sym ^ rem[0]
            rem = rem[1:] + [0]
            if fb:
                for i, gc in enumerate(g_hi):
                    if gc:
                        rem[i] ^= fld.mul(fb, gc)
        return np.concatenate([msg, np.asarray(rem, dtype=np.int64)])

    def syndromes(self, rcv) -> list[int]:
        """S_j = r(alpha^j) for j = 1..N-K."""
        fld = self.field
        rcv = np.asarray(rcv, dtype=np.int64)
        nz = np.nonzero(rcv)[0]
        if nz.size == 0:
            return [0] * self.n_parity
        logs = fld.log[rcv[nz]]
        degs = self.N - 1 - nz
        j = np.arange(1, self.n_parity + 1)[:, None]
        terms = fld.exp[(logs[None, :] + j * degs[None, :]) % (fld.q - 1)]
        return np.bitwise_xor.reduce(terms, axis=1).tolist()

    def is_codeword(self, word) -> bool:
        return not any(self.syndromes(word))

    def decode(self, rcv) -> DecodeResult:
        """Bounded-distance BM decoding with Chien search and Forney values.

        Returns a failed result when the error locator is inconsistent with
        its roots; never returns a word outside radius ``t_max``.
        """
        rcv = np.asarray(rcv, dtype=np.int64)
        if rcv.shape != (self.N,):
            raise ValueError(f"received word must have {self.N} symbols, got shape {rcv.shape}")
        if np.any((rcv < 0) | (rcv >= self.q)):
            raise ValueError("received symbols out of field range")
        synd = self.syndromes(rcv)
        if not any(synd):
            return DecodeResult(True, rcv.copy(), 0)
        fld = self.field
        locator, n_err = self._berlekamp_massey(synd)
        if n_err > self.t_max or n_err == 0 or len(locator) - 1 != n_err:
            return DecodeResult(False)
        positions = self._chien(locator)
        if len(positions) != n_err:
            return DecodeResult(False)
        # Omega = S(x) Lambda(x) mod x^(N-K)
        omega = _poly_mul(fld, synd, locator)[: self.n_parity]
        # formal derivative: odd-degree terms only in characteristic 2
        dlam = [locator[i] if i % 2 == 1 else 0 for i in range(1, len(locator))]
        out = rcv.copy()
        for pos in positions:
            deg = self.N - 1 - pos
            x_inv = fld.alpha_pow(-deg)
            den = _poly_eval(fld, dlam, x_inv)
            if den == 0:
                return DecodeResult(False)
            out[pos] ^= fld.div(_poly_eval(fld, omega, x_inv), den)
        if any(self.syndromes(out)):
            return DecodeResult(False)
        return DecodeResult(True, out, n_err)

    def decode_or_raise(self, rcv) -> np.ndarray:
        res = self.decode(rcv)
        if not res.success:
            raise RsDecodeFailure("uncorrectable word")
        return res.codeword

    def _berlekamp_massey(self, synd: list[int]) -> tuple[list[int], int]:
        fld = self.field
        C = [1]
        B = [1]
        L = 0
        shift = 1
        b = 1
        for n, s_n in enumerate(synd):
            d = s_n
            for i in range(1, L + 1):
                if i < len(C) and C[i]:
                    d ^= fld.mul(C[i], synd[n - i])
            if d == 0:
                shift += 1
                continue
            coef = fld.div(d, b)
            upd = [0] * shift + [fld.mul(coef, x) for x in B]
            T = list(C)
            if len(upd) > len(C):
                C = C + [0] * (len(upd) - len(C))
            for i, u in enumerate(upd):
                C[i] ^= u
            if 2 * L <= n:
                L = n + 1 - L
                B = T
                b = d
                shift = 1
            else:
                shift += 1
        while len(C) > 1 and C[-1] == 0:
            C.pop()
        return C, L

    def _chien(self, locator: list[int]) -> list[int]:
        """Positions i (0-based, highest degree first) with Lambda(alpha^-(N-1-i)) = 0."""
        fld = self.field
        degs = np.arange(self.N - 1, -1, -1)  # degree for position 0..N-1
        acc = np.zeros(self.N, dtype=np.int64)
        for k, lk in enumerate(locator):
            if lk == 0:
                continue
            acc ^= fld.exp[(fld.log[lk] - k * degs) % (fld.q - 1)]
        return np.nonzero(acc == 0)[0].tolist()


@dataclass(frozen=True)
class GrsScrambler:
    """Per-position nonzero multipliers turning an RS code into a generalized RS code."""

    m: int
    multipliers: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        mult = np.asarray(self.multipliers, dtype=np.int64)
        if np.any(mult <= 0) or np.any(mult >= (1 << self.m)):
            raise ValueError("scrambler multipliers must be nonzero field elements")
        mult.setflags(write=False)
        object.__setattr__(self, "multipliers", mult)

    @classmethod
    def from_seed(cls, m: int, length: int, seed: int) -> "GrsScrambler":
        from .prng import uniform_ints

        mult = 1 + uniform_ints(seed, 0, length, (1 << m) - 1)
        return cls(m, mult, seed)

    @classmethod
    def identity(cls, m: int, length: int) -> "GrsScrambler":
        return cls(m, np.ones(length, dtype=np.int64))

    def scramble(self, cw) -> np.ndarray:
        cw = np.asarray(cw, dtype=np.int64)
        if cw.shape[-1] != self.multipliers.shape[0]:
            raise ValueError("codeword length does not match scrambler length")
        return gf(self.m).mul_vec(cw, self.multipliers)

    def descramble(self, cw) -> np.ndarray:
        cw = np.asarray(cw, dtype=np.int64)
        if cw.shape[-1] != self.multipliers.shape[0]:
            raise ValueError("codeword length does not match scrambler length")
        fld = gf(self.m)
        return fld.mul_vec(cw, fld.inv_vec(self.multipliers))


def rs_encode(msg, code: RsCode) -> np.ndarray:
    return code.encode(msg)


def bm_decode(rcv, code: RsCode) -> DecodeResult:
    return code.decode(rcv)


def grs_scramble(cw, s: GrsScrambler) -> np.ndarray:
    return s.scramble(cw)


def grs_descramble(cw, s: GrsScrambler) -> np.ndarray:
    return s.descramble(cw)
