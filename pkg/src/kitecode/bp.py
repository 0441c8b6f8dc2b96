"""Flooding sum-product decoding on the Kite normal graph."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kite import ParityRealization

LLR_CLAMP = 30.0
# smallest message magnitude entering the log-tanh transform
_MIN_MAG = 1e-12


@dataclass
class DecodeOutcome:
    success: bool
    iterations: int
    hard_bits: np.ndarray
    posterior_llrs: np.ndarray


def init_llr(y, sigma2: float) -> np.ndarray:
    """Channel LLRs log P(c=0|y)/P(c=1|y) = 2y/sigma^2 for BPSK x = 1 - 2c."""
    if not sigma2 > 0:
        raise ValueError(f"noise variance must be positive, got {sigma2}")
    return 2.0 * np.asarray(y, dtype=np.float64) / sigma2


def _logtanh_half(x: np.ndarray) -> np.ndarray:
    # Gallager's transform -log tanh(x/2); an involution on x > 0
    x = np.clip(x, _MIN_MAG, None)
    return -np.log(np.tanh(0.5 * x))


class SumProductDecoder:
    """Reusable decoder for one parity realization (edge tables built once)."""

    def __init__(self, H: ParityRealization):
        chk, var = H.edges()
        self.k = H.k
        self.chk = chk
        self.var = var
        self.n = H.n
        self.m = H.r
        self.starts = np.searchsorted(chk, np.arange(self.m)) if self.m else np.zeros(0, dtype=np.int64)

    def prefix(self, n: int) -> "SumProductDecoder":
        """Decoder of the prefix code of length n, sharing this decoder's edge arrays."""
        r = n - self.k
        if not 0 <= r <= self.m:
            raise ValueError(f"prefix length {n} outside [{self.k}, {self.n}]")
        sub = object.__new__(SumProductDecoder)
        n_edges = int(self.starts[r]) if r < self.m else self.chk.size
        sub.k = self.k
        sub.chk = self.chk[:n_edges]
        sub.var = self.var[:n_edges]
        sub.n = n
        sub.m = r
        sub.starts = self.starts[:r]
        return sub

    def _check_sums(self, values: np.ndarray) -> np.ndarray:
        return np.add.reduceat(values, self.starts)

    def syndrome_ok(self, hard: np.ndarray) -> bool:
        if self.m == 0:
            return True
        par = np.bincount(self.chk, weights=hard[self.var], minlength=self.m)
        return not np.any(par.astype(np.int64) & 1)

    def decode(self, llr, max_iter: int = 50, known=None, early_stop: bool = True) -> DecodeOutcome:
        """Run at most ``max_iter`` flooding iterations.

        ``known`` is an optional pair ``(mask, bits)``; masked positions are
        pinned to ``bits`` and their outgoing messages held at the clamp.
        With ``early_stop`` the decoder returns at the first iteration whose
        hard decision satisfies every check.
        """
        llr = np.asarray(llr, dtype=np.float64)
        if llr.shape != (self.n,):
            raise ValueError(f"LLR frame length {llr.shape} does not match n = {self.n}")
        ch = np.clip(llr, -LLR_CLAMP, LLR_CLAMP)
        pin_mask = None
        if known is not None:
            mask, bits = known
            pin_mask = np.asarray(mask, dtype=bool)
            if pin_mask.shape != (self.n,):
                raise ValueError("known-bit mask must have length n")
            pin_val = LLR_CLAMP * (1.0 - 2.0 * np.asarray(bits, dtype=np.float64))
            ch = np.where(pin_mask, pin_val, ch)
        hard = (ch < 0).astype(np.uint8)
        chk, var = self.chk, self.var
        if self.m == 0:
            return DecodeOutcome(True, 0, hard, ch.copy())
        c2v = np.zeros(chk.size)
        post = ch.copy()
        success = False
        it = 0
        for it in range(1, max_iter + 1):
            v2c = post[var] - c2v
            if pin_mask is not None:
                v2c = np.where(pin_mask[var], ch[var], v2c)
            np.clip(v2c, -LLR_CLAMP, LLR_CLAMP, out=v2c)
            mag = _logtanh_half(np.abs(v2c))
            neg = (v2c < 0).astype(np.int64)
            tot_mag = self._check_sums(mag)
            tot_neg = np.add.reduceat(neg, self.starts)
            ext = np.maximum(tot_mag[chk] - mag, 0.0)
            sign = 1.0 - 2.0 * ((tot_neg[chk] - neg) & 1)
            c2v = sign * np.minimum(_logtanh_half(ext), LLR_CLAMP)
            post = ch + np.bincount(var, weights=c2v, minlength=self.n)
            if pin_mask is not None:
                post = np.where(pin_mask, ch, post)
            hard = (post < 0).astype(np.uint8)
            if self.syndrome_ok(hard):
                success = True
                if early_stop:
                    break
            else:
                success = False
        return DecodeOutcome(success, it, hard, post)


def sp_decode(H: ParityRealization, llr, J: int = 50, known=None, early_stop: bool = True) -> DecodeOutcome:
    return SumProductDecoder(H).decode(llr, J, known, early_stop)
