"""Gaussian-approximation density evolution for Kite code ensembles.

Messages are tracked by their means under the symmetric-Gaussian
assumption. Node degrees are w.r.t. H_v only: A nodes are information bits
(degree = number of checks touching them), C nodes are checks (left degree =
number of information bits they involve), B nodes are parity bits on the
deterministic accumulator chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator
from scipy.special import log_ndtr
from scipy.stats import binom

from .kite import PSequence, rows_per_window

MASS_CUTOFF = 1e-15

# ---------------------------------------------------------------------------
# phi(x) = E[tanh(Y/2)], Y ~ N(x, 2x)

PHI_XMIN = 1e-8
PHI_XMAX = 1e4
PHI_KNOTS = 4096


def _phi_small_quad(x: float) -> float:
    sd = math.sqrt(2.0 * x)
    f = lambda y: math.tanh(0.5 * y) * math.exp(-((y - x) ** 2) / (4.0 * x)) / math.sqrt(4.0 * math.pi * x)
    lo, hi = x - 40.0 * sd, x + 40.0 * sd
    val, _ = integrate.quad(f, lo, hi, points=[0.0, x] if lo < 0.0 < hi else [x], epsabs=1e-15, epsrel=1e-13, limit=400)
    return val


def _log_one_minus_phi_quad(x: float) -> float:
    """log(1 - phi(x)) via 1 - tanh(y/2) = 2 / (1 + e^y), integrated around its peak."""
    sd = math.sqrt(2.0 * x)

    def logf(y):
        return math.log(2.0) - np.logaddexp(0.0, y) - (y - x) ** 2 / (4.0 * x) - 0.5 * math.log(4.0 * math.pi * x)

    # peak of the log-integrand: -sigmoid(y) - (y - x)/(2x) = 0, bracketed in [-x, x]
    a, b = -x - 1.0, x
    for _ in range(200):
        mid = 0.5 * (a + b)
        g = -1.0 / (1.0 + math.exp(-mid)) - (mid - x) / (2.0 * x)
        if g > 0:
            a = mid
        else:
            b = mid
    peak = 0.5 * (a + b)
    top = logf(peak)
    f = lambda y: math.exp(logf(y) - top)
    lo, hi = peak - 40.0 * sd, peak + 40.0 * sd
    pts = sorted({peak, 0.0} if lo < 0.0 < hi else {peak})
    val, _ = integrate.quad(f, lo, hi, points=pts, epsabs=0.0, epsrel=1e-13, limit=400)
    return top + math.log(val)


def phi_quad(x: float) -> float:
    """phi(x) by direct adaptive quadrature (reference, slow)."""
    if x < 0:
        raise ValueError("phi is defined for nonnegative means")
    if x == 0:
        return 0.0
    if x < 1.0:
        return _phi_small_quad(x)
    return -math.expm1(_log_one_minus_phi_quad(x))


def log_phi_quad(x: float) -> float:
    """log phi(x) by quadrature, accurate when phi is close to 1."""
    if x == 0:
        return -math.inf
    if x < 1.0:
        return math.log(_phi_small_quad(x))
    return math.log1p(-math.exp(_log_one_minus_phi_quad(x)))


class PhiTable:
    """Monotone cubic table of g(log x) = log(-log phi(x)) and its inverse."""

    def __init__(self, knots: int = PHI_KNOTS):
        lx = np.linspace(math.log(PHI_XMIN), math.log(PHI_XMAX), knots)
        g = np.empty(knots)
        for i, v in enumerate(lx):
            x = math.exp(v)
            if x < 1.0:
                g[i] = math.log(-math.log(_phi_small_quad(x)))
            else:
                # -log phi = -log1p(-(1-phi)); for tiny 1-phi this is 1-phi itself
                lom = _log_one_minus_phi_quad(x)
                g[i] = math.log(-math.log1p(-math.exp(lom))) if lom > -30 else lom + math.log1p(0.5 * math.exp(lom))
        self.lx = lx
        self.g = g
        self.fwd = PchipInterpolator(lx, g)
        self.dfwd = self.fwd.derivative()
        self.inv = PchipInterpolator(g[::-1], lx[::-1])
        self.g_lo = g[-1]  # at XMAX
        self.g_hi = g[0]  # at XMIN

    def log_phi(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        out = np.full(x.shape, -np.inf)
        pos = x > 0
        xs = x[pos]
        small = xs < PHI_XMIN
        res = np.empty(xs.shape)
        res[small] = np.log(0.5 * xs[small])
        lx = np.log(np.minimum(xs[~small], PHI_XMAX))
        res[~small] = -np.exp(self.fwd(lx))
        out[pos] = res
        return out

    def phi(self, x) -> np.ndarray:
        return np.exp(self.log_phi(x))

    def one_minus_phi(self, x) -> np.ndarray:
        return -np.expm1(self.log_phi(x))

    def inv_log(self, lv) -> np.ndarray:
        """x with log phi(x) = lv (lv <= 0)."""
        lv = np.asarray(lv, dtype=np.float64)
        out = np.zeros(lv.shape)
        with np.errstate(divide="ignore"):
            u = np.log(-lv)
        top = u <= self.g_lo
        out[top] = PHI_XMAX
        low = (u >= self.g_hi) & np.isfinite(lv)
        out[low] = 2.0 * np.exp(lv[low])
        mid = ~top & ~low & np.isfinite(lv)
        if np.any(mid):
            um = u[mid]
            t = self.inv(um)
            for _ in range(3):
                t = t - (self.fwd(t) - um) / self.dfwd(t)
                t = np.clip(t, self.lx[0], self.lx[-1])
            out[mid] = np.exp(t)
        return out


@lru_cache(maxsize=1)
def phi_table() -> PhiTable:
    return PhiTable()


def phi(x):
    """phi(x) with phi(0) = 0 (table-backed)."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0):
        raise ValueError("phi is defined for nonnegative means")
    res = phi_table().phi(x)
    return float(res) if res.ndim == 0 else res


def phi_inv(y):
    y = np.asarray(y, dtype=np.float64)
    if np.any(y < 0) or np.any(y >= 1):
        raise ValueError("phi_inv needs 0 <= y < 1")
    with np.errstate(divide="ignore"):
        res = phi_table().inv_log(np.log(y))
    return float(res) if res.ndim == 0 else res


# ---------------------------------------------------------------------------
# degree distributions


@dataclass
class NodeDegreeDists:
    Lambda: np.ndarray  # A-node degrees 0..r
    R: np.ndarray  # C-node left degrees 0..k
    k: int
    r: int


@dataclass
class EdgeDegreeDists:
    lam: np.ndarray  # index i -> lambda_i (index 0 unused, zero)
    rho: np.ndarray


def _binom_pmf(n: int, q: float) -> np.ndarray:
    pmf = np.exp(binom.logpmf(np.arange(n + 1), n, q))
    return pmf / pmf.sum()


def binomial_node_dists(q: float, rows: int, k: int) -> NodeDegreeDists:
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    return NodeDegreeDists(_binom_pmf(rows, q), _binom_pmf(k, q), k, rows)


def combine_dists(upper: NodeDegreeDists, q: float, delta: int) -> NodeDegreeDists:
    """Append ``delta`` rows drawn with parameter q: convolve Lambda, mix R by row count."""
    if delta == 0:
        return upper
    if delta < 0:
        raise ValueError("number of added rows must be nonnegative")
    add = binomial_node_dists(q, delta, upper.k)
    lam = np.convolve(upper.Lambda, add.Lambda)
    r_new = upper.r + delta
    R = (upper.r * upper.R + delta * add.R) / r_new
    lam /= lam.sum()
    R /= R.sum()
    return NodeDegreeDists(lam, R, upper.k, r_new)


def edges_from_nodes(nd: NodeDegreeDists) -> EdgeDegreeDists:
    i = np.arange(nd.Lambda.size)
    j = np.arange(nd.R.size)
    ml = float(np.dot(i, nd.Lambda))
    mr = float(np.dot(j, nd.R))
    if ml <= 0 or mr <= 0:
        raise ValueError("degree distribution has zero mean")
    return EdgeDegreeDists(i * nd.Lambda / ml, j * nd.R / mr)


def rate_rows(k: int, window: int) -> int:
    """Parity rows r = floor(k / (window/10)) - k of the rate-window/10 prefix code."""
    return (10 * k) // window - k


def node_dists_for_rate(k: int, pseq: PSequence, window: int) -> NodeDegreeDists:
    """Distributions of H_v for the prefix code of rate window/10.

    Rows are attributed to q-windows exactly as the encoder assigns them.
    """
    r = rate_rows(k, window)
    counts = rows_per_window(k, r)
    nd = None
    for w in range(9, window - 1, -1):
        c = counts[w]
        if c == 0:
            continue
        q = pseq.q_of(w)
        nd = binomial_node_dists(q, c, k) if nd is None else combine_dists(nd, q, c)
    return nd


# ---------------------------------------------------------------------------
# Gaussian-approximation iteration


def _support(p: np.ndarray, start: int) -> np.ndarray:
    idx = np.nonzero(p > MASS_CUTOFF)[0]
    return idx[idx >= start]


def log_q(x):
    return log_ndtr(-np.asarray(x, dtype=np.float64))


@dataclass
class DeResult:
    eps: float
    iterations: int
    converged: bool  # reached eps <= T_b
    history: list


def de_ga_run(
    nd: NodeDegreeDists,
    ed: EdgeDegreeDists,
    sigma2: float,
    T_b: float = 1e-4,
    delta_b: float = 1e-10,
    max_iters: int = 50,
    keep_history: bool = False,
) -> DeResult:
    tab = phi_table()
    mu0 = 2.0 / sigma2
    i_lam = _support(ed.lam, 1)
    lam_w = ed.lam[i_lam]
    j_rho = _support(ed.rho, 1)
    rho_w = ed.rho[j_rho]
    j_R = _support(nd.R, 0)
    R_w = nd.R[j_R]
    i_Lam = _support(nd.Lambda, 0)
    Lam_w = nd.Lambda[i_Lam]

    eps = math.exp(float(log_q(math.sqrt(mu0 / 2.0))))
    mu_ca = 0.0
    mu_cb = 0.0
    hist = []
    it = 0
    while True:
        it += 1
        mu_ac = mu0 + (i_lam - 1) * mu_ca
        mu_bc = mu0 + mu_cb
        # log of sum_i lambda_i phi(mu_ac_i), kept accurate near 1
        one_minus = float(np.dot(lam_w, tab.one_minus_phi(mu_ac)))
        log_s = math.log1p(-one_minus) if one_minus < 1.0 else -math.inf
        lphi_bc = float(tab.log_phi(np.array([mu_bc]))[0])
        arg_a = 2.0 * lphi_bc + (j_rho - 1) * log_s
        mu_ca_j = tab.inv_log(arg_a)
        arg_b = lphi_bc + j_R * log_s
        mu_cb_j = tab.inv_log(arg_b)
        mu_ca = float(np.dot(rho_w, mu_ca_j))
        mu_cb = float(np.dot(R_w, mu_cb_j))
        mu_i = mu0 + i_Lam * mu_ca
        eps_new = float(np.dot(Lam_w, np.exp(log_q(np.sqrt(mu_i / 2.0)))))
        if keep_history:
            hist.append(eps_new)
        if eps_new <= T_b:
            return DeResult(eps_new, it, True, hist)
        if abs(eps - eps_new) <= delta_b or it >= max_iters:
            return DeResult(eps_new, it, False, hist)
        eps = eps_new


def snr_to_sigma2(snr_db: float) -> float:
    return 10.0 ** (-snr_db / 10.0)


def de_threshold(
    nd: NodeDegreeDists,
    ed: EdgeDegreeDists | None = None,
    T_b: float = 1e-4,
    lo: float = -10.0,
    hi: float = 12.0,
    resolution: float = 0.01,
    **kw,
) -> float:
    """Smallest SNR (dB, 10 log10(1/sigma^2)) at which the iteration reaches T_b."""
    if ed is None:
        ed = edges_from_nodes(nd)
    ok = lambda snr: de_ga_run(nd, ed, snr_to_sigma2(snr), T_b, **kw).converged
    if not ok(hi):
        return math.inf
    if ok(lo):
        return lo
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def rate_threshold(k: int, pseq: PSequence, window: int, T_b: float = 1e-4, **kw) -> float:
    nd = node_dists_for_rate(k, pseq, window)
    return de_threshold(nd, edges_from_nodes(nd), T_b, **kw)
