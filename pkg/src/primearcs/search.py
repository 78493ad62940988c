"""Enumeration of prime triples satisfying the target inequality.

find_solutions walks (p1, p2) pairs and inverts for the third variable,
testing only the handful of integers whose k-th power can land within the
threshold; brute_force_solutions is the exhaustive triple loop used as
the completeness oracle.  Residuals are evaluated in double-double
arithmetic so near-threshold classifications are stable.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .circle import ProblemInstance, eta_exponent
from .errors import ValidationError
from .numutil import powk_extended
from .primes import PrimeTable

_GUARD = 1  # extra integers tested on each side of the root interval


@dataclass(frozen=True)
class SolutionRecord:
    p1: int
    p2: int
    p3: int
    residual: float
    within_admissible_width: bool = False


@dataclass(frozen=True)
class SearchReport:
    X: float
    threshold: float
    count: int
    records: tuple[SolutionRecord, ...]
    truncated: bool = False
    elapsed: float = 0.0
    diagnostics: str = ""


def _window_bounds(inst: ProblemInstance, X: float,
                   window: str) -> tuple[float, float]:
    if window == "delta":
        return inst.delta * X, X
    if window == "dyadic":
        return X, 2.0 * X
    raise ValidationError(f"unknown window {window!r}")


def _residual_arrays(l1: float, p1: float, l2: float, p2sq: np.ndarray,
                     l3: float, nk_hi: np.ndarray, nk_lo: np.ndarray,
                     varpi: float) -> np.ndarray:
    """lambda1 p1 + lambda2 p2^2 + lambda3 n^k + varpi in double-double."""
    def tsum(a, b):
        s = a + b
        v = s - a
        return s, (a - (s - v)) + (b - v)

    def tprod(a, b):
        p = a * b
        sa = 134217729.0 * a
        ahi = sa - (sa - a)
        alo = a - ahi
        sb = 134217729.0 * b
        bhi = sb - (sb - b)
        blo = b - bhi
        return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo

    s, e = tprod(l2, p2sq)
    t, te = tprod(np.full_like(p2sq, l3), nk_hi)
    te = te + l3 * nk_lo
    hi, lo = tsum(s, t)
    lo = lo + e + te
    c = l1 * p1 + varpi  # exact to 0.5 ulp; p1, varpi small against 2^53
    hi2, lo2 = tsum(hi, c)
    return hi2 + (lo + lo2)


def residual(inst: ProblemInstance, p1: int, p2: int, p3: int) -> float:
    """Double-double residual of one triple."""
    nk = powk_extended(np.asarray([p3]), inst.k)
    nk_hi = nk.astype(np.float64)
    nk_lo = (nk - nk_hi.astype(np.longdouble)).astype(np.float64)
    out = _residual_arrays(inst.lambda1, float(p1), inst.lambda2,
                           np.asarray([float(p2) ** 2]), inst.lambda3,
                           nk_hi, nk_lo, inst.varpi)
    return float(out[0])


def admissible_threshold(inst: ProblemInstance, X: float) -> float:
    """X^(-(33-29k)/(72k) + eps): the admissible width at the window top.

    Using X rather than max_j p_j gives the smallest (hardest) width a
    solution in the window must meet.
    """
    return X ** eta_exponent(inst.k, inst.eps)


def find_solutions(inst: ProblemInstance, table: PrimeTable, X: float,
                   threshold: float, cap: int = 1 << 20,
                   window: str = "delta") -> SearchReport:
    """Complete enumeration of triples with |residual| <= threshold.

    p1 runs over primes with p1 in the window, p2 over primes with p2^2
    in it; the third variable is solved for and only integers whose k-th
    power can reach the threshold band are tested for primality.  Ties at
    the threshold count as solutions.
    """
    if threshold < 0:
        raise ValidationError("threshold must be nonnegative")
    t0 = time.perf_counter()
    lo, hi = _window_bounds(inst, X, window)
    k = inst.k
    l1, l2, l3, varpi = inst.lambda1, inst.lambda2, inst.lambda3, inst.varpi
    if hi > table.limit:
        raise ValidationError(
            f"table limit {table.limit} below window top {hi:.0f}")
    p1s = table.primes_in_range(max(2.0, lo), hi)
    p2s = table.primes_in_range(max(2.0, math.sqrt(lo)), math.sqrt(hi))
    p3_min = max(2.0, lo ** (1.0 / k))
    p3_max = hi ** (1.0 / k) + 1
    if len(p1s) == 0 or len(p2s) == 0 or p3_min > p3_max:
        return SearchReport(X, threshold, 0, (), elapsed=time.perf_counter() - t0,
                            diagnostics="empty variable window")
    p2sq = p2s.astype(np.float64) ** 2
    band = threshold / abs(l3)
    prime_set_limit = float(table.limit)
    records: list[SolutionRecord] = []
    count = 0
    truncated = False
    thr_exp = eta_exponent(k, inst.eps)
    for p1 in p1s.tolist():
        t = (-l1 * p1 - varpi - l2 * p2sq) / l3
        tk_lo = np.maximum(t - band, lo)
        tk_hi = np.minimum(t + band, hi)
        ok = tk_lo <= tk_hi
        if not np.any(ok):
            continue
        idx = np.nonzero(ok)[0]
        n_lo = np.ceil(tk_lo[idx] ** (1.0 / k)).astype(np.int64) - _GUARD
        n_hi = np.floor(tk_hi[idx] ** (1.0 / k)).astype(np.int64) + _GUARD
        n_lo = np.maximum(n_lo, 2)
        width = int(np.max(n_hi - n_lo)) if len(idx) else -1
        for off in range(width + 1):
            n = n_lo + off
            live = n <= n_hi
            if not np.any(live):
                continue
            sel = idx[live]
            ns = n[live]
            nk = powk_extended(ns, k)
            nk_hi_f = nk.astype(np.float64)
            nk_lo_f = (nk - nk_hi_f.astype(np.longdouble)).astype(np.float64)
            in_window = (nk >= lo) & (nk <= hi)
            res = _residual_arrays(l1, float(p1), l2, p2sq[sel], l3,
                                   nk_hi_f, nk_lo_f, varpi)
            good = in_window & (np.abs(res) <= threshold)
            for j in np.nonzero(good)[0]:
                p3 = int(ns[j])
                if p3 <= prime_set_limit:
                    if not _table_is_prime(table, p3):
                        continue
                else:
                    from .primes import is_prime
                    if not is_prime(p3):
                        continue
                count += 1
                if len(records) < cap:
                    mx = max(p1, int(p2s[sel[j]]), p3)
                    records.append(SolutionRecord(
                        p1, int(p2s[sel[j]]), p3, float(res[j]),
                        bool(abs(res[j]) <= mx ** thr_exp)))
                else:
                    truncated = True
    records.sort(key=lambda r: (r.p1, r.p2, r.p3))
    return SearchReport(X, threshold, count, tuple(records), truncated,
                        time.perf_counter() - t0)


def _table_is_prime(table: PrimeTable, n: int) -> bool:
    i = int(np.searchsorted(table.primes, n))
    return i < len(table.primes) and int(table.primes[i]) == n


def brute_force_solutions(inst: ProblemInstance, table: PrimeTable, X: float,
                          threshold: float,
                          window: str = "delta") -> SearchReport:
    """Exhaustive triple loop; the completeness oracle for find_solutions."""
    if X > 10**4:
        raise ValidationError("brute force is guarded to X <= 10^4")
    t0 = time.perf_counter()
    lo, hi = _window_bounds(inst, X, window)
    k = inst.k
    p1s = table.primes_in_range(max(2.0, lo), hi)
    p2s = table.primes_in_range(max(2.0, math.sqrt(lo)), math.sqrt(hi))
    p3s_all = table.primes_in_range(2.0, hi ** (1.0 / k) + 2)
    p3k = powk_extended(p3s_all, k)
    inside = (p3k >= lo) & (p3k <= hi)
    p3s = p3s_all[np.asarray(inside)]
    p3k = p3k[inside]
    nk_hi_f = p3k.astype(np.float64)
    nk_lo_f = (p3k - nk_hi_f.astype(np.longdouble)).astype(np.float64)
    records = []
    for p1 in p1s.tolist():
        for j2, p2 in enumerate(p2s.tolist()):
            p2sq = np.full(len(p3s), float(p2) ** 2)
            res = _residual_arrays(inst.lambda1, float(p1), inst.lambda2,
                                   p2sq, inst.lambda3, nk_hi_f, nk_lo_f,
                                   inst.varpi)
            good = np.abs(res) <= threshold
            for j in np.nonzero(good)[0]:
                records.append(SolutionRecord(p1, p2, int(p3s[j]),
                                              float(res[j])))
    records.sort(key=lambda r: (r.p1, r.p2, r.p3))
    return SearchReport(X, threshold, len(records), tuple(records),
                        elapsed=time.perf_counter() - t0)


def weighted_solution_sum(inst: ProblemInstance, table: PrimeTable, X: float,
                          eta: float, window: str = "delta") -> float:
    """sum over triples of log p1 log p2 log p3 * max(0, eta - |residual|).

    This is the exact value the counting integral converges to as its
    truncation grows; the enumeration side of that identity.
    """
    rep = find_solutions(inst, table, X, eta, cap=1 << 24, window=window)
    total = 0.0
    for r in rep.records:
        total += (math.log(r.p1) * math.log(r.p2) * math.log(r.p3)
                  * max(0.0, eta - abs(r.residual)))
    return total


def count_bound_report(inst: ProblemInstance, table: PrimeTable, X: float,
                       eta: float, window: str = "delta") -> dict:
    """Both sides of the weighted-count majorization, reported not asserted.

    lhs: the weighted solution sum (the value of the full counting
    integral); rhs: eta (log X)^3 N(X) with N(X) the plain solution count
    at width eta.
    """
    rep = find_solutions(inst, table, X, eta, cap=1 << 24, window=window)
    lhs = 0.0
    for r in rep.records:
        lhs += (math.log(r.p1) * math.log(r.p2) * math.log(r.p3)
                * max(0.0, eta - abs(r.residual)))
    rhs = eta * math.log(X) ** 3 * rep.count
    return {"weighted_sum": lhs, "majorant": rhs, "count": rep.count}
