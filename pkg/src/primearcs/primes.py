"""Segmented prime sieving and exact Chebyshev-function evaluation.

A PrimeTable is an immutable sieve product: the ascending primes up to a
limit together with the compensated prefix sums of log p, so that
theta(x) = sum_{p <= x} log p is a binary search plus one lookup and
psi(x) = sum_m theta(x^(1/m)) follows by exact integer roots.
"""

from __future__ import annotations

import io
import math
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ResourceLimitError, TableIntegrityError, ValidationError
from .numutil import compensated_cumsum

DEFAULT_SEGMENT = 1 << 20

# Deterministic Miller-Rabin witness set, valid for every n < 3.3e24
# (covers the full 64-bit range).
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic primality for 0 <= n < 2^64 (and a fair way beyond)."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _small_primes(limit: int) -> np.ndarray:
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.nonzero(sieve)[0].astype(np.int64)


@dataclass(frozen=True)
class PrimeTable:
    """Immutable sieve output; safe for concurrent readers."""

    limit: int
    primes: np.ndarray          # int64, strictly increasing
    theta_prefix: np.ndarray    # float64, theta_prefix[i] = sum_{j<=i} log p_j

    def __post_init__(self):
        if len(self.primes) != len(self.theta_prefix):
            raise ValidationError("primes/theta_prefix length mismatch")

    @property
    def count(self) -> int:
        return len(self.primes)

    def theta(self, x: float) -> float:
        """theta(x) = sum_{p <= x} log p, exact via prefix lookup."""
        if x < 0 or x > self.limit:
            raise ValidationError(f"theta: x={x} outside [0, {self.limit}]")
        idx = int(np.searchsorted(self.primes, math.floor(x), side="right"))
        return 0.0 if idx == 0 else float(self.theta_prefix[idx - 1])

    def theta_many(self, x: np.ndarray) -> np.ndarray:
        """Vectorized theta for float arrays within [0, limit]."""
        xi = np.floor(np.asarray(x, dtype=np.float64))
        idx = np.searchsorted(self.primes, xi, side="right")
        pref = np.concatenate(([0.0], self.theta_prefix))
        return pref[idx]

    def psi(self, x: float) -> float:
        """psi(x) = sum_{m >= 1} theta(x^(1/m)), stopping once x^(1/m) < 2.

        Roots are taken as exact integer m-th roots of floor(x), so prime
        powers sitting exactly at x are never lost to float rounding.
        """
        if x < 0 or x > self.limit:
            raise ValidationError(f"psi: x={x} outside [0, {self.limit}]")
        if x < 2:
            return 0.0
        xi = math.floor(x)
        total = 0.0
        m = 1
        while True:
            r = _iroot(xi, m)
            if r < 2:
                break
            idx = int(np.searchsorted(self.primes, r, side="right"))
            if idx:
                total += float(self.theta_prefix[idx - 1])
            m += 1
        return total

    def psi_minus_theta_many(self, x: np.ndarray) -> np.ndarray:
        """Vectorized psi(x) - theta(x) (proper prime-power mass only)."""
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        top = float(np.max(x)) if x.size else 0.0
        m = 2
        while top >= 2.0 ** m:
            roots = np.power(x, 1.0 / m)
            out += self.theta_many(roots + roots * 4e-15 + 1e-12)
            m += 1
        return out

    def primes_in_range(self, lo: float, hi: float) -> np.ndarray:
        """All primes p with lo <= p <= hi, ascending."""
        if lo < 0 or hi > self.limit or lo > hi:
            raise ValidationError(
                f"primes_in_range: bad bounds [{lo}, {hi}] for limit {self.limit}")
        i = int(np.searchsorted(self.primes, math.ceil(lo), side="left"))
        j = int(np.searchsorted(self.primes, math.floor(hi), side="right"))
        return self.primes[i:j]

    def log_weights(self, prime_slice: np.ndarray) -> np.ndarray:
        return np.log(prime_slice.astype(np.float64))

    def prime_powers_up_to(self, bound: float, proper_only: bool = False) -> np.ndarray:
        """Ascending prime powers p^m <= bound (m >= 2 if proper_only)."""
        if bound > self.limit:
            raise ValidationError(f"prime_powers_up_to: {bound} > limit {self.limit}")
        chunks = [] if proper_only else [self.primes_in_range(2, bound)]
        m = 2
        while 2 ** m <= bound:
            ps = self.primes_in_range(2, math.floor(bound ** (1.0 / m)) + 1)
            pw = ps.astype(object) ** m
            chunks.append(np.array([int(v) for v in pw if v <= bound], dtype=np.int64))
            m += 1
        if not chunks:
            return np.array([], dtype=np.int64)
        return np.sort(np.concatenate(chunks))


def _iroot(n: int, m: int) -> int:
    """Exact floor(n**(1/m)) for nonnegative integers."""
    if m == 1:
        return n
    if m == 2:
        return math.isqrt(n)
    if n < 2:
        return n
    r = int(round(n ** (1.0 / m)))
    while r > 0 and r ** m > n:
        r -= 1
    while (r + 1) ** m <= n:
        r += 1
    return r


def build_table(limit: int, segment_size: int = DEFAULT_SEGMENT,
                max_bytes: int = 8 << 30) -> PrimeTable:
    """Segmented sieve of Eratosthenes up to limit (inclusive).

    Memory stays near segment_size bytes plus the output arrays; an
    estimate of the output size is checked against max_bytes up front.
    """
    if limit < 2:
        raise ValidationError(f"build_table: limit must be >= 2, got {limit}")
    if limit >= 1 << 63:
        raise ValidationError("build_table: limit must fit in a signed 64-bit integer")
    est = int(1.3 * limit / max(math.log(limit), 1.0)) + 64
    if est * 16 + segment_size > max_bytes:
        raise ResourceLimitError(
            f"build_table: ~{est} primes at limit {limit} exceed the "
            f"{max_bytes}-byte budget")
    root = math.isqrt(limit)
    base = _small_primes(max(root, 2))
    base = base[base.astype(np.int64) ** 2 <= limit]
    out = []
    start = 2
    while start <= limit:
        stop = min(start + segment_size - 1, limit)
        seg = np.ones(stop - start + 1, dtype=bool)
        for p in base:
            p = int(p)
            if p * p > stop:
                break
            first = max(p * p, ((start + p - 1) // p) * p)
            seg[first - start::p] = False
        out.append(np.nonzero(seg)[0].astype(np.int64) + start)
        start = stop + 1
    primes = np.concatenate(out)
    theta_prefix = compensated_cumsum(np.log(primes.astype(np.float64)))
    return PrimeTable(limit=int(limit), primes=primes, theta_prefix=theta_prefix)


# ------------------------------ binary format -------------------------------
# "DPT1" | u64 limit | u64 count | varint-encoded prime gaps | f64 prefix[]

_MAGIC = b"DPT1"


def _encode_varints(values: np.ndarray) -> bytes:
    buf = bytearray()
    for v in values.tolist():
        while True:
            b = v & 0x7F
            v >>= 7
            if v:
                buf.append(b | 0x80)
            else:
                buf.append(b)
                break
    return bytes(buf)


def _decode_varints(data: bytes, count: int) -> np.ndarray:
    out = np.empty(count, dtype=np.int64)
    val = 0
    shift = 0
    idx = 0
    for byte in data:
        val |= (byte & 0x7F) << shift
        if byte & 0x80:
            shift += 7
        else:
            if idx >= count:
                raise TableIntegrityError("varint stream longer than declared count")
            out[idx] = val
            idx += 1
            val = 0
            shift = 0
    if idx != count:
        raise TableIntegrityError(
            f"varint stream ended after {idx} of {count} primes")
    return out


def save_table(table: PrimeTable, path: str) -> None:
    gaps = np.diff(table.primes, prepend=np.int64(0))
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<QQ", table.limit, table.count))
        fh.write(_encode_varints(gaps))
        fh.write(table.theta_prefix.astype("<f8").tobytes())


def load_table(path: str) -> PrimeTable:
    with open(path, "rb") as fh:
        data = fh.read()
    stream = io.BytesIO(data)
    if stream.read(4) != _MAGIC:
        raise TableIntegrityError(f"{path}: bad magic bytes")
    limit, count = struct.unpack("<QQ", stream.read(16))
    tail = data[20:]
    prefix_bytes = 8 * count
    if len(tail) < prefix_bytes:
        raise TableIntegrityError(f"{path}: truncated file")
    gaps = _decode_varints(tail[:-prefix_bytes] if count else tail, count)
    primes = np.cumsum(gaps)
    theta_prefix = np.frombuffer(tail[len(tail) - prefix_bytes:], dtype="<f8").copy()
    table = PrimeTable(limit=int(limit), primes=primes, theta_prefix=theta_prefix)
    _validate_table(table, path)
    return table


def _validate_table(table: PrimeTable, path: str) -> None:
    p = table.primes
    if len(p) == 0 or p[0] != 2:
        raise TableIntegrityError(f"{path}: prime list does not start at 2")
    if np.any(np.diff(p) <= 0) or p[-1] > table.limit:
        raise TableIntegrityError(f"{path}: prime list not increasing within limit")
    # spot-check the prefix against log p at a handful of indices
    idx = np.unique(np.linspace(0, len(p) - 1, 16).astype(int))
    pref = np.concatenate(([0.0], table.theta_prefix))
    delta = pref[idx + 1] - pref[idx]
    if not np.allclose(delta, np.log(p[idx].astype(np.float64)), rtol=1e-9, atol=1e-9):
        raise TableIntegrityError(f"{path}: theta prefix inconsistent with primes")
