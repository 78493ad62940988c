import math

import numpy as np
import pytest

from primearcs.errors import (ResourceLimitError, TableIntegrityError,
                              ValidationError)
from primearcs.primes import (build_table, is_prime, load_table,
                              save_table)


def simple_sieve(limit):
    """Independent oracle: textbook one-shot sieve."""
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, int(limit ** 0.5) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return np.nonzero(flags)[0]


def test_first_primes():
    assert build_table(10).primes.tolist() == [2, 3, 5, 7]


def test_limit_below_minimum():
    with pytest.raises(ValidationError):
        build_table(1)


def test_against_second_sieve():
    mine = build_table(10**5, segment_size=1 << 12).primes
    oracle = simple_sieve(10**5)
    assert np.array_equal(mine, oracle)


def test_prime_count_1e6(table_large):
    assert int(np.searchsorted(table_large.primes, 10**6, side="right")) == 78498


def test_resource_budget():
    with pytest.raises(ResourceLimitError):
        build_table(10**9, max_bytes=10**6)


def test_theta_values(table):
    assert table.theta(1.9) == 0.0
    assert table.theta(2) == pytest.approx(math.log(2), rel=1e-15)
    assert table.theta(10) == pytest.approx(
        sum(math.log(p) for p in (2, 3, 5, 7)), rel=1e-14)


def test_theta_monotone(table):
    xs = np.linspace(0, 10**4, 400)
    vals = [table.theta(x) for x in xs]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_theta_out_of_range(table):
    with pytest.raises(ValidationError):
        table.theta(table.limit + 1)


def test_psi_values(table):
    assert table.psi(2) == pytest.approx(math.log(2), rel=1e-15)
    lam = {2: math.log(2), 3: math.log(3), 4: math.log(2), 5: math.log(5),
           7: math.log(7), 8: math.log(2), 9: math.log(3)}
    assert table.psi(10) == pytest.approx(sum(lam.values()), rel=1e-13)
    assert table.psi(9) - table.theta(9) == pytest.approx(
        2 * math.log(2) + math.log(3), rel=1e-13)


def test_psi_minus_theta_is_prime_power_mass(table):
    rng = np.random.default_rng(11)
    for x in rng.uniform(10, 5000, size=25):
        direct = sum(math.log(p) for p in (2, 3, 5, 7, 11, 13, 17, 19, 23,
                                           29, 31, 37, 41, 43, 47, 53, 59,
                                           61, 67)
                     for m in range(2, 64) if p ** m <= x)
        assert table.psi(x) - table.theta(x) == pytest.approx(direct, abs=1e-9)


def test_chebyshev_sanity(table):
    for x in np.linspace(100, 2 * 10**5, 50):
        th, ps = table.theta(x), table.psi(x)
        assert th <= ps <= 1.04 * x


def test_primes_in_range(table):
    assert table.primes_in_range(10, 20).tolist() == [11, 13, 17, 19]
    assert table.primes_in_range(14, 16).tolist() == []
    assert len(table.primes_in_range(10**5, 2 * 10**5)) == 8392
    with pytest.raises(ValidationError):
        table.primes_in_range(20, 10)


def test_range_partition_counts(table):
    full = len(table.primes_in_range(1000, 9000))
    left = len(table.primes_in_range(1000, 4999))
    right = len(table.primes_in_range(5000, 9000))
    assert left + right == full


def test_is_prime_small():
    odd_composites = [1, 9, 15, 21, 25, 27, 33]
    assert not any(is_prime(n) for n in odd_composites)
    assert all(is_prime(n) for n in (2, 3, 5, 7, 11, 13, 97))


def test_is_prime_64bit():
    assert is_prime(2**61 - 1)            # Mersenne prime
    assert not is_prime(10**6 + 1)        # 101 * 9901
    assert not is_prime(3215031751)       # strong pseudoprime to 2,3,5,7
    assert is_prime(18446744073709551557)  # largest prime below 2^64


def test_is_prime_matches_sieve(table):
    ps = set(table.primes_in_range(2, 5000).tolist())
    for n in range(5000):
        assert is_prime(n) == (n in ps)


def test_table_roundtrip(tmp_path, table):
    path = tmp_path / "t.bin"
    save_table(table, str(path))
    back = load_table(str(path))
    assert back.limit == table.limit
    assert np.array_equal(back.primes, table.primes)
    assert np.array_equal(back.theta_prefix, table.theta_prefix)


def test_table_corruption_detected(tmp_path, table):
    path = tmp_path / "t.bin"
    save_table(table, str(path))
    blob = bytearray(path.read_bytes())
    blob[25] ^= 0xFF  # flip bits inside the gap stream
    path.write_bytes(bytes(blob))
    with pytest.raises(TableIntegrityError):
        load_table(str(path))


def test_table_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOPE" + b"\0" * 64)
    with pytest.raises(TableIntegrityError):
        load_table(str(path))


def test_theta_prefix_per_term_rounding(table):
    # each prefix entry is exact up to its own float64 rounding, so the
    # deltas recover log p within a couple of ulps of the running sum
    pref = np.concatenate(([0.0], table.theta_prefix))
    deltas = np.diff(pref)
    logs = np.log(table.primes.astype(np.float64))
    ulps = np.finfo(np.float64).eps * np.maximum(pref[1:], 1.0)
    assert np.all(np.abs(deltas - logs) <= 2.5 * ulps)
