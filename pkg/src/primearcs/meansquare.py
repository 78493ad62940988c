"""Mean-square integrals of prime-counting errors in short intervals,
with the truncated L2 integral that links them to exponential sums.

Everything here is an integral of (step - smooth)^2 over a dyadic x-range,
where the step part only changes at k-th powers of primes (or prime
powers).  Between consecutive breakpoints the integrand is a low-order
smooth function, so splitting at the breakpoints and applying short
Gauss rules is exact to rounding and several orders of magnitude cheaper
than uniform grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .expsums import WindowSpec, integer_window
from .numutil import exp_pair_integral, gl_rule, powk_extended
from .primes import PrimeTable

PAIRWISE_CAP = 20_000  # max window size for the O(N^2) exact method


@dataclass(frozen=True)
class MeanSquareQuery:
    """One mean-square request: exactly one of h, rel_delta, Y is set."""

    X: float
    k: float
    h: float | None = None
    rel_delta: float | None = None
    Y: float | None = None
    use_psi: bool = False
    C_density: float = 12.0 / 5.0
    rh_mode: bool = False

    def __post_init__(self):
        if self.X < 2:
            raise ValidationError("MeanSquareQuery: X must be >= 2")
        if self.k <= 0:
            raise ValidationError("MeanSquareQuery: k must be positive")
        given = [v is not None for v in (self.h, self.rel_delta, self.Y)]
        if sum(given) != 1:
            raise ValidationError(
                "exactly one of h, rel_delta, Y must be given")
        if self.Y is not None and not 0 < self.Y <= 0.5:
            raise ValidationError("Y must lie in (0, 1/2]")


@dataclass(frozen=True)
class MeanSquareReport:
    query: MeanSquareQuery
    value: float
    comparator: float
    ratio: float
    method: str
    note: str = ""
    substituted: float | None = None


# --------------------------- piecewise machinery -----------------------------

def _breakpoints(table: PrimeTable, k: float, x_lo: float, x_hi: float,
                 shift: float = 0.0, factor: float = 1.0,
                 use_powers: bool = False, proper_only: bool = False):
    """x-values in (x_lo, x_hi) where F(((x*factor)+shift)^(1/k)) jumps.

    F jumps at integers q from the relevant set (primes, or prime powers);
    the crossing is at x = (q^k - shift)/factor.
    """
    top = ((x_hi * factor + shift)) ** (1.0 / k) + 1
    if use_powers:
        qs = table.prime_powers_up_to(min(float(table.limit), top),
                                      proper_only=proper_only)
    else:
        qs = table.primes_in_range(2, min(float(table.limit), top))
    qk = np.asarray(powk_extended(qs, k), dtype=np.float64)
    x = (qk - shift) / factor
    return x[(x > x_lo) & (x < x_hi)]


def _piecewise_square(step_fn, smooth_fn, bkpts: np.ndarray,
                      x_lo: float, x_hi: float, n_gl: int = 12,
                      max_pieces_frac: int = 64) -> float:
    """int_{x_lo}^{x_hi} (step_fn(x) - smooth_fn(x))^2 dx.

    step_fn must be constant between consecutive breakpoints; both
    callables are vectorized.  Long gaps are subdivided so the Gauss rule
    resolves the curvature of the smooth part.
    """
    edges = np.unique(np.concatenate((bkpts, [x_lo, x_hi])))
    edges = edges[(edges >= x_lo) & (edges <= x_hi)]
    # merge nearly-identical breakpoints (width below rounding resolution)
    keep = np.concatenate(([True], np.diff(edges) > 1e-12 * max(1.0, x_hi)))
    edges = edges[keep]
    if edges[-1] != x_hi:
        edges = np.append(edges, x_hi)
    max_len = (x_hi - x_lo) / max_pieces_frac
    a, b = edges[:-1], edges[1:]
    nsub = np.maximum(1, np.ceil((b - a) / max_len).astype(int))
    starts = np.repeat(a, nsub)
    widths = np.repeat((b - a) / nsub, nsub)
    offsets = np.concatenate([np.arange(n) for n in nsub]) * widths
    a_all = starts + offsets
    b_all = a_all + widths
    mids = 0.5 * (a_all + b_all)
    d = step_fn(mids)
    x_gl, w_gl = gl_rule(n_gl)
    nodes = mids[:, None] + (0.5 * widths)[:, None] * x_gl[None, :]
    g = smooth_fn(nodes.ravel()).reshape(nodes.shape)
    vals = (d[:, None] - g) ** 2
    return float(np.sum((vals @ w_gl) * (0.5 * widths)))


def _count_fn(table: PrimeTable, use_psi: bool):
    if use_psi:
        def fn(y):
            return table.theta_many(y) + table.psi_minus_theta_many(y)
    else:
        fn = table.theta_many
    return fn


def _require_table(table: PrimeTable, needed: float, what: str):
    if needed > table.limit:
        raise ValidationError(
            f"{what}: table limit {table.limit} below required {needed:.0f}")


# ------------------------------- operations ----------------------------------

def selberg_J(table: PrimeTable, q: MeanSquareQuery,
              x_range: tuple[float, float] | None = None) -> MeanSquareReport:
    """J_k(X, h) = int_X^2X (F((x+h)^(1/k)) - F(x^(1/k)) - drift)^2 dx.

    F is theta (or psi when the query says so) and drift is the smooth
    increment (x+h)^(1/k) - x^(1/k).  The comparator follows the
    conditional / unconditional short-interval bound selected by rh_mode.
    """
    if q.h is None:
        raise ValidationError("selberg_J needs an additive increment h")
    if q.h < 0:
        raise ValidationError("h must be nonnegative")
    X, k, h = q.X, q.k, q.h
    x_lo, x_hi = x_range if x_range is not None else (X, 2.0 * X)
    _require_table(table, (x_hi + h) ** (1.0 / k), "selberg_J")
    if h == 0.0:
        value = 0.0
    else:
        fn = _count_fn(table, q.use_psi)
        rt = 1.0 / k

        def step(x):
            return fn((x + h) ** rt) - fn(x ** rt)

        def smooth(x):
            return (x + h) ** rt - x ** rt

        bk = np.concatenate([
            _breakpoints(table, k, x_lo, x_hi, shift=0.0,
                         use_powers=q.use_psi),
            _breakpoints(table, k, x_lo, x_hi, shift=h,
                         use_powers=q.use_psi),
        ])
        value = _piecewise_square(step, smooth, bk, x_lo, x_hi)
    comparator, note = _short_interval_comparator(q)
    return MeanSquareReport(q, value, comparator,
                            value / comparator if comparator > 0 else math.inf,
                            "piecewise-exact", note)


def _short_interval_comparator(q: MeanSquareQuery) -> tuple[float, str]:
    X, k = q.X, q.k
    h = q.h if q.h is not None else (q.rel_delta * X if q.rel_delta else 0.0)
    if h <= 0:
        return 0.0, "degenerate increment"
    if q.rh_mode:
        comp = h * X ** (1.0 / k) * math.log(2.0 * X / h) ** 2
        lo = X ** (1.0 - 1.0 / k)
    else:
        decay = math.exp(-((math.log(X) / math.log(math.log(X))) ** (1.0 / 3.0)))
        comp = h * h * X ** (2.0 / k - 1.0) * decay
        lo = X ** (1.0 - 2.0 / (q.C_density * k))
    note = "" if lo <= h <= X else "comparator-out-of-range"
    return comp, note


def theta_psi_discrepancy(table: PrimeTable, q: MeanSquareQuery) -> MeanSquareReport:
    """Mean square of the proper-prime-power mass difference
    (psi - theta)((x+h)^(1/k)) - (psi - theta)(x^(1/k)).
    """
    X, k = q.X, q.k
    if q.Y is not None:
        raise ValidationError("theta_psi_discrepancy takes h or rel_delta")
    relative = q.rel_delta is not None
    h = q.rel_delta if relative else q.h
    if h is None or h < 0:
        raise ValidationError("increment must be nonnegative")
    factor = 1.0 + h if relative else 1.0
    shift = 0.0 if relative else h
    _require_table(table, (2.0 * X * factor + shift) ** (1.0 / k),
                   "theta_psi_discrepancy")
    if h == 0.0:
        value = 0.0
    else:
        rt = 1.0 / k
        pm = table.psi_minus_theta_many

        def step(x):
            return pm((x * factor + shift) ** rt) - pm(x ** rt)

        def smooth(x):
            return np.zeros_like(x)

        bk = np.concatenate([
            _breakpoints(table, k, X, 2 * X, use_powers=True, proper_only=True),
            _breakpoints(table, k, X, 2 * X, shift=shift, factor=factor,
                         use_powers=True, proper_only=True),
        ])
        value = _piecewise_square(step, smooth, bk, X, 2.0 * X)
    comparator = (h * X ** (1.0 / k + 1.0)) if relative else (h * X ** (1.0 / k))
    return MeanSquareReport(q, value, comparator,
                            value / comparator if comparator > 0 else math.inf,
                            "piecewise-exact")


def selberg_J_relative(table: PrimeTable, q: MeanSquareQuery) -> MeanSquareReport:
    """Relative-increment variant: increment delta*x instead of h.

    Also evaluates the k = 1 substituted form X^(1-1/k) * Jtilde(X^(1/k),
    Delta) with Delta = (1+delta)^(1/k) - 1, reported in ``substituted``
    (the two agree up to a k-dependent constant, not exactly).
    """
    if q.rel_delta is None:
        raise ValidationError("selberg_J_relative needs rel_delta")
    if not 0 <= q.rel_delta <= 1:
        raise ValidationError("rel_delta must lie in [0, 1]")
    X, k, delta = q.X, q.k, q.rel_delta
    _require_table(table, (2.0 * X * (1 + delta)) ** (1.0 / k),
                   "selberg_J_relative")
    if delta == 0.0:
        value = 0.0
        substituted = 0.0
    else:
        rt = 1.0 / k
        fac = 1.0 + delta
        big_delta = fac ** rt - 1.0
        fn = _count_fn(table, q.use_psi)

        def step(x):
            return fn((x * fac) ** rt) - fn(x ** rt)

        def smooth(x):
            return big_delta * x ** rt

        bk = np.concatenate([
            _breakpoints(table, k, X, 2 * X, use_powers=q.use_psi),
            _breakpoints(table, k, X, 2 * X, factor=fac,
                         use_powers=q.use_psi),
        ])
        value = _piecewise_square(step, smooth, bk, X, 2.0 * X)
        sub_q = MeanSquareQuery(X=X ** rt, k=1.0, rel_delta=big_delta,
                                use_psi=q.use_psi, C_density=q.C_density,
                                rh_mode=q.rh_mode)
        inner = _relative_value(table, sub_q)
        substituted = X ** (1.0 - rt) * inner
    comparator, note = _relative_increment_comparator(q)
    return MeanSquareReport(q, value, comparator,
                            value / comparator if comparator > 0 else math.inf,
                            "piecewise-exact", note, substituted=substituted)


def _relative_value(table: PrimeTable, q: MeanSquareQuery) -> float:
    """Plain value of the relative-increment integral (no comparator)."""
    X, k, delta = q.X, q.k, q.rel_delta
    rt = 1.0 / k
    fac = 1.0 + delta
    big_delta = fac ** rt - 1.0
    fn = _count_fn(table, q.use_psi)

    def step(x):
        return fn((x * fac) ** rt) - fn(x ** rt)

    def smooth(x):
        return big_delta * x ** rt

    bk = np.concatenate([
        _breakpoints(table, k, X, 2 * X, use_powers=q.use_psi),
        _breakpoints(table, k, X, 2 * X, factor=fac, use_powers=q.use_psi),
    ])
    return _piecewise_square(step, smooth, bk, X, 2.0 * X)


def _relative_increment_comparator(q: MeanSquareQuery) -> tuple[float, str]:
    X, k, delta = q.X, q.k, q.rel_delta
    if delta <= 0:
        return 0.0, "degenerate increment"
    if q.rh_mode:
        comp = delta * X ** (1.0 / k + 1.0) * math.log(2.0 / delta) ** 2
        lo = X ** (-1.0 / k)
    else:
        decay = math.exp(-((math.log(X) / math.log(math.log(X))) ** (1.0 / 3.0)))
        comp = delta * delta * X ** (2.0 / k + 1.0) * decay
        lo = X ** (-2.0 / (q.C_density * k))
    note = "" if lo <= delta <= 1.0 else "comparator-out-of-range"
    return comp, note


# ------------------------------ truncated L2 ---------------------------------

def _window_weights(table: PrimeTable, w: WindowSpec):
    """Integers of the dyadic window with weights l(n) - 1."""
    ns = integer_window(w.k, w.X, 2.0 * w.X)
    if len(ns) == 0:
        return ns, np.array([])
    _require_table(table, float(ns[-1]), "l2_diff")
    prime_mask = np.isin(ns, table.primes_in_range(2, float(ns[-1])))
    ell = np.where(prime_mask, np.log(ns.astype(np.float64)), 0.0)
    return ns, ell - 1.0


def l2_diff(table: PrimeTable, w: WindowSpec, Y: float,
            method: str = "auto") -> MeanSquareReport:
    """int_{-Y}^{Y} |S_k(alpha) - U_k(alpha)|^2 d alpha.

    pairwise-exact expands the square into closed-form pair terms (refused
    above PAIRWISE_CAP window integers); grid uses panelled quadrature.
    The comparator is the three-term truncated-L2 bound with unit
    constants, its short-interval integral computed by selberg_J.
    """
    if not 0 < Y <= 0.5:
        raise ValidationError("Y must lie in (0, 1/2]")
    ns, coeffs = _window_weights(table, w)
    freqs = np.asarray(powk_extended(ns, w.k), dtype=np.float64)
    if method == "auto":
        method = "pairwise-exact" if len(ns) <= PAIRWISE_CAP else "grid"
    if method == "pairwise-exact":
        if len(ns) > PAIRWISE_CAP:
            raise ValidationError(
                f"pairwise method refused for {len(ns)} > {PAIRWISE_CAP} integers")
        value = exp_pair_integral(freqs, coeffs, -Y, Y)
    elif method == "grid":
        value = _l2_grid(freqs, coeffs, Y)
    else:
        raise ValidationError(f"unknown method {method!r}")
    comparator = _truncated_l2_comparator(table, w, Y)
    q = MeanSquareQuery(X=w.X, k=w.k, Y=Y)
    return MeanSquareReport(q, value, comparator,
                            value / comparator if comparator > 0 else math.inf,
                            method)


def _l2_grid(freqs: np.ndarray, coeffs: np.ndarray, Y: float) -> float:
    """2 * int_0^Y |sum c_j e(f_j a)|^2 da by per-cycle Gauss panels."""
    if len(freqs) == 0:
        return 0.0
    spread = float(freqs.max() - freqs.min())
    n_panels = max(16, int(math.ceil(1.5 * spread * Y)))
    x8, w8 = gl_rule(8)
    x12, w12 = gl_rule(12)
    vals = []
    for x_gl, w_gl in ((x8, w8), (x12, w12)):
        hw = Y / (2.0 * n_panels)
        centers = (2.0 * np.arange(n_panels) + 1.0) * hw
        total = 0.0
        chunk = max(1, (1 << 21) // len(freqs))
        for i in range(0, n_panels, chunk):
            nodes = (centers[i:i + chunk, None] + x_gl[None, :] * hw).ravel()
            ph = np.exp(2j * math.pi * np.mod(
                np.asarray(freqs, dtype=np.longdouble)[None, :]
                * np.asarray(nodes, dtype=np.longdouble)[:, None], 1.0
            ).astype(np.float64))
            s = ph @ coeffs.astype(np.complex128)
            mag = (s.real ** 2 + s.imag ** 2).reshape(-1, len(x_gl))
            total += float(np.sum(mag @ w_gl))
        vals.append(2.0 * total * hw)
    # refined value; panel doubling if the two orders disagree materially
    if abs(vals[1] - vals[0]) > 1e-6 * max(1e-300, abs(vals[1])):
        return _l2_grid_refined(freqs, coeffs, Y, n_panels * 2)
    return vals[1]


def _l2_grid_refined(freqs, coeffs, Y, n_panels):
    x12, w12 = gl_rule(12)
    hw = Y / (2.0 * n_panels)
    centers = (2.0 * np.arange(n_panels) + 1.0) * hw
    total = 0.0
    chunk = max(1, (1 << 21) // len(freqs))
    for i in range(0, n_panels, chunk):
        nodes = (centers[i:i + chunk, None] + x12[None, :] * hw).ravel()
        ph = np.exp(2j * math.pi * np.mod(
            np.asarray(freqs, dtype=np.longdouble)[None, :]
            * np.asarray(nodes, dtype=np.longdouble)[:, None], 1.0
        ).astype(np.float64))
        s = ph @ coeffs.astype(np.complex128)
        mag = (s.real ** 2 + s.imag ** 2).reshape(-1, 12)
        total += float(np.sum(mag @ w12))
    return 2.0 * total * hw


def _truncated_l2_comparator(table: PrimeTable, w: WindowSpec, Y: float) -> float:
    X, k = w.X, w.k
    h = 1.0 / (2.0 * Y)
    jq = MeanSquareQuery(X=X, k=k, h=h)
    j_val = selberg_J(table, jq).value
    return (X ** (2.0 / k - 2.0) * math.log(X) ** 2 / Y
            + Y * Y * X + Y * Y * j_val)


def double_integral_bound_check(table: PrimeTable, q: MeanSquareQuery,
                                n_outer: int = 400, n_inner: int = 24):
    """Numeric check of  h * J_psi(X,h) <= 2 * (double-integral majorant).

    The majorant integrates the squared increment-discrepancy over
    (x, v) in [X, 2X] x [2h, 3h] in both aligned and shifted forms; the
    factor 2 is exact.  Returns (lhs, rhs).
    """
    if q.h is None:
        raise ValidationError("needs an additive increment h")
    X, k, h = q.X, q.k, q.h
    _require_table(table, (2 * X + 3 * h) ** (1.0 / k), "double_integral_bound_check")
    rt = 1.0 / k
    fn = _count_fn(table, True)

    def disc(a, b):
        return fn(a ** rt) - fn(b ** rt) - (a ** rt - b ** rt)

    lhs = h * selberg_J(table, replace(q, use_psi=True)).value
    xs = X + (np.arange(n_outer) + 0.5) * (X / n_outer)
    vs = 2 * h + (np.arange(n_inner) + 0.5) * (h / n_inner)
    xv = xs[:, None] + vs[None, :]
    d1 = disc(xv, xs[:, None]) ** 2
    d2 = disc(xv, xs[:, None] + h) ** 2
    cell = (X / n_outer) * (h / n_inner)
    rhs = 2.0 * float((d1 + d2).sum()) * cell
    return lhs, rhs
