"""Hausdorff functions sampled on the dyadic grid h_n = h(2^-n).

Values are exact rationals where a closed form is dyadic-rational, otherwise
outward-rounded rational intervals at a configurable precision.  Symbolic
tags (pure powers r^s and power-log pairs r^s * log(1/r)^t) decide the
limit assertions exactly; everything else returns a three-valued verdict
under an explicit depth/tolerance policy, since limits are not decidable
from finite tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import BuildError, DepthExceededError, SpecFormatError

DEFAULT_PRECISION_BITS = 128
DEFAULT_N_MAX = 96


def iroot_floor(x: int, k: int) -> int:
    """floor(x ** (1/k)) for nonnegative integers, exact."""
    if x < 0 or k < 1:
        raise ValueError("iroot_floor needs x >= 0, k >= 1")
    if x in (0, 1) or k == 1:
        return x
    r = 1 << ((x.bit_length() + k - 1) // k)
    while True:
        nr = ((k - 1) * r + x // r ** (k - 1)) // k
        if nr >= r:
            break
        r = nr
    while r ** k > x:
        r -= 1
    return r


def pow2_bounds(q: Fraction, prec: int) -> tuple[Fraction, Fraction]:
    """Outward bounds on 2**q for rational q."""
    q = Fraction(q)
    a, b = q.numerator, q.denominator
    if b == 1:
        v = Fraction(1 << a) if a >= 0 else Fraction(1, 1 << (-a))
        return v, v
    # 2^(a/b) = floor-root of a shifted power, giving prec bits after the point
    shift = b * prec
    root = iroot_floor(1 << (a + shift) if a + shift >= 0 else 0, b)
    if a + shift < 0:
        # push the exponent positive first
        k = (-a) // b + 1
        lo, hi = pow2_bounds(q + k, prec)
        scale = Fraction(1, 1 << k)
        return lo * scale, hi * scale
    denom = 1 << prec
    return Fraction(root, denom), Fraction(root + 1, denom)


def ln2_bounds(prec: int) -> tuple[Fraction, Fraction]:
    """Outward bounds on ln 2 via sum over k of 1/(k 2^k)."""
    total = Fraction(0)
    terms = prec + 4
    for k in range(1, terms + 1):
        total += Fraction(1, k * (1 << k))
    # tail is below 2/(terms * 2^terms)
    tail = Fraction(2, terms * (1 << terms))
    return total, total + tail


def _interval_mul(a, b):
    (al, ah), (bl, bh) = a, b
    cands = (al * bl, al * bh, ah * bl, ah * bh)
    return min(cands), max(cands)


def _interval_intpow(a, t: int):
    al, ah = a
    if t == 0:
        return Fraction(1), Fraction(1)
    if t > 0:
        lo, hi = Fraction(1), Fraction(1)
        for _ in range(t):
            lo, hi = _interval_mul((lo, hi), a)
        return lo, hi
    if al <= 0:
        raise ValueError("negative power of an interval touching zero")
    lo, hi = _interval_intpow(a, -t)
    return 1 / hi, 1 / lo


@dataclass(frozen=True)
class Symbolic:
    """Closed-form tag: r^s when t == 0, else r^s * log(1/r)^t."""

    s: Fraction
    t: int = 0

    def grid_bounds(self, n: int, prec: int) -> tuple[Fraction, Fraction]:
        base = pow2_bounds(-self.s * n, prec)
        if self.t == 0:
            return base
        if n == 0:
            # log(1/r) vanishes at r=1; clamp the n=0 sample to the n=1 value
            return self.grid_bounds(1, prec)
        l2 = ln2_bounds(prec)
        logpart = _interval_intpow((l2[0] * n, l2[1] * n), self.t)
        return _interval_mul(base, logpart)


class DyadicHFn:
    """A Hausdorff function as outward-rounded samples on the dyadic grid."""

    def __init__(self, lo, hi, symbolic: Symbolic | None = None,
                 precision: int = DEFAULT_PRECISION_BITS, name: str | None = None):
        self.lo = tuple(Fraction(v) for v in lo)
        self.hi = tuple(Fraction(v) for v in hi)
        self.symbolic = symbolic
        self.precision = precision
        self.name = name or (self._symbolic_name() if symbolic else "table")
        self._deep_cache: dict = {}
        self._validate()

    def _symbolic_name(self) -> str:
        s = self.symbolic
        if s.t == 0:
            return f"r^{s.s}"
        return f"r^{s.s}*log^{s.t}"

    def _validate(self):
        if len(self.lo) != len(self.hi) or not self.lo:
            raise SpecFormatError("gauge table bounds must be nonempty and aligned")
        for n, (l, h) in enumerate(zip(self.lo, self.hi)):
            if not (0 < l <= h):
                raise SpecFormatError(f"gauge values must be positive (index {n})")
            if n and (l > self.lo[n - 1] or h > self.hi[n - 1]):
                raise SpecFormatError(f"gauge values must be nonincreasing in n (index {n})")

    @property
    def n_max(self) -> int:
        return len(self.lo) - 1

    def value(self, n: int) -> tuple[Fraction, Fraction]:
        if 0 <= n <= self.n_max:
            return self.lo[n], self.hi[n]
        if n > self.n_max and self.symbolic is not None:
            # symbolic gauges extend past their stored table on demand
            hit = self._deep_cache.get(n)
            if hit is None:
                hit = self.symbolic.grid_bounds(n, self.precision)
                self._deep_cache[n] = hit
            return hit
        raise DepthExceededError(f"gauge undefined at grid index {n} (table to {self.n_max})")

    def lo_at(self, n: int) -> Fraction:
        return self.value(n)[0]

    def hi_at(self, n: int) -> Fraction:
        return self.value(n)[1]

    def is_exact_at(self, n: int) -> bool:
        return self.lo[n] == self.hi[n]

    @property
    def is_vanishing(self) -> bool:
        """Certainly vanishing gauges: positive symbolic powers, or tables
        whose tail keeps strictly decreasing (a heuristic flag; builders that
        need h -> 0 additionally fail with a typed error when a table bottoms
        out before their threshold)."""
        if self.symbolic is not None:
            return self.symbolic.s > 0
        tail = self.hi[max(0, self.n_max - 4):]
        return all(b < a for a, b in zip(tail, tail[1:]))

    def dominates_dyadic(self, exponent: int, n: int) -> bool | None:
        """Certified verdict of 2^-exponent <= h(2^-n); None if undecided."""
        if self.symbolic is not None and self.symbolic.t == 0:
            # 2^-e <= 2^-ns  iff  e >= n*s, exactly
            return Fraction(exponent) >= self.symbolic.s * n
        target = Fraction(1, 1 << exponent)
        lo, hi = self.value(n)
        if target <= lo:
            return True
        if target > hi:
            return False
        return None

    def below_dyadic(self, exponent: int, n: int) -> bool | None:
        """Certified verdict of h(2^-n) <= 2^-exponent; None if undecided."""
        if self.symbolic is not None and self.symbolic.t == 0:
            return self.symbolic.s * n >= Fraction(exponent)
        target = Fraction(1, 1 << exponent) if exponent >= 0 else Fraction(1 << -exponent)
        lo, hi = self.value(n)
        if hi <= target:
            return True
        if lo > target:
            return False
        return None

    def scaled(self, factor: Fraction, name=None) -> "DyadicHFn":
        f = Fraction(factor)
        if f <= 0:
            raise ValueError("scale factor must be positive")
        return DyadicHFn([v * f for v in self.lo], [v * f for v in self.hi],
                         None, self.precision, name)

    def __repr__(self):
        return f"<DyadicHFn {self.name} to n={self.n_max}>"


def power_hfn(s, n_max: int = DEFAULT_N_MAX,
              precision: int = DEFAULT_PRECISION_BITS) -> DyadicHFn:
    s = Fraction(s)
    if s <= 0:
        raise SpecFormatError("power gauge needs s > 0")
    sym = Symbolic(s)
    pairs = [sym.grid_bounds(n, precision) for n in range(n_max + 1)]
    return DyadicHFn([p[0] for p in pairs], [p[1] for p in pairs], sym, precision)


def power_log_hfn(s, t: int, n_max: int = DEFAULT_N_MAX,
                  precision: int = DEFAULT_PRECISION_BITS) -> DyadicHFn:
    s = Fraction(s)
    if s <= 0:
        raise SpecFormatError("power-log gauge needs s > 0")
    if not isinstance(t, int):
        raise SpecFormatError("power-log exponent t must be an integer")
    if t == 0:
        return power_hfn(s, n_max, precision)
    sym = Symbolic(s, t)
    pairs = [sym.grid_bounds(n, precision) for n in range(n_max + 1)]
    lo = [p[0] for p in pairs]
    hi = [p[1] for p in pairs]
    # r^s log(1/r)^t can wobble at the top of the grid; clamp to monotone
    for n in range(1, len(lo)):
        lo[n] = min(lo[n], lo[n - 1])
        hi[n] = min(hi[n], hi[n - 1])
    return DyadicHFn(lo, hi, sym, precision)


def table_hfn(values, precision: int = DEFAULT_PRECISION_BITS,
              name: str | None = None) -> DyadicHFn:
    vals = [Fraction(v) for v in values]
    return DyadicHFn(vals, vals, None, precision, name)


# ---------------------------------------------------------------------------
# Verdicts


@dataclass(frozen=True)
class PrecedeVerdict:
    status: str               # "holds" | "fails" | "inconclusive"
    index: int | None = None  # failure index when status == "fails"
    exact: bool = False

    @property
    def holds(self) -> bool:
        return self.status == "holds"


@dataclass(frozen=True)
class FiniteOrderVerdict:
    status: str
    bound: Fraction | None = None
    exact: bool = False

    @property
    def holds(self) -> bool:
        return self.status == "holds"


def precede(g: DyadicHFn, h: DyadicHFn, depth: int = 64,
            tol: Fraction = Fraction(1, 64)) -> PrecedeVerdict:
    """Verdict of g < h in the gauge order, i.e. h(r)/g(r) -> 0.

    Symbolic pairs are decided exactly.  Table policy on the window
    [depth/2, depth]: holds when every certified ratio upper bound is <= tol
    and the endpoint ratio does not exceed the start; fails at the first
    index whose ratio lower bound exceeds 1/tol, or when the ratio is
    nondecreasing across the whole window while staying above tol (a stalled
    ratio, e.g. identical tables); otherwise inconclusive.
    """
    tol = Fraction(tol)
    sg, sh = g.symbolic, h.symbolic
    if sg is not None and sh is not None:
        if (sh.s, -sh.t) > (sg.s, -sg.t):
            return PrecedeVerdict("holds", exact=True)
        return PrecedeVerdict("fails", index=0, exact=True)
    if depth > min(g.n_max, h.n_max):
        raise DepthExceededError("precede window exceeds a gauge table")
    window = range(depth // 2, depth + 1)
    ratio_hi = [h.hi_at(n) / g.lo_at(n) for n in window]
    ratio_lo = [h.lo_at(n) / g.hi_at(n) for n in window]
    for i, n in enumerate(window):
        if ratio_lo[i] > 1 / tol:
            return PrecedeVerdict("fails", index=n)
    if all(r <= tol for r in ratio_hi) and ratio_hi[-1] <= ratio_hi[0]:
        return PrecedeVerdict("holds")
    if all(b >= a for a, b in zip(ratio_lo, ratio_lo[1:])) and ratio_lo[-1] >= tol:
        return PrecedeVerdict("fails", index=depth // 2)
    return PrecedeVerdict("inconclusive")


def finite_order(h: DyadicHFn, depth: int = 64) -> FiniteOrderVerdict:
    """Doubling-condition verdict: is h(2r)/h(r) bounded along the tail?

    Exact for symbolic tags (always finite order, bound 2^s up to the log
    factor).  Table policy on [depth/2, depth]: holds when the window's
    ratio supremum stays within (1 + 8/depth) of its start, fails when the
    endpoint ratio at least doubles the start, else inconclusive.
    """
    if h.symbolic is not None:
        ub = pow2_bounds(h.symbolic.s, h.precision)[1]
        if h.symbolic.t:
            ub *= 2  # generous cover for the slowly-varying log factor
        return FiniteOrderVerdict("holds", bound=ub, exact=h.symbolic.t == 0)
    if depth > h.n_max:
        raise DepthExceededError("finite-order window exceeds the gauge table")
    window = range(max(1, depth // 2), depth + 1)
    ratios = [h.hi_at(n - 1) / h.lo_at(n) for n in window]
    start, end, top = ratios[0], ratios[-1], max(ratios)
    if top <= start * (1 + Fraction(8, depth)):
        return FiniteOrderVerdict("holds", bound=top)
    if end >= 2 * start:
        return FiniteOrderVerdict("fails", bound=top)
    return FiniteOrderVerdict("inconclusive", bound=top)


# ---------------------------------------------------------------------------
# Constructions


def diagonal_dominate(hs, n_max: int | None = None,
                      precision: int = DEFAULT_PRECISION_BITS) -> DyadicHFn:
    """A gauge preceded by every input: precede(h_i, out) holds for all i.

    Grid value at m is min over the inputs of h_i(2^-m), damped by 2^-w(m)
    with w(m) = m // 4 growing slowly.  All-symbolic-power inputs produce the
    exact symbolic power max_i(s_i) + 1/4.
    """
    hs = list(hs)
    if not hs:
        raise BuildError("diagonal domination needs at least one gauge")
    for h in hs:
        if not h.is_vanishing:
            raise BuildError(f"gauge {h.name} is not vanishing")
    if all(h.symbolic is not None and h.symbolic.t == 0 for h in hs):
        s = max(h.symbolic.s for h in hs) + Fraction(1, 4)
        return power_hfn(s, n_max or min(h.n_max for h in hs), precision)
    m_top = n_max if n_max is not None else min(h.n_max for h in hs)
    lo, hi = [], []
    for m in range(m_top + 1):
        damp = Fraction(1, 1 << (m // 4))
        lo.append(min(h.lo_at(m) for h in hs) * damp)
        hi.append(min(h.hi_at(m) for h in hs) * damp)
    return DyadicHFn(lo, hi, None, precision, name="diag")


def multiply(h: DyadicHFn, g: DyadicHFn) -> DyadicHFn:
    if (h.symbolic and g.symbolic) and h.symbolic.t == g.symbolic.t == 0:
        return power_hfn(h.symbolic.s + g.symbolic.s,
                         min(h.n_max, g.n_max), max(h.precision, g.precision))
    top = min(h.n_max, g.n_max)
    lo = [h.lo_at(n) * g.lo_at(n) for n in range(top + 1)]
    hi = [h.hi_at(n) * g.hi_at(n) for n in range(top + 1)]
    return DyadicHFn(lo, hi, None, max(h.precision, g.precision),
                     name=f"({h.name})*({g.name})")


def grid_index_floor(r: Fraction) -> int:
    """ceil(-log2 r): the grid index below r, so 2^-index <= r."""
    r = Fraction(r)
    if not 0 < r <= 1:
        raise ValueError("grid snapping needs r in (0, 1]")
    n = 0
    while Fraction(1, 1 << n) > r:
        n += 1
    return n


def grid_index_ceil(r: Fraction) -> int:
    """floor(-log2 r): the grid index at or above r."""
    n = grid_index_floor(r)
    if n > 0 and Fraction(1, 1 << (n - 1)) <= r:
        return n - 1
    return n if Fraction(1, 1 << n) >= r else max(0, n - 1)


def compose(h: DyadicHFn, g: DyadicHFn) -> DyadicHFn:
    """h o g on the grid: evaluate h at the grid snap of g's values.

    Rounding is outward: the true h(g(2^-n)) lies between the h-samples at
    the indices bracketing -log2 g_n.  Requires h's table to reach the
    snapped indices.
    """
    if (h.symbolic and g.symbolic) and h.symbolic.t == g.symbolic.t == 0:
        return power_hfn(h.symbolic.s * g.symbolic.s,
                         min(h.n_max, g.n_max), max(h.precision, g.precision))
    top = g.n_max
    lo, hi = [], []
    for n in range(top + 1):
        glo, ghi = g.value(n)
        if ghi > 1:
            ghi = Fraction(1)
        j_deep = grid_index_floor(glo)   # 2^-j_deep <= g_lo
        j_shallow = grid_index_ceil(ghi)
        if j_deep > h.n_max:
            raise DepthExceededError(
                f"compose needs h at grid index {j_deep} (table to {h.n_max})")
        lo.append(h.lo_at(j_deep))
        hi.append(h.hi_at(min(j_shallow, h.n_max)))
    for n in range(1, top + 1):
        lo[n] = min(lo[n], lo[n - 1])
        hi[n] = min(hi[n], hi[n - 1])
    return DyadicHFn(lo, hi, None, max(h.precision, g.precision),
                     name=f"({h.name})o({g.name})")


def grid_inverse(g: DyadicHFn) -> DyadicHFn:
    """Grid inverse of a strictly decreasing gauge: value 2^-j(m) at index m,
    where j(m) is the deepest grid index with g_j >= 2^-m."""
    if g.symbolic is not None and g.symbolic.t == 0:
        return power_hfn(1 / g.symbolic.s, g.n_max, g.precision)
    strict = all(g.hi_at(n + 1) < g.lo_at(n) for n in range(g.n_max))
    if not strict:
        raise BuildError("grid inverse needs a strictly decreasing gauge table")
    lo, hi = [], []
    for m in range(g.n_max + 1):
        target = Fraction(1, 1 << m)
        j = 0
        while j + 1 <= g.n_max and g.lo_at(j + 1) >= target:
            j += 1
        v = Fraction(1, 1 << j)
        lo.append(v)
        hi.append(v)
    return DyadicHFn(lo, hi, None, g.precision, name=f"inv({g.name})")


def hfn_from_epsilons(eps, n_max: int | None = None) -> DyadicHFn:
    """A gauge with h(eps_n) >= 1/n for the 1-based sequence eps.

    The sequence may be non-monotone; it is sorted decreasing first.  Grid
    value at m is 1/min{n : eps_n < 2^(1-m)}, which certifies the bound at
    the snapped-down evaluation point of every eps_n, and the tail keeps
    decreasing so the gauge vanishes.
    """
    eps = sorted((Fraction(e) for e in eps), reverse=True)
    if not eps or eps[-1] <= 0:
        raise SpecFormatError("epsilons must be positive")
    eps = [min(e, Fraction(1)) for e in eps]  # cube diameters cap at 1
    count = len(eps)
    deepest = grid_index_floor(min(min(eps), Fraction(1))) + 4
    top = max(n_max if n_max is not None else 0, deepest, DEFAULT_N_MAX // 2)
    vals = []
    for m in range(top + 1):
        threshold = Fraction(2, 1 << m)  # 2^(1-m)
        first = next((i + 1 for i, e in enumerate(eps) if e < threshold), None)
        if first is None:
            vals.append(Fraction(1, count + 1 + max(0, m - deepest)))
        else:
            vals.append(Fraction(1, first))
    for m in range(1, len(vals)):
        vals[m] = min(vals[m], vals[m - 1])
    # force a strictly decreasing tail so the vanishing flag holds
    m = len(vals) - 1
    while m > 0 and vals[m] == vals[m - 1] == vals[-1]:
        m -= 1
    for k in range(m + 1, len(vals)):
        vals[k] = vals[k - 1] * Fraction(1, 2) if vals[k] >= vals[k - 1] else vals[k]
    return DyadicHFn(vals, vals, None, name="from-eps")


def eval_at_rational(h: DyadicHFn, r: Fraction) -> tuple[Fraction, Fraction]:
    """Bounds on h(r) for rational r in (0,1], via the snapped-down sample
    (right-continuous step extension; a certified lower bound for h(r))."""
    n = grid_index_floor(Fraction(r))
    if n > h.n_max:
        raise DepthExceededError("evaluation point below the gauge table")
    return h.value(n)
