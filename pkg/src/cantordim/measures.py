"""Exact covering numbers, Hausdorff-measure DP, box contents and checks.

The algorithmic core is cylinder-cover optimality: in the ultrametric every
set of diameter <= 2^-n sits inside a single cylinder of the same diameter,
so gauge-weighted delta-cover costs are minimized over antichains of the
trace tree and the optimum is a min/sum dynamic program over automaton
states.  Truncation at depth D leaves an interval: depth-D leaves priced at
h(2^-D) give a certified upper bound, priced at zero a certified lower
bound.  Structural mass certificates (the mass distribution principle on
product masses) recover exact lower bounds where truncation alone cannot.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BuildError
from .hfun import DyadicHFn, finite_order
from .treeset import (Budget, CISet, FullCube, TreeSet, _budget,
                      is_trace_subset)
from .words import ISpec, Word

# ---------------------------------------------------------------------------
# Covering numbers and box contents


def covering_number(e: TreeSet, n: int, budget: Budget | None = None) -> int:
    """N_E at the depth-n cylinder scale: |trace_n(E)|, exact."""
    return e.trace_count(n, budget)


@dataclass(frozen=True)
class ContentSequence:
    """Samples (n, N, N*h(2^-n)) of a box-content sequence with window stats."""

    entries: tuple            # (n, N, lo, hi)
    window_start: int
    tail_sup: Fraction        # certified upper bound for sup over the window
    tail_inf: Fraction        # certified upper bound for inf over the window
    tail_inf_lo: Fraction     # certified lower bound for inf over the window

    def row(self, n: int):
        for row in self.entries:
            if row[0] == n:
                return row
        raise KeyError(n)


def box_content_sequence(e: TreeSet, h: DyadicHFn, n_lo: int, n_hi: int,
                         budget: Budget | None = None) -> ContentSequence:
    """Contents N_E(2^-n) * h(2^-n) for metric scales n in [n_lo, n_hi]."""
    if n_lo < 0 or n_hi < n_lo:
        raise ValueError("bad scale range")
    bud = _budget(budget)
    entries = []
    for n in range(n_lo, n_hi + 1):
        count = e.trace_count(e.depth_of_scale(n), bud)
        lo, hi = h.value(n)
        entries.append((n, count, count * lo, count * hi))
    start = max(n_lo, n_hi - (n_hi - n_lo) // 2, (n_hi + 1) // 2)
    window = [row for row in entries if row[0] >= start]
    return ContentSequence(
        entries=tuple(entries),
        window_start=start,
        tail_sup=max(r[3] for r in window),
        tail_inf=min(r[3] for r in window),
        tail_inf_lo=min(r[2] for r in window),
    )


@dataclass(frozen=True)
class BoxDimensionReport:
    rows: tuple                      # (n, N, log2N/n as float)
    lower_estimate: float
    upper_estimate: float
    closed_form: tuple | None        # exact (liminf, limsup) densities for CI


def box_dimensions(e: TreeSet, n_lo: int, n_hi: int,
                   budget: Budget | None = None) -> BoxDimensionReport:
    import math

    bud = _budget(budget)
    rows = []
    for n in range(max(1, n_lo), n_hi + 1):
        count = e.trace_count(e.depth_of_scale(n), bud)
        rows.append((n, count, math.log2(count) / n if count > 1 else 0.0))
    start = max(max(1, n_lo), (n_hi + 1) // 2)
    window = [r[2] for r in rows if r[0] >= start]
    closed = None
    if isinstance(e, CISet):
        closed = e.ispec.complement_density_limits()
    return BoxDimensionReport(tuple(rows), min(window), max(window), closed)


# ---------------------------------------------------------------------------
# Hausdorff-measure dynamic programming


@dataclass(frozen=True)
class MeasureBound:
    """Certified bracket for H^h at scale 2^-m, truncated at tree depth D."""

    lower: Fraction
    upper: Fraction
    scale_m: int
    depth: int
    gauge: str
    lower_source: str = "dp"   # "dp" | "mass"
    mass_exact: bool = False

    def __post_init__(self):
        if self.lower > self.upper:
            raise AssertionError("certified bounds crossed")


def _dp_bounds(e: TreeSet, h: DyadicHFn, m: int, depth: int, bud: Budget):
    """Min-cost cover DP over (state, depth); returns memo and root value."""
    leaf_scale = e.scale_of_depth(depth)
    if leaf_scale < m:
        raise ValueError("truncation depth does not reach the cover scale")
    h.value(leaf_scale)  # raises DepthExceededError when the gauge is short
    memo: dict = {}

    def bounds(state, d: int):
        key = (state, d)
        hit = memo.get(key)
        if hit is not None:
            return hit
        bud.spend()
        b = e.first_branch(state, d, depth, bud)
        if b is None:
            val = (Fraction(0), h.hi_at(leaf_scale))
        else:
            s = state
            for dd in range(d, b):
                s = e.children(s, dd, bud)[0][1]
            kids = e.children(s, b, bud)
            l0, u0 = bounds(kids[0][1], b + 1)
            l1, u1 = bounds(kids[1][1], b + 1)
            scale = e.scale_of_depth(b)
            if scale >= m:
                # covering the whole piece by one set is admissible here;
                # ties prefer the parent cylinder
                val = (min(h.lo_at(scale), l0 + l1), min(h.hi_at(scale), u0 + u1))
            else:
                val = (l0 + l1, u0 + u1)
        memo[key] = val
        return val

    root = bounds(e.root_state(), 0)
    return memo, root


def hausdorff_measure_delta(e: TreeSet, h: DyadicHFn, m: int, depth: int,
                            budget: Budget | None = None) -> MeasureBound:
    """Certified bounds for the delta-cover cost H^h at delta = 2^-m.

    The upper bound is the exact optimum over cylinder covers of tree depth
    <= `depth`; the lower bound is the truncation DP (leaves priced at zero)
    improved, when a structural mass certificate applies at all depths, by
    the mass distribution principle.
    """
    bud = _budget(budget)
    _, (dp_lo, dp_up) = _dp_bounds(e, h, m, depth, bud)
    lower, source, exact = dp_lo, "dp", False
    cert = _structural_mass_lower(e, h)
    if cert is not None and cert > lower:
        lower, source, exact = cert, "mass", True
    if lower > dp_up:
        raise AssertionError("mass certificate exceeded the DP upper bound")
    return MeasureBound(lower, dp_up, m, depth, h.name, source, exact)


def finite_cover_optimum(e: TreeSet, h: DyadicHFn, m: int, depth: int,
                         budget: Budget | None = None) -> MeasureBound:
    """The finite-cover content at scale 2^-m.

    For tree-coded (hence compact) sets this coincides with the countable
    delta-cover optimum, which is why the engine aliases the two; exposed
    separately so small instances can exercise the finite-cover definition
    directly.
    """
    return hausdorff_measure_delta(e, h, m, depth, budget)


def extract_optimal_cover(e: TreeSet, h: DyadicHFn, m: int, depth: int,
                          budget: Budget | None = None):
    """Materialize the DP argmin: (cylinder words, certified cost).

    Emits the minimal enclosing cylinder of every chosen piece (the chain
    bottom), so diameters can be read off the words.
    """
    bud = _budget(budget)
    memo, root = _dp_bounds(e, h, m, depth, bud)

    def upper(state, d):
        return memo[(state, d)][1]

    out: list[Word] = []
    stack = [("", e.root_state())]
    while stack:
        word, state = stack.pop()
        d = len(word)
        b = e.first_branch(state, d, depth, bud)
        if b is None:
            while len(word) < depth:
                bit, state = e.children(state, len(word), bud)[0]
                word += str(bit)
            out.append(word)
            continue
        while len(word) < b:
            bit, state = e.children(state, len(word), bud)[0]
            word += str(bit)
        kids = e.children(state, b, bud)
        children_sum = upper(kids[0][1], b + 1) + upper(kids[1][1], b + 1)
        scale = e.scale_of_depth(b)
        if scale >= m and h.hi_at(scale) <= children_sum:
            out.append(word)
        else:
            for bit, child in reversed(kids):
                bud.spend()
                stack.append((word + str(bit), child))
    out.sort()
    return out, root[1]


# ---------------------------------------------------------------------------
# Mass distribution certificates


class TreeMass:
    """Weight assignment on cylinders; see the concrete subclasses."""

    depth_uniform = False

    def value_at(self, word: Word) -> Fraction:
        raise NotImplementedError

    def depth_value(self, d: int) -> Fraction:
        raise NotImplementedError


class UniformMass(TreeMass):
    """The fair-coin product measure; additive only on the full cube."""

    depth_uniform = True

    def value_at(self, word):
        return Fraction(1, 1 << len(word))

    def depth_value(self, d):
        return Fraction(1, 1 << d)


class CIProductMass(TreeMass):
    """lambda([p] cap C_I) = total * 2^-|n\\I| on surviving nodes of C_I.

    A total below 1 buys slack for gauges that dip under r at the top of
    the grid (for those only a scaled certificate can close).
    """

    depth_uniform = True

    def __init__(self, ispec: ISpec, total: Fraction = Fraction(1)):
        self.ispec = ispec
        self.total = Fraction(total)

    def value_at(self, word):
        return self.depth_value(len(word))

    def depth_value(self, d):
        return self.total * Fraction(1, 1 << self.ispec.complement_count(d))


class TableMass(TreeMass):
    """Explicit weights per word; absent words weigh zero."""

    def __init__(self, table: dict):
        self.table = {w: Fraction(v) for w, v in table.items()}

    def value_at(self, word):
        return self.table.get(word, Fraction(0))


@dataclass(frozen=True)
class MassCertificate:
    ok: bool
    value: Fraction
    exact: bool
    verified_depth: int
    failure: Word | None = None
    reason: str = ""


def _gauge_covers(lam: Fraction, h: DyadicHFn, scale_idx: int) -> bool:
    """Certified lam <= h(2^-scale_idx); inconclusive counts as failure."""
    denom = lam.denominator
    if lam.numerator == 1 and denom & (denom - 1) == 0:
        verdict = h.dominates_dyadic(denom.bit_length() - 1, scale_idx)
        if verdict is not None:
            return verdict
    return lam <= h.lo_at(scale_idx)


def _ci_mass_exact(e: CISet, h: DyadicHFn) -> bool:
    """True when 2^-|n\\I| <= h(2^-n) is certified for every n, via one
    period of slack beyond the preperiod (periodic I, symbolic power h)."""
    if h.symbolic is None or h.symbolic.t != 0:
        return False
    ps = e.ispec.period_structure()
    if ps is None:
        return False
    pre, period = ps
    s = h.symbolic.s
    zeros = period.count("0")
    if Fraction(zeros, len(period)) < s:
        return False
    for n in range(pre + 2 * len(period) + 1):
        if Fraction(e.ispec.complement_count(n)) < s * n:
            return False
    return True


def _structural_mass_lower(e: TreeSet, h: DyadicHFn) -> Fraction | None:
    """Mass lower bound valid at every depth, for the kinds that support it."""
    if h.symbolic is None or h.symbolic.t != 0:
        return None
    if isinstance(e, FullCube):
        return Fraction(1) if h.symbolic.s <= 1 else None
    if isinstance(e, CISet) and _ci_mass_exact(e, h):
        return Fraction(1)
    return None


def mass_lower_certificate(e: TreeSet, h: DyadicHFn, mass: TreeMass, depth: int,
                           budget: Budget | None = None) -> MassCertificate:
    """Verify the mass distribution principle on the trace tree.

    Checks additivity of the mass and h(diam of piece) >= mass on every
    surviving node to `depth`.  On success the root mass bounds every
    cylinder-cover cost whose pieces resolve by `depth`; the bound is exact
    (valid for H^h itself) when the periodic/symbolic tail argument closes.
    """
    bud = _budget(budget)
    slack = 64  # look past the horizon so chain pieces resolve their diameter

    def check_node(word, state, lam):
        if lam == 0:
            return None
        b = e.first_branch(state, len(word), depth + slack, bud)
        scale_idx = e.scale_of_depth(b if b is not None else depth)
        scale_idx = min(scale_idx, h.n_max)
        if not _gauge_covers(lam, h, scale_idx):
            return f"h(2^-{scale_idx}) < mass at [{word}]"
        return None

    if mass.depth_uniform:
        frontier = {e.root_state()}
        words = {e.root_state(): ""}
        for d in range(depth + 1):
            lam = mass.depth_value(d)
            nxt = {}
            for state in frontier:
                word = words[state]
                err = check_node(word, state, lam)
                if err:
                    return MassCertificate(False, Fraction(0), False, depth,
                                           word, err)
                if d < depth:
                    kids = e.children(state, d, bud)
                    if mass.depth_value(d + 1) * len(kids) != lam:
                        return MassCertificate(False, Fraction(0), False, depth,
                                               word, "additivity fails")
                    for bit, child in kids:
                        nxt.setdefault(child, word + str(bit))
            if d < depth:
                frontier = set(nxt)
                words = nxt
        exact = (isinstance(e, FullCube) and h.symbolic is not None
                 and h.symbolic.t == 0 and h.symbolic.s <= 1)
        if isinstance(e, CISet):
            exact = _ci_mass_exact(e, h)
        return MassCertificate(True, mass.depth_value(0), exact, depth)

    # explicit table mass: walk the words
    stack = [("", e.root_state())]
    while stack:
        word, state = stack.pop()
        bud.spend()
        lam = mass.value_at(word)
        err = check_node(word, state, lam)
        if err:
            return MassCertificate(False, Fraction(0), False, depth, word, err)
        if len(word) < depth:
            kids = e.children(state, len(word), bud)
            child_sum = sum(mass.value_at(word + str(b)) for b, _ in kids)
            if child_sum != lam:
                return MassCertificate(False, Fraction(0), False, depth, word,
                                       "additivity fails")
            for bit, child in kids:
                stack.append((word + str(bit), child))
    return MassCertificate(True, mass.value_at(""), False, depth)


def sparse_I_builder(h: DyadicHFn, depth: int) -> ISpec:
    """An index set I with 2^|n cap I| <= h(2^-n) / 2^-n for all n <= depth.

    Requires h strictly above r (h < 1 in the gauge order).  Indices are
    admitted greedily while the inequality survives at every n <= depth.  A
    symbolic power r^s gets the exact periodic continuation of density 1-s
    (valid at every depth); other gauges get a sparse geometric tail whose
    validity is certified only up to `depth`.
    """
    from .hfun import power_hfn, precede

    verdict = precede(h, power_hfn(1, n_max=min(h.n_max, 96)),
                      depth=min(depth, h.n_max))
    if not verdict.holds:
        raise BuildError("sparse_I_builder needs h strictly above r (h < 1)")

    symbolic_s = h.symbolic.s if (h.symbolic and h.symbolic.t == 0) else None
    bits = []
    count = 0

    def admissible(j: int, cnt_after) -> bool:
        # cnt_after(n) = |n cap I| if we admit j; check every n in (j, depth]
        for n in range(j + 1, depth + 1):
            c = cnt_after(n)
            if symbolic_s is not None:
                if Fraction(c) > n * (1 - symbolic_s):
                    return False
            else:
                if n > h.n_max:
                    return False
                if not _gauge_covers(Fraction(1, 1 << (n - c)), h, n):
                    return False
        return True

    counts = [0] * (depth + 2)  # counts[n] = |n cap I| so far
    for j in range(depth):
        cand = lambda n, j=j: counts[n] + (1 if n > j else 0)
        if admissible(j, cand):
            bits.append("1")
            for n in range(j + 1, depth + 2):
                counts[n] += 1
        else:
            bits.append("0")
    prefix = "".join(bits)

    if symbolic_s is not None:
        frac = 1 - symbolic_s
        b = frac.denominator
        period = "".join(
            "1" if (o + 1) * frac.numerator // b > o * frac.numerator // b else "0"
            for o in range(b)
        )
        if "1" not in period:
            raise BuildError("gauge too close to r; no admissible period")
        return ISpec(prefix, ("periodic", period))
    return ISpec(prefix, ("powers", depth + 1, 4))


# ---------------------------------------------------------------------------
# Filtrations and the directed box content


@dataclass(frozen=True)
class Filtration:
    """Finitely many increasing tree sets X_0 <= X_1 <= ..."""

    sets: tuple

    def __post_init__(self):
        if not self.sets:
            raise ValueError("filtration needs at least one set")

    def validate(self, depth: int, budget: Budget | None = None) -> None:
        for k in range(len(self.sets) - 1):
            witness = is_trace_subset(self.sets[k], self.sets[k + 1], depth, budget)
            if witness is not None:
                raise BuildError(
                    f"non-monotone filtration: level {k} word {witness} "
                    f"escapes level {k + 1}")

    def __len__(self):
        return len(self.sets)


def trivial_filtration(e: TreeSet) -> Filtration:
    return Filtration((e,))


@dataclass(frozen=True)
class DboxReport:
    value: Fraction              # filtration-relative upper witness
    per_set: tuple               # (index, tail-inf upper bound)
    window: tuple


def dbox_on_filtration(f: Filtration, h: DyadicHFn, n_lo: int, n_hi: int,
                       budget: Budget | None = None) -> DboxReport:
    """sup over supplied levels of the tail-inf of N * h: an upper witness
    for the directed box content relative to this filtration."""
    bud = _budget(budget)
    f.validate(f.sets[0].depth_of_scale(n_hi), bud)
    per = []
    for k, x in enumerate(f.sets):
        seq = box_content_sequence(x, h, n_lo, n_hi, bud)
        per.append((k, seq.tail_inf))
    return DboxReport(max(v for _, v in per), tuple(per), (n_lo, n_hi))


@dataclass(frozen=True)
class ChainReport:
    ok: bool
    h_bounds: MeasureBound
    uh_alias: MeasureBound
    dbox_witness: Fraction
    ubox_tail_sup: Fraction
    failures: tuple

    def __bool__(self):
        return self.ok


def chain_check(e: TreeSet, h: DyadicHFn, m: int, depth: int,
                filtration: Filtration | None = None,
                budget: Budget | None = None) -> ChainReport:
    """Instance check of the measure chain H <= uH <= dbox <= ubox.

    uH is aliased to H (tree-coded sets are compact); the dbox value is the
    filtration-relative witness; box contents are tail-window statistics.
    """
    bud = _budget(budget)
    hb = hausdorff_measure_delta(e, h, m, depth, bud)
    filt = filtration or trivial_filtration(e)
    n_hi = e.scale_of_depth(depth)
    dbox = dbox_on_filtration(filt, h, m, n_hi, bud)
    seq = box_content_sequence(e, h, m, n_hi, bud)
    failures = []
    if hb.lower > hb.upper:
        failures.append("lower > upper")
    if hb.lower > dbox.value:
        failures.append("H lower exceeds dbox witness")
    if dbox.value > seq.tail_sup:
        failures.append("dbox witness exceeds ubox tail sup")
    best_single_scale = min(r[3] for r in seq.entries)
    if hb.upper > best_single_scale:
        failures.append("DP upper exceeds a single-scale trace cover")
    return ChainReport(not failures, hb, hb, dbox.value, seq.tail_sup,
                       tuple(failures))


# ---------------------------------------------------------------------------
# Product inequalities (box and Hausdorff versions)


@dataclass(frozen=True)
class ProductCheckReport:
    ok: bool
    counting_exact: bool          # N_prod(2^-n) == N_A * N_B at every n
    content_window_ok: bool       # sup(prod) <= sup(A) * sup(B)
    transport_ok: bool            # H-DP of product <= transported cover cost
    lower_product_ok: bool        # lowerA * lowerB <= upper of product
    finite_order_ok: bool
    empirical_c_upper: Fraction | None
    empirical_c_directed: Fraction | None
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.ok


def product_inequality_check(a: TreeSet, b: TreeSet, h: DyadicHFn, g: DyadicHFn,
                             n_lo: int, n_hi: int, m: int | None = None,
                             depth: int | None = None,
                             budget: Budget | None = None) -> ProductCheckReport:
    """Finite-depth instances of the product inequalities for box contents
    and Hausdorff bounds on interleaved tree products."""
    from .hfun import multiply
    from .treeset import product as make_product

    bud = _budget(budget)
    m = n_lo if m is None else m
    depth = depth if depth is not None else n_hi
    p = make_product(a, b)
    hg = multiply(h, g)

    counting = True
    for n in range(n_lo, n_hi + 1):
        if p.trace_count(2 * n, bud) != a.trace_count(n, bud) * b.trace_count(n, bud):
            counting = False
            break

    seq_a = box_content_sequence(a, h, n_lo, n_hi, bud)
    seq_b = box_content_sequence(b, g, n_lo, n_hi, bud)
    seq_p = box_content_sequence(p, hg, n_lo, n_hi, bud)
    window_ok = seq_p.tail_sup <= seq_a.tail_sup * seq_b.tail_sup

    bounds_a = hausdorff_measure_delta(a, h, m, depth, bud)
    bounds_b = hausdorff_measure_delta(b, g, m, depth, bud)
    bounds_p = hausdorff_measure_delta(p, hg, m, 2 * depth, bud)

    cover_a, _ = extract_optimal_cover(a, h, m, depth, bud)
    transported = Fraction(0)
    for word in cover_a:
        diam = a.local_diameter(word, depth + 64, bud)
        scale = min(diam.scale if not diam.is_point_to_depth else depth, depth)
        transported += h.hi_at(scale) * g.hi_at(scale) * b.trace_count(scale, bud)
    transport_ok = bounds_p.upper <= transported

    lower_ok = bounds_a.lower * bounds_b.lower <= bounds_p.upper

    fo = finite_order(h, min(64, h.n_max)).holds and finite_order(g, min(64, g.n_max)).holds

    c_upper = None
    c_directed = None
    if seq_p.tail_sup > 0:
        dbox_b = dbox_on_filtration(trivial_filtration(b), g, n_lo, n_hi, bud)
        c_upper = (seq_a.tail_sup * dbox_b.value) / seq_p.tail_sup
    if seq_p.tail_inf > 0:
        dbox_a = dbox_on_filtration(trivial_filtration(a), h, n_lo, n_hi, bud)
        dbox_b = dbox_on_filtration(trivial_filtration(b), g, n_lo, n_hi, bud)
        c_directed = (dbox_a.value * dbox_b.value) / seq_p.tail_inf

    ok = counting and window_ok and transport_ok and lower_ok
    return ProductCheckReport(ok, counting, window_ok, transport_ok, lower_ok,
                              fo, c_upper, c_directed,
                              {"upper_product": bounds_p.upper,
                               "transported": transported})


# ---------------------------------------------------------------------------
# Block-code images (Lipschitz / modulus instances)


class BlockCode:
    """A word map compatible with the tree structure."""

    name = "code"

    def image(self, e: TreeSet) -> TreeSet:
        raise NotImplementedError

    def apply_word(self, w: Word) -> Word:
        raise NotImplementedError


class IdentityCode(BlockCode):
    name = "identity"

    def image(self, e):
        return e

    def apply_word(self, w):
        return w


class _ShiftImage(TreeSet):
    kind = "shift_image"

    def __init__(self, e: TreeSet, k: int):
        super().__init__()
        self.base = e
        self.k = k

    def root_state(self):
        frontier = {self.base.root_state()}
        for d in range(self.k):
            frontier = {c for s in frontier for _, c in self.base.children(s, d)}
        return frozenset(frontier)

    def step(self, state, depth, bit):
        nxt = set()
        for s in state:
            child = self.base.step(s, depth + self.k, bit)
            if child is not None:
                nxt.add(child)
        return frozenset(nxt) or None

    def spec_dict(self):
        return {"kind": "shift_image", "k": self.k, "base": self.base.spec_dict()}


class ShiftCode(BlockCode):
    """Drop the first k coordinates; Lipschitz with constant 2^k."""

    def __init__(self, k: int = 1):
        self.k = k
        self.name = f"shift{k}"

    def image(self, e):
        return _ShiftImage(e, self.k)

    def apply_word(self, w):
        return w[self.k:]


class _RepeatImage(TreeSet):
    kind = "repeat_image"

    def __init__(self, e: TreeSet):
        super().__init__()
        self.base = e

    def root_state(self):
        return (self.base.root_state(), None)

    def step(self, state, depth, bit):
        s, pending = state
        if depth % 2 == 0:
            if self.base.step(s, depth // 2, bit) is None:
                return None
            return (s, bit)
        if bit != pending:
            return None
        child = self.base.step(s, depth // 2, bit)
        return None if child is None else (child, None)

    def spec_dict(self):
        return {"kind": "repeat_image", "base": self.base.spec_dict()}


class RepeatCode(BlockCode):
    """x maps to its bits each repeated twice; modulus g(r) = r^2."""

    name = "repeat2"

    def image(self, e):
        return _RepeatImage(e)

    def apply_word(self, w):
        return "".join(c * 2 for c in w)


@dataclass(frozen=True)
class LipschitzReport:
    ok: bool
    image_bound: MeasureBound
    transported_bound: Fraction
    detail: str = ""

    def __bool__(self):
        return self.ok


def lipschitz_image_check(e: TreeSet, code: BlockCode, h: DyadicHFn,
                          m: int, depth: int,
                          budget: Budget | None = None) -> LipschitzReport:
    """Check the image bound of a block code against the transported source
    bound: identity and shifts use the Lipschitz constant, the repeat code
    uses its modulus g(r) = r^2 through the composed gauge."""
    from .hfun import compose, power_hfn

    bud = _budget(budget)
    if isinstance(code, IdentityCode):
        src = hausdorff_measure_delta(e, h, m, depth, bud)
        img = hausdorff_measure_delta(code.image(e), h, m, depth, bud)
        return LipschitzReport(img.upper == src.upper, img, src.upper, "identity")
    if isinstance(code, ShiftCode):
        k = code.k
        if m <= k:
            raise ValueError("shift check needs scale m > k")
        src = hausdorff_measure_delta(e, h, m, depth, bud)
        img = hausdorff_measure_delta(code.image(e), h, m - k, depth - k, bud)
        if h.symbolic is None or h.symbolic.t != 0:
            raise ValueError("shift check wants a symbolic power gauge")
        from .hfun import pow2_bounds
        l_pow = pow2_bounds(h.symbolic.s * k, h.precision)[1]
        transported = l_pow * src.upper
        return LipschitzReport(img.upper <= transported, img, transported,
                               f"L=2^{k}")
    if isinstance(code, RepeatCode):
        img_set = code.image(e)
        img = hausdorff_measure_delta(img_set, h, 2 * m, 2 * depth, bud)
        hg = compose(h, power_hfn(2, n_max=max(depth, h.n_max)))
        src = hausdorff_measure_delta(e, hg, m, depth, bud)
        return LipschitzReport(img.upper <= src.upper, img, src.upper,
                               "modulus r^2")
    raise ValueError(f"unsupported code {code.name}")


def verify_code_modulus(e: TreeSet, code: BlockCode, depth: int,
                        budget: Budget | None = None) -> bool:
    """Exhaustively confirm the declared modulus on trace pairs to `depth`."""
    bud = _budget(budget)
    words = e.trace(depth, bud)
    for i, wa in enumerate(words):
        for wb in words[i + 1:]:
            na = next((t for t in range(depth) if wa[t] != wb[t]), depth)
            fa, fb = code.apply_word(wa), code.apply_word(wb)
            nf = next((t for t in range(len(fa)) if fa[t] != fb[t]), len(fa))
            if isinstance(code, ShiftCode):
                if nf < na - code.k:
                    return False
            elif isinstance(code, RepeatCode):
                if nf < 2 * na:
                    return False
            elif isinstance(code, IdentityCode):
                if nf != na:
                    return False
    return True


# ---------------------------------------------------------------------------
# Increasing-sets splitting


def increasing_sets_split(e: TreeSet, h: DyadicHFn, s: Fraction, depth: int,
                          candidate: Filtration | None = None,
                          budget: Budget | None = None) -> Filtration:
    """A filtration of E whose per-level box contents stay below s.

    Uses the supplied candidate, the set's natural filtration (attached by
    the witness pipelines), or the trivial one; raises when no level
    structure keeps the window content under s.
    """
    s = Fraction(s)
    bud = _budget(budget)
    filt = candidate or e.natural_filtration or trivial_filtration(e)
    if not isinstance(filt, Filtration):
        filt = Filtration(tuple(filt))
    n_hi = e.scale_of_depth(depth)
    n_lo = max(0, n_hi // 2)
    for k, x in enumerate(filt.sets):
        seq = box_content_sequence(x, h, n_lo, n_hi, bud)
        if not seq.tail_sup < s:
            raise BuildError(
                f"level {k} window content {seq.tail_sup} is not below {s}")
    filt.validate(n_hi, bud)
    return filt
