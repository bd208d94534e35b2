"""Cylinder covers: lambda / gamma-groupable verification and builders.

Covers store only cylinder words; in the ultrametric this is lossless (any
covering set sits inside a cylinder of the same diameter) and keeps all
diameter arithmetic exact.  "All but finitely many" verdicts are always
truncation-parameterized by a group horizon J and a trace depth D; the
toolkit never claims an infinite-horizon verdict.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import BuildError, SpecFormatError
from .hfun import DyadicHFn, grid_index_floor
from .measures import Filtration, extract_optimal_cover
from .treeset import Budget, CylinderUnionSet, TreeSet, _budget, is_trace_subset
from .words import Word, check_word, interleave


@dataclass(frozen=True)
class Cover:
    """A finite cylinder cover, optionally grouped and eps-tagged.

    ``groups`` are half-open index intervals [a, b) partitioning an initial
    segment of the element list, in order; ``eps`` tags the per-element
    fineness targets d(U_n) <= eps_n.  ``group_offset`` records the true
    index of the first group when the cover realizes a tail of witnessing
    groups (size bounds like |G_j| <= j count from there).
    """

    elements: tuple
    groups: tuple | None = None
    eps: tuple | None = None
    group_offset: int = 0

    def __post_init__(self):
        for w in self.elements:
            check_word(w)
        if self.groups is not None:
            pos = 0
            for a, b in self.groups:
                if a != pos or b < a:
                    raise SpecFormatError("groups must partition an initial segment in order")
                pos = b
            if pos > len(self.elements):
                raise SpecFormatError("groups overrun the element list")
        if self.eps is not None and len(self.eps) < len(self.elements):
            raise SpecFormatError("eps sequence shorter than the element list")

    @property
    def group_count(self) -> int:
        return len(self.groups) if self.groups else 0

    def group_elements(self, j: int):
        a, b = self.groups[j]
        return self.elements[a:b]

    def diameters(self, interleaved: bool = False):
        return tuple(Fraction(1, 1 << (len(w) // 2 if interleaved else len(w)))
                     for w in self.elements)

    def check_fineness(self, interleaved: bool = False):
        """Exact per-index check of d(U_n) <= eps_n; returns first bad index."""
        if self.eps is None:
            raise SpecFormatError("cover carries no eps sequence")
        for i, d in enumerate(self.diameters(interleaved)):
            if d > self.eps[i]:
                return i
        return None


def is_cover_at_depth(e: TreeSet, elements, n: int,
                      budget: Budget | None = None) -> bool:
    """Every depth-n trace node of E lies under some listed cylinder."""
    elems = [w for w in elements if len(w) <= n]
    if not elems:
        return False
    automaton = CylinderUnionSet(elems, interleaved=e.interleaved)
    return is_trace_subset(e, automaton, n, budget) is None


@dataclass(frozen=True)
class LambdaVerdict:
    status: str          # "holds" | "fails"
    horizon: int         # J
    depth: int
    failure_index: int | None = None

    @property
    def holds(self) -> bool:
        return self.status == "holds"


def verify_lambda(e: TreeSet, cover: Cover, horizon: int, depth: int,
                  budget: Budget | None = None) -> LambdaVerdict:
    """Truncated lambda-cover criterion: for each j <= J the tail
    {U_n : n >= j} still covers E at the trace depth."""
    bud = _budget(budget)
    for j in range(horizon + 1):
        if not is_cover_at_depth(e, cover.elements[j:], depth, bud):
            return LambdaVerdict("fails", horizon, depth, j)
    return LambdaVerdict("holds", horizon, depth)


@dataclass(frozen=True)
class GammaVerdict:
    status: str                 # "holds" | "fails"
    j0: int | None              # least group index from which all groups cover
    horizon: int
    depth: int
    group_failures: tuple = ()

    @property
    def holds(self) -> bool:
        return self.status == "holds"


def verify_gamma_groupable(e: TreeSet, cover: Cover, horizon: int, depth: int,
                           budget: Budget | None = None) -> GammaVerdict:
    """Find the least j0 such that every group in [j0, J] covers E at depth D.

    The per-group failure list isolates broken groups even when a later
    suffix still qualifies.
    """
    if cover.groups is None:
        raise SpecFormatError("cover carries no witnessing groups")
    bud = _budget(budget)
    top = min(horizon, cover.group_count - 1)
    ok = []
    for j in range(top + 1):
        ok.append(is_cover_at_depth(e, cover.group_elements(j), depth, bud))
    failures = tuple(j for j, good in enumerate(ok) if not good)
    j0 = top + 1
    while j0 > 0 and ok[j0 - 1]:
        j0 -= 1
    if j0 > top:
        return GammaVerdict("fails", None, top, depth, failures)
    return GammaVerdict("holds", j0, top, depth, failures)


def gamma_grouped_sum(cover: Cover, h: DyadicHFn, interleaved: bool = False):
    """Exact partial Hausdorff sum of the cover plus per-group subtotals.

    Uses the certified upper samples of the gauge, so the returned values
    bound the true sums from above (and are exact for exact gauges).
    """
    per_elem = [h.hi_at(len(w) // 2 if interleaved else len(w))
                for w in cover.elements]
    total = sum(per_elem, Fraction(0))
    groups = []
    if cover.groups:
        for a, b in cover.groups:
            groups.append(sum(per_elem[a:b], Fraction(0)))
    return total, tuple(groups)


# ---------------------------------------------------------------------------
# Builders


def epsilons_for_gauge(h: DyadicHFn, count: int):
    """A fineness sequence with h(eps_n) <= 2^-n (1-based), read off the grid."""
    out = []
    idx = 0
    for n in range(1, count + 1):
        target = Fraction(1, 1 << n)
        while idx <= h.n_max and h.hi_at(idx) > target:
            idx += 1
        if idx > h.n_max:
            raise BuildError(f"gauge table bottoms out before h <= 2^-{n}")
        out.append(Fraction(1, 1 << idx))
    return tuple(out)


def build_fine_lambda(e: TreeSet, eps, h: DyadicHFn, witness: Cover,
                      horizon: int = 8, depth: int = 16,
                      budget: Budget | None = None) -> Cover:
    """Sort a small-sum lambda-cover into an eps-fine one.

    Preconditions follow the sorting argument: h comes from
    hfn_from_epsilons(eps) so h(eps_n) >= 1/(n+1) at index n, and the
    witness's Hausdorff sum is below 1 (callers rescale their witness by
    taking a deeper null cover when it is not).  Sorting by nonincreasing
    diameter then forces d(U_n) <= eps_n, which is re-checked exactly.
    """
    bud = _budget(budget)
    eps = tuple(Fraction(x) for x in eps)
    lam = verify_lambda(e, witness, horizon, depth, bud)
    if not lam.holds:
        raise BuildError(f"witness is not a lambda-cover (tail {lam.failure_index})")
    elems = sorted(witness.elements, key=len)  # nonincreasing diameter
    total = sum(h.hi_at(len(w)) for w in elems)
    if total >= 1:
        raise BuildError(f"witness Hausdorff sum {total} is not below 1")
    if len(eps) < len(elems):
        raise BuildError("eps sequence shorter than the witness")
    out = Cover(tuple(elems), None, eps)
    bad = out.check_fineness()
    if bad is not None:
        raise BuildError(f"fineness failed at index {bad} "
                         f"(diameter {Fraction(1, 1 << len(elems[bad]))} > eps)")
    return out


def build_gamma_groupable(filtration: Filtration, h: DyadicHFn,
                          level_covers=None, max_scale: int = 48,
                          horizon: int = 16, depth: int = 24,
                          budget: Budget | None = None) -> Cover:
    """Concatenate per-level covers of cost < 2^-n into a grouped cover.

    Level covers are taken from the DP argmin at the shallowest scale whose
    cost clears the threshold; the total Hausdorff sum stays below 2 and the
    gamma-groupable verdict is re-checked against the filtration's top set.
    """
    bud = _budget(budget)
    elements: list[Word] = []
    groups = []
    for n, x in enumerate(filtration.sets):
        threshold = Fraction(1, 1 << n)
        if level_covers is not None:
            cyls = tuple(level_covers[n])
            cost = sum(h.hi_at(len(w)) for w in cyls)
            if cost >= threshold:
                raise BuildError(f"level {n} cover cost {cost} >= 2^-{n}")
        else:
            cyls = None
            for m in range(n + 1, max_scale + 1):
                if m > h.n_max:
                    break
                cand, cost = extract_optimal_cover(x, h, m, min(m + 8, max_scale), bud)
                if cost < threshold:
                    cyls = tuple(cand)
                    break
            if cyls is None:
                raise BuildError(f"no level-{n} cover of cost below 2^-{n} "
                                 f"within scale {max_scale}")
        groups.append((len(elements), len(elements) + len(cyls)))
        elements.extend(cyls)
    cover = Cover(tuple(elements), tuple(groups))
    total, _ = gamma_grouped_sum(cover, h)
    if not total < 2:
        raise BuildError(f"total Hausdorff sum {total} is not below 2")
    check_depth = max(depth, max(len(w) for w in elements))
    verdict = verify_gamma_groupable(filtration.sets[-1], cover,
                                     len(filtration) - 1, check_depth, bud)
    if not verdict.holds:
        raise BuildError(f"grouped cover failed verification: {verdict}")
    return cover


def build_bounded_groups(filtration: Filtration, g: DyadicHFn, eps,
                         horizon: int | None = None, depth: int = 32,
                         budget: Budget | None = None) -> Cover:
    """Groups of size |G_j| <= j via the compressed scale sequence.

    delta_n = eps_{0+1+...+n} after sorting eps decreasing; each level k gets
    groups at the scales n in [n_k, n_{k+1}) where its content clears
    N * g < 1, and the proof's ordering makes the concatenated cover
    eps-fine.  Requires g(delta_n) > 1/n on the used range.
    """
    bud = _budget(budget)
    eps = sorted((Fraction(x) for x in eps), reverse=True)
    triangle = []
    t = 0
    for n in range(len(eps)):
        t += n
        if t >= len(eps):
            break
        triangle.append(eps[t])  # delta_n = eps_{0+1+...+n}
    if horizon is None:
        horizon = len(triangle) - 1
    if horizon >= len(triangle):
        raise BuildError("eps sequence too short for the requested horizon")
    deltas = triangle[:horizon + 1]
    scales = [grid_index_floor(d) for d in deltas]
    for n in range(1, len(deltas)):
        if scales[n] > g.n_max:
            raise BuildError("gauge table too short for the compressed scales")
        if not g.lo_at(scales[n]) * n > 1:
            raise BuildError(f"precondition g(delta_{n}) > 1/{n} fails")

    levels = filtration.sets
    n_marks = []
    cursor = 1
    for k, x in enumerate(levels):
        found = None
        for n in range(cursor, len(deltas)):
            if all(
                levels[k].trace_count(levels[k].depth_of_scale(scales[n2]), bud)
                * g.hi_at(scales[n2]) < 1
                for n2 in range(n, len(deltas))
            ):
                found = n
                break
        if found is None:
            raise BuildError(f"no content witness for level {k} within the horizon")
        n_marks.append(found)
        cursor = found + 1

    elements: list[Word] = []
    groups = []
    eps_tags: list[Fraction] = []
    for j in range(n_marks[0], len(deltas)):
        k = max(i for i, nm in enumerate(n_marks) if nm <= j)
        x = levels[k]
        cyls = x.trace(x.depth_of_scale(scales[j]), bud)
        if not len(cyls) <= j:
            raise BuildError(f"group {j} has {len(cyls)} > {j} elements")
        groups.append((len(elements), len(elements) + len(cyls)))
        for w in cyls:
            elements.append(w)
            eps_tags.append(eps[len(eps_tags)])
    cover = Cover(tuple(elements), tuple(groups), tuple(eps_tags),
                  group_offset=n_marks[0])
    bad = cover.check_fineness(levels[0].interleaved)
    if bad is not None:
        raise BuildError(f"eps-fineness failed at element {bad}")
    check_depth = max(depth, max(len(w) for w in elements))
    verdict = verify_gamma_groupable(levels[-1], cover, len(groups) - 1,
                                     check_depth, bud)
    if not verdict.holds:
        raise BuildError(f"bounded-group cover failed verification: {verdict}")
    return cover


# ---------------------------------------------------------------------------
# Family-style witnesses (gamma-covers of family unions)


@dataclass(frozen=True)
class FamilyVerdict:
    status: str
    n0: int | None
    horizon: int
    depth: int
    fineness_failures: tuple = ()
    size_failures: tuple = ()
    coverage_failures: tuple = ()

    @property
    def holds(self) -> bool:
        return self.status == "holds"


def _f_bound(f_bound, n: int) -> int:
    return f_bound(n) if callable(f_bound) else f_bound[n]


def verify_combPnull_witness(e: TreeSet, eps, families, f_bound,
                             horizon: int, depth: int,
                             budget: Budget | None = None) -> FamilyVerdict:
    """Families F_n with d(F_n) <= eps_n, |F_n| <= f(n), whose unions form a
    gamma-cover of E at truncation (J, D)."""
    bud = _budget(budget)
    eps = [Fraction(x) for x in eps]
    top = min(horizon, len(families) - 1)
    fine_bad, size_bad, cover_bad = [], [], []
    covered = []
    for n in range(top + 1):
        fam = families[n]
        if any(Fraction(1, 1 << len(w)) > eps[n] for w in fam):
            fine_bad.append(n)
        if len(fam) > _f_bound(f_bound, n):
            size_bad.append(n)
        covered.append(bool(fam) and is_cover_at_depth(e, fam, depth, bud))
    n0 = top + 1
    while n0 > 0 and covered[n0 - 1]:
        n0 -= 1
    cover_bad = [n for n in range(top + 1) if not covered[n]]
    ok = not fine_bad and not size_bad and n0 <= top
    return FamilyVerdict("holds" if ok else "fails", n0 if n0 <= top else None,
                         top, depth, tuple(fine_bad), tuple(size_bad),
                         tuple(cover_bad))


def verify_combDnull_witness(e: TreeSet, eps, index_set, families, f_bound,
                             horizon: int, depth: int,
                             budget: Budget | None = None) -> FamilyVerdict:
    """The directed variant: the same checks restricted to n in I."""
    bud = _budget(budget)
    eps = [Fraction(x) for x in eps]
    idx = [n for n in sorted(index_set) if n <= horizon]
    fine_bad, size_bad = [], []
    covered = {}
    for n in idx:
        fam = families[n]
        if any(Fraction(1, 1 << len(w)) > eps[n] for w in fam):
            fine_bad.append(n)
        if len(fam) > _f_bound(f_bound, n):
            size_bad.append(n)
        covered[n] = bool(fam) and is_cover_at_depth(e, fam, depth, bud)
    n0 = None
    for i in range(len(idx) + 1):
        if all(covered[n] for n in idx[i:]):
            n0 = idx[i] if i < len(idx) else None
            break
    cover_bad = tuple(n for n in idx if not covered[n])
    ok = not fine_bad and not size_bad and n0 is not None
    return FamilyVerdict("holds" if ok else "fails", n0, horizon, depth,
                         tuple(fine_bad), tuple(size_bad), cover_bad)


@dataclass(frozen=True)
class DpNullWitness:
    """(eps, I, families along I) for one set."""

    eps: tuple
    index_set: tuple
    families: dict

    def family(self, n: int):
        return self.families[n]


def build_dpnull_witness(filtration: Filtration, eps,
                         budget: Budget | None = None) -> DpNullWitness:
    """Realize the directed combinatorial witness from a filtration.

    Each level k gets a threshold m_k, the first eps index past m_{k-1}
    where N_{X_k}(eps_n) <= n holds; the index set collects every later n
    where the deepest applicable level still clears the bound, with the
    family given by that level's trace cylinders at the snapped scale.
    Levels beyond their threshold are covered by every later family, which
    is what the gamma-tail condition needs.
    """
    bud = _budget(budget)
    eps = tuple(Fraction(x) for x in eps)
    levels = filtration.sets
    thresholds = []
    cursor = 1
    for k, x in enumerate(levels):
        found = None
        for n in range(cursor, len(eps)):
            scale = grid_index_floor(eps[n])
            if x.trace_count(x.depth_of_scale(scale), bud) <= n:
                found = n
                break
        if found is None:
            raise BuildError(f"no eps index with N_(level {k}) <= n available")
        thresholds.append(found)
        cursor = found + 1
    index_set = []
    families = {}
    for n in range(thresholds[0], len(eps)):
        k = max(i for i, t in enumerate(thresholds) if t <= n)
        x = levels[k]
        scale = grid_index_floor(eps[n])
        if x.trace_count(x.depth_of_scale(scale), bud) <= n:
            families[n] = tuple(x.trace(x.depth_of_scale(scale), bud))
            index_set.append(n)
    return DpNullWitness(eps, tuple(index_set), families)


def merge_diagonal(witnesses, budget: Budget | None = None) -> DpNullWitness:
    """Diagonal merge of directed witnesses over a shared eps sequence.

    Picks increasing indices n_i >= i+1 common to the first i+1 index sets
    and unions their families; group sizes obey |G_i| <= n_i^2 and the
    merged witness verifies against the union set with f(n) = n^2.
    """
    ws = list(witnesses)
    if not ws:
        raise BuildError("nothing to merge")
    eps0 = ws[0].eps
    for w in ws:
        if w.eps != eps0:
            raise BuildError("mismatched eps sequences")
    merged_idx = []
    merged_fams = {}
    prev = 0
    for i in range(len(ws)):
        pool = set(ws[0].index_set)
        for w in ws[1:i + 1]:
            pool &= set(w.index_set)
        cands = sorted(n for n in pool if n > prev and n >= i + 1)
        if not cands:
            raise BuildError(f"no common index available at diagonal step {i}")
        n_i = cands[0]
        fam = []
        for w in ws[:i + 1]:
            fam.extend(w.families[n_i])
        fam = tuple(dict.fromkeys(fam))
        if len(fam) > n_i * n_i:
            raise BuildError(f"merged group at {n_i} exceeds n^2")
        merged_idx.append(n_i)
        merged_fams[n_i] = fam
        prev = n_i
    return DpNullWitness(eps0, tuple(merged_idx), merged_fams)


# ---------------------------------------------------------------------------
# Product covers


def product_cover(v_elements, u_cover: Cover, h: DyadicHFn,
                  product_set: TreeSet | None = None, depth: int | None = None,
                  budget: Budget | None = None) -> Cover:
    """The W-cover {V_j x U : U in group j} on the interleaved coding.

    Requires d(V_j) <= min{d(U) : U in group j}; each rectangle is realized
    as the interleaved cylinder of the trimmed pair (trimming the finer
    V-word preserves both coverage and the diameter d(U)), so the Hausdorff
    sum equals the U-side sum exactly.
    """
    if u_cover.groups is None:
        raise SpecFormatError("the U-cover must carry witnessing groups")
    bud = _budget(budget)
    elements = []
    groups = []
    for j in range(u_cover.group_count):
        us = u_cover.group_elements(j)
        if not us:
            raise BuildError(f"group {j} of the U-cover is empty")
        eps_j = min(len(u) for u in us)
        if j >= len(v_elements):
            raise BuildError("V-cover shorter than the U-groups")
        v = v_elements[j]
        if len(v) < eps_j:
            raise BuildError(
                f"fineness mismatch: d(V_{j}) = 2^-{len(v)} > 2^-{eps_j}")
        start = len(elements)
        for u in us:
            elements.append(interleave(v[:len(u)], u))
        groups.append((start, len(elements)))
    cover = Cover(tuple(elements), tuple(groups))
    u_sum, _ = gamma_grouped_sum(u_cover, h)
    w_sum, _ = gamma_grouped_sum(cover, h, interleaved=True)
    if w_sum != u_sum:
        raise AssertionError("product cover sum drifted from the U-side sum")
    if product_set is not None and depth is not None:
        if not is_cover_at_depth(product_set, cover.elements, depth, bud):
            raise BuildError("product cover fails coverage at the check depth")
    return cover
