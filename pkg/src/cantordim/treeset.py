"""Tree-coded nonempty closed subsets of the Cantor cube.

Every set kind is presented as a deterministic tree automaton: a hashable
node state, a root state, and a ``step(state, depth, bit)`` transition that
returns the child state or None.  The depth-n trace of the automaton is, for
every kind, exactly the set of depth-n prefixes of points of the coded closed
set, so traces, covering numbers and branching diameters are exact.

States collapse isomorphic subtrees, which is what makes depth-64 work on
constraint sets cheap while sumsets and unions degrade gracefully into the
node budget.

Product sets use even/odd index interleaving (factor A on even indices) and
carry the max-metric scale map: a depth-d cylinder of a product has metric
diameter 2^-(d//2).  Plain sets have scale(d) = d.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ResourceLimitError, SpecFormatError
from .words import ISpec, Word, check_word

DEFAULT_NODE_BUDGET = 1 << 22


class Budget:
    """Counts automaton work; raises once the configured limit is crossed."""

    def __init__(self, limit: int = DEFAULT_NODE_BUDGET):
        self.limit = limit
        self.used = 0

    def spend(self, amount: int = 1) -> None:
        self.used += amount
        if self.used > self.limit:
            raise ResourceLimitError(
                f"node budget exceeded ({self.used} > {self.limit})"
            )


def _budget(budget: Budget | None) -> Budget:
    return budget if budget is not None else Budget()


class Diameter:
    """Local diameter of E  [p]: an exact dyadic, or 'point to depth D'."""

    __slots__ = ("branch_depth", "scale", "horizon")

    def __init__(self, branch_depth: int | None, scale: int | None, horizon: int):
        self.branch_depth = branch_depth
        self.scale = scale
        self.horizon = horizon

    @property
    def is_point_to_depth(self) -> bool:
        return self.branch_depth is None

    @property
    def value(self) -> Fraction:
        if self.is_point_to_depth:
            raise ValueError("no branching up to the horizon; diameter unresolved")
        return Fraction(1, 1 << self.scale)

    def __repr__(self):
        if self.is_point_to_depth:
            return f"Diameter(point-to-depth-{self.horizon})"
        return f"Diameter(2^-{self.scale})"


class TreeSet:
    """Base class; subclasses define root_state/step and a kind tag."""

    kind = "abstract"
    interleaved = False

    def __init__(self):
        self._children_cache: dict = {}
        self.natural_filtration = None  # optionally set by witness pipelines

    # -- automaton interface ------------------------------------------------

    def root_state(self):
        raise NotImplementedError

    def step(self, state, depth: int, bit: int):
        raise NotImplementedError

    def children(self, state, depth: int, budget: Budget | None = None):
        key = (state, depth)
        hit = self._children_cache.get(key)
        if hit is None:
            if budget is not None:
                budget.spend()
            hit = tuple(
                (b, s) for b in (0, 1) if (s := self.step(state, depth, b)) is not None
            )
            self._children_cache[key] = hit
        return hit

    # -- scale map -----------------------------------------------------------

    def scale_of_depth(self, d: int) -> int:
        return d // 2 if self.interleaved else d

    def depth_of_scale(self, n: int) -> int:
        return 2 * n if self.interleaved else n

    # -- queries --------------------------------------------------------------

    def state_at(self, p: Word, budget: Budget | None = None):
        """State of the node p, or None when [p] misses the set."""
        check_word(p)
        bud = _budget(budget)
        state = self.root_state()
        for d, c in enumerate(p):
            bud.spend()
            state = self.step(state, d, int(c))
            if state is None:
                return None
        return state

    def meets(self, p: Word, budget: Budget | None = None) -> bool:
        """True iff the cylinder [p] intersects the coded set."""
        return self.state_at(p, budget) is not None

    def trace(self, n: int, budget: Budget | None = None) -> list[Word]:
        """All depth-n prefixes of points of the set, in sorted order."""
        if n < 0:
            raise ValueError("depth must be nonnegative")
        bud = _budget(budget)
        out: list[Word] = []
        stack = [("", self.root_state())]
        while stack:
            word, state = stack.pop()
            if len(word) == n:
                out.append(word)
                continue
            # push bit 1 first so the left branch is expanded first
            for bit, child in reversed(self.children(state, len(word), bud)):
                bud.spend()
                stack.append((word + str(bit), child))
        out.sort()
        return out

    def trace_count(self, n: int, budget: Budget | None = None) -> int:
        """|trace_n|, computed by state-collapsed path counting."""
        bud = _budget(budget)
        memo: dict = {}

        def count(state, d: int) -> int:
            if d == n:
                return 1
            key = (state, d)
            hit = memo.get(key)
            if hit is None:
                bud.spend()
                hit = sum(count(s, d + 1) for _, s in self.children(state, d, bud))
                memo[key] = hit
            return hit

        return count(self.root_state(), 0)

    def first_branch(self, state, depth: int, horizon: int,
                     budget: Budget | None = None) -> int | None:
        """Least depth >= `depth` where the subtree splits, up to horizon."""
        bud = _budget(budget)
        d = depth
        while d < horizon:
            kids = self.children(state, d, bud)
            if len(kids) == 2:
                return d
            state = kids[0][1]
            d += 1
        return None

    def local_diameter(self, p: Word, maxdepth: int,
                       budget: Budget | None = None) -> Diameter:
        """Diameter of E  [p]: 2^-scale(b) at the first branching depth b."""
        state = self.state_at(p, budget)
        if state is None:
            raise ValueError(f"[{p}] does not meet the set")
        b = self.first_branch(state, len(p), maxdepth, budget)
        if b is None:
            return Diameter(None, None, maxdepth)
        return Diameter(b, self.scale_of_depth(b), maxdepth)

    def spec_dict(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"<TreeSet {self.kind}>"


# ---------------------------------------------------------------------------
# Concrete kinds


class FullCube(TreeSet):
    kind = "full_cube"

    def root_state(self):
        return ()

    def step(self, state, depth, bit):
        return ()

    def spec_dict(self):
        return {"kind": "full_cube"}


class CISet(TreeSet):
    """C_I = {x : x restricted to I is identically 0}."""

    kind = "ci"

    def __init__(self, ispec: ISpec):
        super().__init__()
        self.ispec = ispec

    def root_state(self):
        return ()

    def step(self, state, depth, bit):
        if bit == 1 and self.ispec.contains(depth):
            return None
        return ()

    def spec_dict(self):
        out = {"kind": "ci"}
        kind = self.ispec.tail[0]
        if kind == "periodic":
            out["I"] = {"preperiod": self.ispec.prefix, "period": self.ispec.tail[1]}
        elif kind == "powers":
            _, c, q = self.ispec.tail
            out["I"] = {"prefix": self.ispec.prefix, "powers": {"c": c, "q": q}}
        else:
            _, c, d, q = self.ispec.tail
            out["I"] = {"blocks": {"c": c, "d": d, "q": q}}
        return out


class BlockConstraintSet(TreeSet):
    """Per-block pattern constraints on disjoint index intervals.

    Bits below the first boundary and beyond the last are free, and a block
    whose pattern set is None is an unconstrained gap.  The state inside a
    constrained block is the set of pattern suffixes still consistent with
    the bits chosen so far; emptiness at construction is rejected since
    coded sets must be nonempty.
    """

    kind = "block_constraint"

    def __init__(self, boundaries: list[int], blocks: list):
        super().__init__()
        if len(boundaries) != len(blocks) + 1:
            raise SpecFormatError("need len(boundaries) == len(blocks) + 1")
        if any(b >= c for b, c in zip(boundaries, boundaries[1:])) or boundaries[0] < 0:
            raise SpecFormatError("block boundaries must be strictly increasing and nonnegative")
        frozen = []
        for j, patterns in enumerate(blocks):
            if patterns is None:
                frozen.append(None)
                continue
            width = boundaries[j + 1] - boundaries[j]
            pats = frozenset(check_word(p) for p in patterns)
            if not pats:
                raise SpecFormatError(f"block {j} has no allowed patterns (empty survivor)")
            if any(len(p) != width for p in pats):
                raise SpecFormatError(f"block {j} patterns must have length {width}")
            frozen.append(pats)
        self.boundaries = tuple(boundaries)
        self.blocks = tuple(frozen)

    def _block_index(self, depth: int) -> int | None:
        bs = self.boundaries
        if depth < bs[0] or depth >= bs[-1]:
            return None
        # blocks are few at desk scale; linear scan is fine
        for j in range(len(self.blocks)):
            if bs[j] <= depth < bs[j + 1]:
                return j
        return None

    def root_state(self):
        return ("free",)

    def step(self, state, depth, bit):
        j = self._block_index(depth)
        if j is None or self.blocks[j] is None:
            return ("free",)
        if depth == self.boundaries[j]:
            suffixes = self.blocks[j]
        else:
            if state[0] != "in":
                raise AssertionError("block-constraint automaton desynchronized")
            suffixes = state[1]
        nxt = frozenset(s[1:] for s in suffixes if s and s[0] == str(bit))
        if not nxt and not any(s and s[0] == str(bit) for s in suffixes):
            return None
        if depth + 1 == self.boundaries[j + 1]:
            return ("free",)
        return ("in", nxt)

    def spec_dict(self):
        return {
            "kind": "block_constraint",
            "boundaries": list(self.boundaries),
            "blocks": [None if b is None else sorted(b) for b in self.blocks],
        }


class ExplicitSet(TreeSet):
    """A set given by its depth-D trace.

    ``tail='zeros'`` codes the finite point set {w followed by zeros};
    ``tail='free'`` codes the clopen union of the cylinders [w].
    """

    kind = "explicit"

    def __init__(self, words, tail: str = "zeros"):
        super().__init__()
        ws = frozenset(check_word(w) for w in words)
        if not ws:
            raise SpecFormatError("explicit set needs at least one word")
        lengths = {len(w) for w in ws}
        if len(lengths) != 1:
            raise SpecFormatError("explicit set words must share one length")
        if tail not in ("zeros", "free"):
            raise SpecFormatError("tail must be 'zeros' or 'free'")
        self.words = ws
        self.depth = lengths.pop()
        self.tail = tail

    def root_state(self):
        return frozenset(self.words)

    def step(self, state, depth, bit):
        if depth >= self.depth:
            if self.tail == "free":
                return state
            return state if bit == 0 else None
        nxt = frozenset(w[1:] for w in state if w[0] == str(bit))
        return nxt or None

    def spec_dict(self):
        return {"kind": "explicit", "words": sorted(self.words), "tail": self.tail}


class SumSet(TreeSet):
    """A + B, coordinatewise mod-2 sum.

    State is the set of factor state pairs reachable by decompositions of the
    current node word; the trace identity trace_n(A+B) = {q xor r} holds by
    construction.  Can be exponential in depth, hence the budget.
    """

    kind = "sumset"

    def __init__(self, a: TreeSet, b: TreeSet):
        super().__init__()
        if a.interleaved != b.interleaved:
            raise SpecFormatError("sumset operands must share the scale convention")
        self.a = a
        self.b = b
        self.interleaved = a.interleaved

    def root_state(self):
        return frozenset({(self.a.root_state(), self.b.root_state())})

    def step(self, state, depth, bit):
        nxt = set()
        for sa, sb in state:
            for ba, ca in self.a.children(sa, depth):
                for bb, cb in self.b.children(sb, depth):
                    if ba ^ bb == bit:
                        nxt.add((ca, cb))
        return frozenset(nxt) or None

    def spec_dict(self):
        return {"kind": "sumset", "a": self.a.spec_dict(), "b": self.b.spec_dict()}


class ProductSet(TreeSet):
    """A x B via index interleaving; realizes the max metric at dyadic scales."""

    kind = "product"
    interleaved = True

    def __init__(self, a: TreeSet, b: TreeSet):
        super().__init__()
        if a.interleaved or b.interleaved:
            raise SpecFormatError("product factors must be plain (non-interleaved) sets")
        self.a = a
        self.b = b

    def root_state(self):
        return (self.a.root_state(), self.b.root_state())

    def step(self, state, depth, bit):
        sa, sb = state
        if depth % 2 == 0:
            nxt = self.a.step(sa, depth // 2, bit)
            return None if nxt is None else (nxt, sb)
        nxt = self.b.step(sb, depth // 2, bit)
        return None if nxt is None else (sa, nxt)

    def spec_dict(self):
        return {"kind": "product", "a": self.a.spec_dict(), "b": self.b.spec_dict()}


class UnionSet(TreeSet):
    kind = "union"

    def __init__(self, members: list[TreeSet]):
        super().__init__()
        if not members:
            raise SpecFormatError("union needs at least one member")
        if len({m.interleaved for m in members}) != 1:
            raise SpecFormatError("union members must share the scale convention")
        self.members = tuple(members)
        self.interleaved = members[0].interleaved

    def root_state(self):
        return frozenset((i, m.root_state()) for i, m in enumerate(self.members))

    def step(self, state, depth, bit):
        nxt = set()
        for i, s in state:
            child = self.members[i].step(s, depth, bit)
            if child is not None:
                nxt.add((i, child))
        return frozenset(nxt) or None

    def spec_dict(self):
        return {"kind": "union", "members": [m.spec_dict() for m in self.members]}


class CylinderUnionSet(TreeSet):
    """The clopen union of finitely many cylinders (free tails).

    Used as the coverage automaton: a node is absorbed once some cylinder's
    word has been consumed as a prefix.  The scale convention of the space
    the cylinders live in is carried through so product-set coverage checks
    line up.
    """

    kind = "cylinder_union"

    def __init__(self, cylinders, interleaved: bool = False):
        super().__init__()
        cyls = frozenset(check_word(c) for c in cylinders)
        if not cyls:
            raise SpecFormatError("cylinder union needs at least one cylinder")
        self.cylinders = cyls
        self.interleaved = interleaved

    def root_state(self):
        if "" in self.cylinders:
            return "covered"
        return frozenset(self.cylinders)

    def step(self, state, depth, bit):
        if state == "covered":
            return "covered"
        nxt = frozenset(c[1:] for c in state if c[0] == str(bit))
        if "" in nxt:
            return "covered"
        return nxt or None

    def spec_dict(self):
        return {"kind": "cylinder_union", "cylinders": sorted(self.cylinders)}


# ---------------------------------------------------------------------------
# Set algebra helpers


def sumset(a: TreeSet, b: TreeSet) -> SumSet:
    return SumSet(a, b)


def product(a: TreeSet, b: TreeSet) -> ProductSet:
    return ProductSet(a, b)


def union(members) -> UnionSet:
    return UnionSet(list(members))


def singleton_zero(depth_hint: int = 0) -> ExplicitSet:
    """The constant-0 point, the group identity of the cube."""
    return ExplicitSet([""] if depth_hint == 0 else ["0" * depth_hint], tail="zeros")


def is_trace_subset(a: TreeSet, b: TreeSet, depth: int,
                    budget: Budget | None = None) -> Word | None:
    """None when trace_n(a) is contained in trace_n(b) for every n <= depth;
    otherwise a shortest witness word in a's trace missing from b's."""
    if a.interleaved != b.interleaved:
        raise SpecFormatError("subset check needs matching scale conventions")
    bud = _budget(budget)
    seen = set()
    frontier = [(a.root_state(), b.root_state(), "")]
    for d in range(depth):
        nxt = []
        for sa, sb, w in frontier:
            for bit, ca in a.children(sa, d, bud):
                cb = b.step(sb, d, bit)
                if cb is None:
                    return w + str(bit)
                key = (ca, cb, d + 1)
                if key not in seen:
                    seen.add(key)
                    bud.spend()
                    nxt.append((ca, cb, w + str(bit)))
        frontier = nxt
    return None


def coherence_holds(e: TreeSet, p: Word, budget: Budget | None = None) -> bool:
    """meets(p) iff meets(p0) or meets(p1); True for every kind by design."""
    m = e.meets(p, budget)
    m0 = e.meets(p + "0", budget)
    m1 = e.meets(p + "1", budget)
    return m == (m0 or m1)
