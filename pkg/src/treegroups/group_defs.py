"""Wreath-recursive group specifications and their finite truncations.

A GroupSpec presents a self-similar group by generators: each generator has a
root permutation and, for every child 1..m, a word in the generators (and
formal inverses) giving its section there.  Presets cover GGS groups, the
first Grigorchuk group and iterated wreath products.  Truncating the
recursion to depth n gives portraits, whose leaf actions generate the
congruence quotient G_n as a permutation group.

The module also hosts the finite-type machinery: extraction of the depth-D
window set from a quotient, exact counting of pattern-closed portraits by
dynamic programming, branching and fractality evidence checks, and the
detection of the stabilization depth of the r-sequence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product as _cartesian

import numpy as np

from . import leafaction, perm_engine
from .errors import (
    EnumerationTooLargeError,
    InvalidSpecError,
    StateCapError,
    TreeGroupsError,
)
from .logquantity import LogQuantity
from .perms import (
    all_perms,
    check_perm,
    compose as compose_perm,
    cycle_perm,
    identity_perm,
    is_perm,
)
from .tree_core import Portrait, identity_portrait, vertices_at_level

Word = tuple  # ((name, exponent), ...) with nonzero integer exponents

DEFAULT_ENUM_CAP = perm_engine.DEFAULT_ENUM_CAP
DEFAULT_STATE_CAP = 10**5


def parse_word(text: str) -> Word:
    """Parse a section word like "a b^-1" or "a^2"; "" is the identity."""
    text = text.strip()
    if not text:
        return ()
    out = []
    for tok in text.split():
        mobj = re.fullmatch(r"([A-Za-z_][A-Za-z_0-9]*)(?:\^(-?\d+))?", tok)
        if not mobj:
            raise InvalidSpecError(f"cannot parse word token {tok!r}")
        exp = int(mobj.group(2)) if mobj.group(2) is not None else 1
        if exp != 0:
            out.append((mobj.group(1), exp))
    return tuple(out)


def format_word(word: Word) -> str:
    return " ".join(name if e == 1 else f"{name}^{e}" for name, e in word)


class GroupSpec:
    """A wreath-recursive presentation: arity plus a generator table.

    When ``pattern_group`` is set, the spec denotes the full closed group of
    automorphisms whose depth-1 windows lie in that set.  Such groups are not
    topologically finitely generated in general, so their congruence
    quotients are generated level by level (rooted labels plus geometric
    embeddings of the generators one level down) rather than from the table
    alone; the table still presents a dense-in-its-closure subgroup.
    """

    __slots__ = ("m", "names", "table", "label", "notes", "pattern_group", "_hash")

    def __init__(self, m: int, generators, label: str = "", notes=(), pattern_group=None):
        if m < 2:
            raise InvalidSpecError(f"arity must be at least 2, got {m}")
        self.m = m
        names = tuple(generators)
        table = {}
        for name in names:
            root, sections = generators[name]
            root = tuple(root)
            if not is_perm(root, m):
                raise InvalidSpecError(f"generator {name!r}: root {root!r} is not a "
                                       f"permutation of 1..{m}")
            sections = tuple(tuple(w) for w in sections)
            if len(sections) != m:
                raise InvalidSpecError(f"generator {name!r}: expected {m} section words, "
                                       f"got {len(sections)}")
            table[name] = (root, sections)
        for name in names:
            for word in table[name][1]:
                for ref, exp in word:
                    if ref not in table:
                        raise InvalidSpecError(
                            f"section word of {name!r} references undefined generator {ref!r}")
                    if not isinstance(exp, int) or exp == 0:
                        raise InvalidSpecError(
                            f"section word of {name!r} carries invalid exponent {exp!r}")
        self.names = names
        self.table = table
        self.label = label or f"custom(m={m}, gens={','.join(names)})"
        self.notes = tuple(notes)
        self.pattern_group = tuple(sorted(pattern_group)) if pattern_group else None
        self._hash = hash((m, names, tuple(sorted(table.items())), self.notes,
                           self.pattern_group))

    def root(self, name: str) -> tuple:
        return self.table[name][0]

    def sections(self, name: str) -> tuple:
        return self.table[name][1]

    def __eq__(self, other):
        return (isinstance(other, GroupSpec) and self.m == other.m
                and self.names == other.names and self.table == other.table
                and self.pattern_group == other.pattern_group)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"GroupSpec({self.label})"

    def to_json(self) -> dict:
        return {
            "arity": self.m,
            "generators": {
                name: {
                    "root": list(self.root(name)),
                    "sections": [format_word(w) for w in self.sections(name)],
                }
                for name in self.names
            },
        }


# -- presets -----------------------------------------------------------------


def _is_odd_prime(p: int) -> bool:
    if p < 3 or p % 2 == 0:
        return False
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def ggs_spec(p: int, alpha) -> GroupSpec:
    """The GGS group on the p-adic tree with defining vector alpha.

    Generators: the rooted p-cycle a, and b with section a^alpha_i at child i
    for i < p and section b at child p.  The zero vector is rejected; constant
    vectors are accepted but flagged, since the branch-theoretic invariants
    computed here are only meaningful for non-constant vectors.
    """
    if not _is_odd_prime(p):
        raise InvalidSpecError(f"GGS arity must be an odd prime, got {p}")
    alpha = tuple(int(x) % p for x in alpha)
    if len(alpha) != p - 1:
        raise InvalidSpecError(f"defining vector must have length p-1={p - 1}, "
                               f"got {len(alpha)}")
    if all(x == 0 for x in alpha):
        raise InvalidSpecError("defining vector must be nonzero")
    notes = []
    if len(set(alpha)) == 1:
        notes.append("constant defining vector: branch invariants are not meaningful")
    sections = tuple(
        ((("a", alpha[i]),) if alpha[i] else ()) for i in range(p - 1)
    ) + ((("b", 1),),)
    gens = {
        "a": (cycle_perm(p), tuple(() for _ in range(p))),
        "b": (identity_perm(p), sections),
    }
    return GroupSpec(p, gens, label=f"ggs(p={p}, alpha={alpha})", notes=notes)


def grigorchuk_spec() -> GroupSpec:
    """The first Grigorchuk group: a = swap, b=(a,c), c=(a,d), d=(1,b)."""
    swap = (2, 1)
    e = identity_perm(2)
    gens = {
        "a": (swap, ((), ())),
        "b": (e, ((("a", 1),), (("c", 1),))),
        "c": (e, ((("a", 1),), (("d", 1),))),
        "d": (e, ((), (("b", 1),))),
    }
    return GroupSpec(2, gens, label="grigorchuk")


def wreath_spec(m: int, pattern_group) -> GroupSpec:
    """The full group of automorphisms whose depth-1 windows lie in H <= Sym(m).

    H must be closed under composition (hence a subgroup).  The table carries,
    for each non-identity h in H, a rooted generator and a directed generator
    feeding it down the last-child spine; the level-n quotients themselves are
    generated per level so that they realize the full iterated wreath product
    of H (see GroupSpec.pattern_group).
    """
    pats = []
    seen = set()
    for h in pattern_group:
        h = tuple(h)
        check_perm(h, m)
        if h not in seen:
            seen.add(h)
            pats.append(h)
    for g in pats:
        for h in pats:
            if compose_perm(g, h) not in seen:
                raise InvalidSpecError(
                    f"pattern set is not closed under composition: "
                    f"{g!r} * {h!r} missing")
    e = identity_perm(m)
    nontrivial = sorted(h for h in pats if h != e)
    if not nontrivial:
        return GroupSpec(m, {"e": (e, tuple(() for _ in range(m)))},
                         label=f"wreath(m={m}, trivial)", pattern_group=pats)
    gens = {}
    for i, h in enumerate(nontrivial):
        gens[f"r{i}"] = (h, tuple(() for _ in range(m)))
    for i, _ in enumerate(nontrivial):
        sections = [()] * m
        sections[0] = ((f"r{i}", 1),)
        sections[m - 1] = ((f"d{i}", 1),)
        gens[f"d{i}"] = (e, tuple(sections))
    label = f"wreath(m={m}, |H|={len(pats)})"
    return GroupSpec(m, gens, label=label, pattern_group=pats)


def full_wreath_spec(m: int) -> GroupSpec:
    return wreath_spec(m, all_perms(m))


def cyclic_wreath_spec(q: int) -> GroupSpec:
    """All labels powers of the q-cycle (1 2 ... q)."""
    sigma = cycle_perm(q)
    powers = []
    h = identity_perm(q)
    for _ in range(q):
        powers.append(h)
        h = compose_perm(h, sigma)
    return wreath_spec(q, powers)


# -- truncation and quotients --------------------------------------------------


@lru_cache(maxsize=None)
def truncate_generator(spec: GroupSpec, name: str, n: int) -> Portrait:
    """The depth-n portrait of a generator, by unrolling the recursion."""
    if name not in spec.table:
        raise InvalidSpecError(f"unknown generator {name!r}")
    if n < 0:
        raise TreeGroupsError(f"depth must be nonnegative, got {n}")
    if n == 0:
        return identity_portrait(spec.m, 0)
    children = [word_portrait(spec, w, n - 1) for w in spec.sections(name)]
    return Portrait.assemble(spec.root(name), children)


def word_portrait(spec: GroupSpec, word: Word, n: int) -> Portrait:
    """Evaluate a word in the truncated generators at depth n."""
    out = identity_portrait(spec.m, n)
    for name, exp in word:
        g = truncate_generator(spec, name, n)
        if exp < 0:
            g = g.invert()
            exp = -exp
        for _ in range(exp):
            out = out.compose(g)
    return out


@lru_cache(maxsize=None)
def level_portraits(spec: GroupSpec, n: int) -> tuple:
    """Portraits generating the level-n quotient.

    For table-presented specs these are the truncated generators.  For full
    pattern groups the quotient is generated per level: rooted labels from H
    plus, below one child per H-orbit on {1..m}, the generators one level
    down (root-label conjugation reaches the remaining children).
    """
    if n < 0:
        raise TreeGroupsError(f"level must be nonnegative, got {n}")
    if spec.pattern_group is None:
        return tuple(truncate_generator(spec, name, n) for name in spec.names)
    m = spec.m
    e = identity_perm(m)
    nontrivial = [h for h in spec.pattern_group if h != e]
    if n == 0:
        return ()
    out = [Portrait.rooted(h, n) for h in nontrivial]
    if n == 1:
        return tuple(out)
    reps = []
    covered = set()
    for j in range(m):
        if j in covered:
            continue
        reps.append(j)
        stack = [j]
        covered.add(j)
        while stack:
            x = stack.pop()
            for h in spec.pattern_group:
                y = h[x] - 1
                if y not in covered:
                    covered.add(y)
                    stack.append(y)
    ident = identity_portrait(m, n - 1)
    for g in level_portraits(spec, n - 1):
        for j in reps:
            children = [ident] * m
            children[j] = g
            out.append(Portrait.assemble(e, children))
    return tuple(out)


@lru_cache(maxsize=None)
def level_quotient(spec: GroupSpec, n: int) -> perm_engine.StabChain:
    """Stabilizer chain of the congruence quotient G_n acting on the leaves."""
    if n < 1:
        raise TreeGroupsError(f"level must be at least 1, got {n}")
    return perm_engine.StabChain(generator_arrays(spec, n), spec.m**n)


def quotient_order(spec: GroupSpec, n: int) -> int:
    return level_quotient(spec, n).order()


def quotient_order_log(spec: GroupSpec, n: int) -> LogQuantity:
    return level_quotient(spec, n).order_log()


@lru_cache(maxsize=8)
def quotient_matrix(spec: GroupSpec, n: int, cap: int) -> np.ndarray:
    """All elements of G_n as leaf-permutation rows (guarded by cap)."""
    return level_quotient(spec, n).enumerate_matrix(cap)


def generator_arrays(spec: GroupSpec, n: int) -> list:
    """0-based leaf permutations generating the level-n quotient."""
    return [perm_engine.to_internal(g.to_leaf_permutation())
            for g in level_portraits(spec, n)]


def r_value(spec: GroupSpec, n: int) -> LogQuantity:
    """r_n = m log|G_n| - log|G_{n+1}| + log|G_1|, exact."""
    if n < 1:
        raise TreeGroupsError(f"r_n is defined for n >= 1, got {n}")
    return (
        spec.m * quotient_order_log(spec, n)
        - quotient_order_log(spec, n + 1)
        + quotient_order_log(spec, 1)
    )


# -- defining vectors ----------------------------------------------------------


def is_symmetric(alpha) -> bool:
    """Whether alpha_i = alpha_{p-i} for all i (indices 1..p-1)."""
    a = tuple(alpha)
    k = len(a)
    return all(a[i] == a[k - 1 - i] for i in range(k))


def circulant_rank(alpha, p: int) -> int:
    """Rank over F_p of the p x p circulant with first row (alpha, 0).

    Convention: first row (alpha_1, ..., alpha_{p-1}, 0), subsequent rows by
    cyclic right shifts.
    """
    a = [int(x) % p for x in alpha]
    if len(a) != p - 1:
        raise InvalidSpecError(f"vector length {len(a)} does not match p-1={p - 1}")
    first = a + [0]
    rows = [first[-k:] + first[:-k] for k in range(p)]
    rank = 0
    col = 0
    while col < p and rank < p:
        piv = next((r for r in range(rank, p) if rows[r][col] % p), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [(x * inv) % p for x in rows[rank]]
        for r in range(p):
            if r != rank and rows[r][col]:
                c = rows[r][col]
                rows[r] = [(x - c * y) % p for x, y in zip(rows[r], rows[rank])]
        rank += 1
        col += 1
    return rank


# -- pattern sets and the finite-type DP ---------------------------------------


@dataclass(frozen=True)
class PatternSet:
    """A set of depth-D windows, canonically ordered."""

    m: int
    depth: int
    patterns: tuple
    sample_level: int | None = None
    matches_quotient: bool | None = None

    @classmethod
    def from_portraits(cls, portraits, sample_level=None, matches_quotient=None):
        pats = sorted(set(portraits), key=lambda g: g.sort_key())
        if not pats:
            raise InvalidSpecError("a pattern set must be nonempty")
        m, d = pats[0].m, pats[0].depth
        for g in pats:
            if g.m != m or g.depth != d:
                raise InvalidSpecError("patterns must share arity and depth")
        return cls(m, d, tuple(pats), sample_level, matches_quotient)

    def __contains__(self, g: Portrait) -> bool:
        return g in set(self.patterns)

    def __len__(self):
        return len(self.patterns)


def extract_pattern_set(spec: GroupSpec, D: int, sample_level: int,
                        cap: int = DEFAULT_ENUM_CAP) -> PatternSet:
    """All depth-D windows of elements of G_L over vertices of levels <= L-D.

    For fractal specs this window set equals the portrait set of G_D; the
    comparison is run and recorded on the result.
    """
    if sample_level < D:
        raise TreeGroupsError(f"sample level {sample_level} below window depth {D}")
    m = spec.m
    mat = quotient_matrix(spec, sample_level, cap)
    codes = set()
    for k in range(sample_level - D + 1):
        for v in vertices_at_level(m, k):
            wc = leafaction.window_code_matrix(mat, m, sample_level, v, D)
            for row in np.unique(wc, axis=0):
                codes.add(tuple(int(c) for c in row))
    patterns = [leafaction.portrait_from_codes(m, D, c) for c in sorted(codes)]
    gd = quotient_matrix(spec, D, cap)
    gd_codes = {
        tuple(int(c) for c in row)
        for row in leafaction.window_code_matrix(gd, m, D, (), D)
    }
    return PatternSet.from_portraits(
        patterns, sample_level=sample_level, matches_quotient=(codes == gd_codes))


def pattern_set_of_quotient(spec: GroupSpec, D: int,
                            cap: int = DEFAULT_ENUM_CAP) -> PatternSet:
    """The portrait set of G_D as a pattern set."""
    m = spec.m
    gd = quotient_matrix(spec, D, cap)
    codes = np.unique(leafaction.window_code_matrix(gd, m, D, (), D), axis=0)
    pats = [leafaction.portrait_from_codes(m, D, tuple(int(c) for c in row)) for row in codes]
    return PatternSet.from_portraits(pats, sample_level=D, matches_quotient=True)


def count_pattern_closed(patterns: PatternSet, n: int,
                         state_cap: int = DEFAULT_STATE_CAP) -> int:
    """Number of depth-n portraits all of whose depth-D windows are patterns.

    Bottom-up dynamic programming: the state of a valid height-k subtree is
    its top depth-(D-1) window; a root label and m child states assemble to a
    depth-D window which must be a pattern.  For n = D the count is the
    number of patterns.

    Windows are handled as breadth-first label-code tuples, so truncation is
    a prefix and assembly is tuple concatenation.
    """
    D, m = patterns.depth, patterns.m
    if n < D:
        raise TreeGroupsError(f"count requires n >= pattern depth {D}, got {n}")
    pattern_codes = frozenset(leafaction.portrait_to_codes(g) for g in patterns.patterns)
    prefix_len = (m ** (D - 1) - 1) // (m - 1)
    counts: dict[tuple, int] = {}
    for codes in pattern_codes:
        t = codes[:prefix_len]
        counts[t] = counts.get(t, 0) + 1
    roots = sorted({codes[0] for codes in pattern_codes})
    for _ in range(n - D):
        states = sorted(counts)
        if len(states) ** m > state_cap:
            raise StateCapError(
                f"{len(states)}^{m} transition combinations exceed the cap {state_cap}")
        # Level slices of each state, ready to interleave under a new root.
        slices = {}
        for t in states:
            pos, lv = 0, []
            for k in range(D - 1):
                lv.append(t[pos:pos + m**k])
                pos += m**k
            slices[t] = lv
        new_counts: dict[tuple, int] = {}
        for children in _cartesian(states, repeat=m):
            weight = 1
            for c in children:
                weight *= counts[c]
            body = []
            for k in range(D - 1):
                for c in children:
                    body.extend(slices[c][k])
            body = tuple(body)
            for sigma in roots:
                window = (sigma,) + body
                if window in pattern_codes:
                    t = window[:prefix_len]
                    new_counts[t] = new_counts.get(t, 0) + weight
        counts = new_counts
        if not counts:
            return 0
    return sum(counts.values())


# -- structural evidence checks -------------------------------------------------


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a structural check, with the first failure witnessed."""

    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    witness: str | None = None


def stabilizer_image_generators(spec: GroupSpec, n: int, depth: int,
                                cap: int = DEFAULT_ENUM_CAP):
    """Generators (as level-n leaf rows) of the kernel of G_n -> G_depth.

    The kernel realizes the level-``depth`` stabilizer inside G_n.  Requires
    |G_depth| within the cap.  depth = 0 returns the generators of G_n.
    """
    m = spec.m
    gens = generator_arrays(spec, n)
    if depth == 0:
        return np.stack(gens) if gens else np.empty((0, m**n), dtype=np.int16)

    def hom(row):
        return perm_engine.truncate_action(row[None, :], m, n, depth).tobytes()

    reps, keys = perm_engine.hom_transversal(gens, m**n, hom, cap)
    return perm_engine.kernel_schreier_generators(reps, keys, gens, hom)


def verify_regular_branch(spec: GroupSpec, D: int, n: int,
                          cap: int = DEFAULT_ENUM_CAP) -> CheckReport:
    """Finite-level branching test for the level-(D-1) stabilizer.

    Takes generators of the image of St(D-1) in G_{n-1} and grafts each below
    every first-level vertex (identity elsewhere); all grafts must lie in G_n
    and in the image of St(D-1) in G_n.
    """
    if n < D + 1:
        raise TreeGroupsError(f"need n >= D+1, got D={D}, n={n}")
    m = spec.m
    chain_n = level_quotient(spec, n)
    kernel_rows = stabilizer_image_generators(spec, n, D - 1, cap)
    if len(kernel_rows) == 0:
        st_chain = perm_engine.StabChain([], m**n)
    else:
        st_chain = perm_engine.StabChain(list(kernel_rows), m**n)
    small = [Portrait.from_leaf_permutation(m, n, perm_engine.to_oneline(row)).truncate(n - 1)
             for row in kernel_rows]
    ident = identity_portrait(m, n - 1)
    for k in small:
        for i in range(1, m + 1):
            children = [ident] * m
            children[i - 1] = k
            graft = Portrait.assemble(identity_perm(m), children)
            row = perm_engine.to_internal(graft.to_leaf_permutation())
            if not chain_n.contains_internal(row):
                return CheckReport(
                    "regular_branch", False,
                    details={"depth": D, "level": n},
                    witness=f"graft of a stabilizer generator below vertex {i} "
                            f"leaves G_{n}: {k.serialize()}")
            if not st_chain.contains_internal(row):
                return CheckReport(
                    "regular_branch", False,
                    details={"depth": D, "level": n},
                    witness=f"graft below vertex {i} leaves the level-{D - 1} "
                            f"stabilizer image: {k.serialize()}")
    return CheckReport("regular_branch", True,
                       details={"depth": D, "level": n,
                                "stabilizer_generators": len(small)})


def fractality_evidence(spec: GroupSpec, n: int,
                        cap: int = DEFAULT_ENUM_CAP) -> CheckReport:
    """Level-transitivity at level n plus surjectivity of the first-level
    section of the vertex stabilizer onto G_{n-1}."""
    if n < 2:
        raise TreeGroupsError(f"need n >= 2, got {n}")
    m = spec.m
    degree = m**n
    gens = generator_arrays(spec, n)
    # (a) single orbit on the leaves
    seen = np.zeros(degree, dtype=bool)
    seen[0] = True
    stack = [0]
    while stack:
        pt = stack.pop()
        for g in gens:
            im = int(g[pt])
            if not seen[im]:
                seen[im] = True
                stack.append(im)
    transitive = bool(seen.all())
    if not transitive:
        return CheckReport("fractality", False,
                           details={"level": n, "orbit_size": int(seen.sum())},
                           witness=f"G_{n} has {int(seen.sum())} < {degree} leaf orbit points")
    # (b) stabilizer of the first-level vertex 1, sectioned at 1
    block = m ** (n - 1)

    def hom(row):
        return int(row[0]) // block  # image of the first-level vertex

    reps, keys = perm_engine.hom_transversal(gens, degree, hom, cap)
    stab_rows = perm_engine.kernel_schreier_generators(reps, keys, gens, hom)
    if len(stab_rows) == 0:
        section_order = 1
    else:
        sections = leafaction.section_leaf_matrix(stab_rows, m, n, (1,))
        section_order = perm_engine.StabChain(list(sections), block).order()
    expected = quotient_order(spec, n - 1)
    ok = section_order == expected
    return CheckReport(
        "fractality", ok,
        details={"level": n, "transitive": True,
                 "section_order": section_order, "quotient_order": expected},
        witness=None if ok else
        f"st(1) sections generate order {section_order} != |G_{n - 1}| = {expected}")


def rigid_stabilizer_index(spec: GroupSpec, k: int, n: int) -> int:
    """Index |G_n : Rist(k)_n| of the rigid level-k stabilizer."""
    if not 1 <= k < n:
        raise TreeGroupsError(f"need 1 <= k < n, got k={k}, n={n}")
    m = spec.m
    chain = level_quotient(spec, n)
    degree = m**n
    block = m ** (n - k)
    gens = []
    seen = set()
    for w in range(m**k):
        outside = [p + 1 for p in range(degree) if not w * block <= p < (w + 1) * block]
        sub = chain.pointwise_stabilizer(outside)
        for g in sub.strong_generators_internal():
            key = g.tobytes()
            if key not in seen:
                seen.add(key)
                gens.append(g)
    rist = perm_engine.StabChain(gens, degree)
    order, rist_order = chain.order(), rist.order()
    if order % rist_order:
        raise TreeGroupsError("rigid stabilizer order does not divide the group order")
    return order // rist_order


@dataclass(frozen=True)
class DepthDetection:
    """Outcome of the r-sequence stabilization scan."""

    depth: int | None
    n_max: int
    r_values: tuple
    branch_report: CheckReport | None
    status: str

    @property
    def detected(self) -> bool:
        return self.depth is not None


def detect_depth(spec: GroupSpec, n_max: int,
                 cap: int = DEFAULT_ENUM_CAP) -> DepthDetection:
    """Minimal D with r_D = ... = r_{n_max-1} and a passing branching check.

    The result is evidence gathered from levels up to n_max, not a proof: the
    r-sequence is only observed on a finite window.
    """
    if n_max < 3:
        raise TreeGroupsError(f"need n_max >= 3 to observe stabilization, got {n_max}")
    rs = [r_value(spec, n) for n in range(1, n_max)]
    last_report = None
    for d in range(1, n_max):
        if not all(rs[k - 1] == rs[d - 1] for k in range(d, n_max)):
            continue
        report = verify_regular_branch(spec, d, d + 1, cap)
        last_report = report
        if report.passed:
            return DepthDetection(d, n_max, tuple(rs), report,
                                  f"evidence at level {n_max}")
    if last_report is None:
        return DepthDetection(None, n_max, tuple(rs), None,
                              "no r-stabilization below n_max")
    return DepthDetection(None, n_max, tuple(rs), last_report,
                          "r-sequence stabilizes but no branching depth "
                          "verified below n_max")


# -- spec files -----------------------------------------------------------------


def spec_from_json(data: dict) -> GroupSpec:
    """Build a GroupSpec from its JSON form (explicit table or preset)."""
    if not isinstance(data, dict):
        raise InvalidSpecError("spec JSON must be an object")
    if "preset" in data:
        preset = data["preset"]
        if preset == "ggs":
            extra = set(data) - {"preset", "p", "alpha"}
            if extra:
                raise InvalidSpecError(f"unknown fields for ggs preset: {sorted(extra)}")
            return ggs_spec(data["p"], data["alpha"])
        if preset == "grigorchuk":
            extra = set(data) - {"preset"}
            if extra:
                raise InvalidSpecError(f"unknown fields for grigorchuk preset: {sorted(extra)}")
            return grigorchuk_spec()
        if preset == "wreath":
            extra = set(data) - {"preset", "m", "pattern_group"}
            if extra:
                raise InvalidSpecError(f"unknown fields for wreath preset: {sorted(extra)}")
            return wreath_spec(data["m"], [tuple(p) for p in data["pattern_group"]])
        raise InvalidSpecError(f"unknown preset {preset!r}")
    extra = set(data) - {"arity", "generators"}
    if extra:
        raise InvalidSpecError(f"unknown fields in spec: {sorted(extra)}")
    if "arity" not in data or "generators" not in data:
        raise InvalidSpecError("spec requires 'arity' and 'generators'")
    m = data["arity"]
    gens = {}
    for name, entry in data["generators"].items():
        extra = set(entry) - {"root", "sections"}
        if extra:
            raise InvalidSpecError(f"unknown fields in generator {name!r}: {sorted(extra)}")
        root = tuple(entry["root"])
        sections = tuple(parse_word(w) for w in entry["sections"])
        gens[name] = (root, sections)
    return GroupSpec(m, gens)
