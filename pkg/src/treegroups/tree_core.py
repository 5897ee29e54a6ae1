"""Truncated automorphisms of the m-adic tree, stored as portraits.

Vertices are tuples of 1-based letters from {1, ..., m}; the empty tuple is
the root.  Vertices at one level are ordered lexicographically and indexed by
rank.  A depth-n portrait assigns one permutation of {1..m} to every internal
vertex (levels 0..n-1); the depth-0 portrait is the identity.

Labels live at the original (not image) vertices: the image of a vertex
x_1 x_2 ... is obtained letter by letter, letter i being mapped by the label
at the original prefix x_1 ... x_{i-1}.  Equivalently, for every vertex v and
word u,

    (v u)^g = v^g  u^(g|_v)

where g|_v is the section of g at v, whose label at w is g's label at vw.
Composition of portraits is written left to right, like the underlying right
action on the tree.
"""

from __future__ import annotations

from functools import lru_cache

from .errors import DepthExceededError, NotAnAutomorphismError, ShapeError
from .perms import check_perm, compose as compose_perm, identity_perm, invert as invert_perm

Vertex = tuple
ROOT: Vertex = ()


def vertex_rank(v: Vertex, m: int) -> int:
    """Rank of v among the vertices of its level, lexicographic, 0-based."""
    r = 0
    for x in v:
        r = r * m + (x - 1)
    return r


def vertex_from_rank(rank: int, level: int, m: int) -> Vertex:
    letters = []
    for _ in range(level):
        letters.append(rank % m + 1)
        rank //= m
    return tuple(reversed(letters))


def vertices_at_level(m: int, level: int):
    """All level vertices in lexicographic order."""
    return [vertex_from_rank(r, level, m) for r in range(m**level)]


def check_vertex(v: Vertex, m: int):
    for x in v:
        if not 1 <= x <= m:
            raise ShapeError(f"letter {x} outside alphabet 1..{m} in vertex {v!r}")


class Portrait:
    """A depth-n automorphism of the m-adic tree.

    Immutable and hashable.  ``labels[k][r]`` is the one-line permutation at
    the rank-r vertex of level k, for 0 <= k < depth.
    """

    __slots__ = ("m", "depth", "labels", "_hash")

    def __init__(self, m: int, depth: int, labels):
        if m < 2:
            raise ShapeError(f"arity must be at least 2, got {m}")
        if depth < 0:
            raise ShapeError(f"depth must be nonnegative, got {depth}")
        labels = tuple(tuple(tuple(lab) for lab in level) for level in labels)
        if len(labels) != depth:
            raise ShapeError(f"expected {depth} label levels, got {len(labels)}")
        for k, level in enumerate(labels):
            if len(level) != m**k:
                raise ShapeError(f"level {k} must carry {m**k} labels, got {len(level)}")
            for lab in level:
                check_perm(lab, m)
        self.m = m
        self.depth = depth
        self.labels = labels
        self._hash = hash((m, depth, labels))

    @classmethod
    def identity(cls, m: int, depth: int) -> "Portrait":
        e = identity_perm(m)
        return cls(m, depth, tuple(tuple(e for _ in range(m**k)) for k in range(depth)))

    @classmethod
    def rooted(cls, root_label, depth: int) -> "Portrait":
        """Portrait with the given root label and trivial labels below."""
        m = len(root_label)
        g = cls.identity(m, depth)
        if depth == 0:
            return g
        levels = list(g.labels)
        levels[0] = (tuple(root_label),)
        return cls(m, depth, levels)

    @classmethod
    def assemble(cls, root_label, children) -> "Portrait":
        """Portrait with the given root label and the given depth-(n-1)
        portraits grafted below the children 1..m."""
        m = len(root_label)
        if len(children) != m:
            raise ShapeError(f"expected {m} children, got {len(children)}")
        d = children[0].depth
        for c in children:
            if c.m != m or c.depth != d:
                raise ShapeError("children must share arity and depth")
        levels = [(tuple(root_label),)]
        for k in range(d):
            level = []
            for c in children:
                level.extend(c.labels[k])
            levels.append(tuple(level))
        return cls(m, d + 1, levels)

    def label(self, v: Vertex):
        """The permutation at the internal vertex v."""
        if len(v) >= self.depth:
            raise DepthExceededError(f"vertex {v!r} is not internal at depth {self.depth}")
        check_vertex(v, self.m)
        return self.labels[len(v)][vertex_rank(v, self.m)]

    def is_identity(self) -> bool:
        e = identity_perm(self.m)
        return all(lab == e for level in self.labels for lab in level)

    def apply(self, v: Vertex) -> Vertex:
        """The image of v; v may be any vertex of level <= depth."""
        if len(v) > self.depth:
            raise DepthExceededError(
                f"vertex of level {len(v)} exceeds portrait depth {self.depth}")
        check_vertex(v, self.m)
        m = self.m
        out = []
        rank = 0  # rank of the original prefix v[:i]
        for i, x in enumerate(v):
            out.append(self.labels[i][rank][x - 1])
            rank = rank * m + (x - 1)
        return tuple(out)

    def section(self, v: Vertex, d: int) -> "Portrait":
        """The depth-d section at v: its label at w is this portrait's label
        at the concatenation vw."""
        k = len(v)
        if d < 0 or k + d > self.depth:
            raise DepthExceededError(
                f"section of depth {d} at level {k} exceeds portrait depth {self.depth}")
        check_vertex(v, self.m)
        m = self.m
        base = vertex_rank(v, m)
        levels = []
        for j in range(d):
            lo = base * m**j
            levels.append(self.labels[k + j][lo:lo + m**j])
        return Portrait(m, d, levels)

    def truncate(self, d: int) -> "Portrait":
        if d > self.depth:
            raise DepthExceededError(f"cannot truncate depth {self.depth} to {d}")
        if d == self.depth:
            return self
        return Portrait(self.m, d, self.labels[:d])

    def compose(self, other: "Portrait") -> "Portrait":
        """Apply self, then other."""
        if self.m != other.m or self.depth != other.depth:
            raise ShapeError("portraits must share arity and depth to compose")
        m = self.m
        levels = []
        # ranks[r] = rank of the image under self of the rank-r vertex of the
        # current level; maintained incrementally level by level.
        ranks = [0]
        for k in range(self.depth):
            mine = self.labels[k]
            theirs = other.labels[k]
            level = tuple(
                compose_perm(mine[r], theirs[ranks[r]]) for r in range(m**k)
            )
            levels.append(level)
            if k + 1 < self.depth:
                next_ranks = [0] * (m**(k + 1))
                for r in range(m**k):
                    lab = mine[r]
                    img_base = ranks[r] * m
                    base = r * m
                    for x in range(m):
                        next_ranks[base + x] = img_base + (lab[x] - 1)
                ranks = next_ranks
        return Portrait(m, self.depth, levels)

    def invert(self) -> "Portrait":
        m = self.m
        levels = []
        ranks = [0]  # ranks[r] = rank of the image under self (original -> image)
        inv_levels = []
        for k in range(self.depth):
            mine = self.labels[k]
            # label of the inverse at the image vertex is the inverse label
            level = [None] * (m**k)
            for r in range(m**k):
                level[ranks[r]] = invert_perm(mine[r])
            inv_levels.append(tuple(level))
            if k + 1 < self.depth:
                next_ranks = [0] * (m**(k + 1))
                for r in range(m**k):
                    lab = mine[r]
                    img_base = ranks[r] * m
                    base = r * m
                    for x in range(m):
                        next_ranks[base + x] = img_base + (lab[x] - 1)
                ranks = next_ranks
        return Portrait(m, self.depth, inv_levels)

    def to_leaf_permutation(self) -> tuple:
        """One-line permutation of {1..m^depth} induced on the leaves,
        in lexicographic leaf order."""
        m, n = self.m, self.depth
        ranks = [0]
        for k in range(n):
            level = self.labels[k]
            next_ranks = [0] * (m**(k + 1))
            for r in range(m**k):
                lab = level[r]
                img_base = ranks[r] * m
                base = r * m
                for x in range(m):
                    next_ranks[base + x] = img_base + (lab[x] - 1)
            ranks = next_ranks
        return tuple(r + 1 for r in ranks)

    @classmethod
    def from_leaf_permutation(cls, m: int, depth: int, perm) -> "Portrait":
        """Reconstruct the portrait from a leaf permutation; fails if the
        permutation does not map prefix blocks to prefix blocks."""
        n = depth
        if len(perm) != m**n:
            raise ShapeError(f"expected a permutation of {m**n} leaves, got {len(perm)}")
        check_perm(perm)
        images = [x - 1 for x in perm]
        levels = []
        for k in range(n - 1, -1, -1):
            # images: rank -> image rank at level k+1; shrink one level.
            level = []
            parent_images = [0] * (m**k)
            for r in range(m**k):
                block = images[r * m:(r + 1) * m]
                parent = block[0] // m
                lab = []
                for x in range(m):
                    if block[x] // m != parent:
                        raise NotAnAutomorphismError(
                            "leaf permutation does not respect level "
                            f"{k + 1} blocks at vertex rank {r}")
                    lab.append(block[x] % m + 1)
                if sorted(lab) != list(range(1, m + 1)):
                    raise NotAnAutomorphismError(
                        f"induced child map at level {k} rank {r} is not a bijection")
                level.append(tuple(lab))
                parent_images[r] = parent
            levels.append(tuple(level))
            images = parent_images
        levels.reverse()
        return cls(m, n, levels)

    def serialize(self) -> str:
        """Canonical text form: depth, arity, then labels breadth first."""
        parts = [str(self.depth), str(self.m)]
        for level in self.labels:
            for lab in level:
                parts.append(" ".join(str(x) for x in lab))
        return " | ".join(parts)

    @classmethod
    def deserialize(cls, text: str) -> "Portrait":
        parts = [p.strip() for p in text.split("|")]
        if len(parts) < 2:
            raise ShapeError(f"malformed portrait text: {text!r}")
        depth, m = int(parts[0]), int(parts[1])
        labs = [tuple(int(t) for t in p.split()) for p in parts[2:]]
        expected = (m**depth - 1) // (m - 1)
        if len(labs) != expected:
            raise ShapeError(f"expected {expected} labels, got {len(labs)}")
        levels = []
        pos = 0
        for k in range(depth):
            levels.append(tuple(labs[pos:pos + m**k]))
            pos += m**k
        return cls(m, depth, levels)

    def sort_key(self):
        return self.labels

    def __eq__(self, other):
        return (
            isinstance(other, Portrait)
            and self.m == other.m
            and self.depth == other.depth
            and self.labels == other.labels
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Portrait({self.serialize()!r})"


@lru_cache(maxsize=None)
def _identity_cached(m: int, depth: int) -> Portrait:
    return Portrait.identity(m, depth)


def identity_portrait(m: int, depth: int) -> Portrait:
    """Cached identity portrait."""
    return _identity_cached(m, depth)


def past(v: Vertex):
    """All prefixes of v from the root to v itself, root first."""
    return [v[:i] for i in range(len(v) + 1)]
