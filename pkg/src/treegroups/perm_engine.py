"""Stabilizer chains for finite permutation groups on leaf sets.

The public surface works with one-line permutations of {1..N} given as int
tuples; internally permutations are numpy arrays over 0..N-1 and composition
is left to right (``(p then q)[i] = q[p[i]]``).

The construction is a deterministic (non-randomized) Schreier-Sims: pending
Schreier generators are processed in a fixed order, residues are inserted at
the level they sift to, and new base points are the smallest moved points.
Batches of Schreier generators are sifted with vectorized numpy passes, which
changes nothing about the result, only the speed.  Base points can be
prescribed, which is how pointwise stabilizers (and hence level and rigid
stabilizers of tree groups) are obtained: with the stabilized points forced to
the front of the base, the stabilizer is a suffix of the chain.

Orders are arbitrary-precision integers; congruence quotients of tree groups
grow doubly exponentially and overflow any fixed width immediately.
"""

from __future__ import annotations

import random
from collections import deque

import numpy as np

from .errors import EnumerationTooLargeError, ShapeError, TreeGroupsError
from .logquantity import LogQuantity

DEFAULT_ENUM_CAP = 10**6

_BATCH_ROWS = 4096


def _dtype_for(degree: int):
    return np.int16 if degree < 2**15 else np.int32


def to_internal(p, degree: int | None = None) -> np.ndarray:
    """1-based tuple -> 0-based numpy array."""
    arr = np.asarray(p, dtype=np.int64) - 1
    n = len(arr)
    if degree is not None and n != degree:
        raise ShapeError(f"permutation degree {n} does not match domain {degree}")
    if n and (arr.min() < 0 or arr.max() >= n):
        raise ShapeError("permutation entries outside 1..N")
    if len(np.unique(arr)) != n:
        raise ShapeError("not a permutation: repeated image")
    return arr.astype(_dtype_for(n))

def to_oneline(arr: np.ndarray) -> tuple:
    """0-based numpy array -> 1-based tuple."""
    return tuple(int(x) + 1 for x in arr)


def _compose(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Apply p, then q."""
    return q[p]


def _invert(p: np.ndarray) -> np.ndarray:
    inv = np.empty_like(p)
    inv[p] = np.arange(len(p), dtype=p.dtype)
    return inv


class _Level:
    __slots__ = ("base", "gens", "orbit", "pos", "reps", "inv_reps",
                 "done_points", "done_gens", "pending")

    def __init__(self, base: int, degree: int, dtype):
        self.base = base
        self.gens: list[np.ndarray] = []
        self.orbit: list[int] = [base]
        self.pos = np.full(degree, -1, dtype=np.int64)
        self.pos[base] = 0
        ident = np.arange(degree, dtype=dtype)
        self.reps: list[np.ndarray] = [ident]
        self.inv_reps: list[np.ndarray] = [ident]
        self.done_points = 0
        self.done_gens = 0
        self.pending: deque = deque()

    def extend_orbit(self):
        """Grow the orbit to closure under the current generator list.

        Points are scanned in position order and generators in list order, so
        the discovery order (and the representative words) is deterministic.
        Representatives are stored as full permutations, one product per new
        orbit point.
        """
        start = 0
        while start < len(self.orbit):
            round_end = len(self.orbit)
            pts = np.array(self.orbit[start:round_end], dtype=np.int64)
            for g in self.gens:
                imgs = g[pts]
                for k in range(len(pts)):
                    im = int(imgs[k])
                    if self.pos[im] < 0:
                        self.pos[im] = len(self.orbit)
                        self.orbit.append(im)
                        rep = _compose(self.reps[self.pos[pts[k]]], g)
                        self.reps.append(rep)
                        self.inv_reps.append(_invert(rep))
            start = round_end

    def note_growth(self):
        """Queue Schreier-generator rectangles for anything new."""
        npts, ngens = len(self.orbit), len(self.gens)
        if ngens > self.done_gens and self.done_points > 0:
            self.pending.append((0, self.done_points, self.done_gens, ngens, 0))
        if npts > self.done_points and ngens > 0:
            self.pending.append((self.done_points, npts, 0, ngens, 0))
        self.done_points, self.done_gens = npts, ngens


class StabChain:
    """A stabilizer chain: order, membership, transversals, enumeration,
    uniform sampling and pointwise stabilizers for ``<generators>``."""

    def __init__(self, generators, degree: int, prescribed_base=()):
        if degree <= 0:
            raise TreeGroupsError(f"empty or invalid point domain (degree {degree})")
        self.degree = degree
        self._dtype = _dtype_for(degree)
        self._identity = np.arange(degree, dtype=self._dtype)
        self._levels: list[_Level] = []
        self._input_gens: list[np.ndarray] = []
        seen = set()
        gens = []
        for p in generators:
            arr = np.asarray(p, dtype=self._dtype)
            if len(arr) != degree:
                raise ShapeError(f"generator degree {len(arr)} != domain {degree}")
            key = arr.tobytes()
            if key in seen or (arr == self._identity).all():
                continue
            seen.add(key)
            gens.append(arr)
        self._input_gens = gens
        for b in prescribed_base:
            self._levels.append(_Level(int(b), degree, self._dtype))
        for g in gens:
            self._insert_gen(g, 0)
        self._close()

    # -- construction ------------------------------------------------------

    def _insert_gen(self, g: np.ndarray, from_level: int):
        """Add a strong generator known to fix the bases above from_level."""
        j = None
        for l in range(from_level, len(self._levels)):
            if g[self._levels[l].base] != self._levels[l].base:
                j = l
                break
        if j is None:
            moved = np.flatnonzero(g != self._identity)
            if len(moved) == 0:
                return
            self._levels.append(_Level(int(moved[0]), self.degree, self._dtype))
            j = len(self._levels) - 1
        for l in range(from_level, j + 1):
            lev = self._levels[l]
            lev.gens.append(g)
            lev.extend_orbit()
            lev.note_growth()

    def _close(self):
        """Process pending Schreier rectangles, deepest level first."""
        while True:
            i = None
            for l in range(len(self._levels) - 1, -1, -1):
                if self._levels[l].pending:
                    i = l
                    break
            if i is None:
                return
            self._process_rectangle(i)

    def _process_rectangle(self, i: int):
        lev = self._levels[i]
        pt_lo, pt_hi, g_lo, g_hi, offset = lev.pending.popleft()
        width = g_hi - g_lo
        total = (pt_hi - pt_lo) * width
        flat_hi = min(total, offset + _BATCH_ROWS)
        if flat_hi <= offset:
            return
        # Schreier generators u_beta * x * u_{beta^x}^{-1} for the pair range,
        # in (point, generator) row-major order, batched per generator.
        pair_pts = np.array(
            [lev.orbit[pt_lo + k // width] for k in range(offset, flat_hi)],
            dtype=np.int64)
        pair_gis = np.array([g_lo + k % width for k in range(offset, flat_hi)],
                            dtype=np.int64)
        U = np.stack([lev.reps[lev.pos[p]] for p in pair_pts])
        C = np.empty_like(U)
        for xi in range(g_lo, g_hi):
            sel = np.flatnonzero(pair_gis == xi)
            if len(sel) == 0:
                continue
            x = lev.gens[xi]
            prod = x[U[sel]]
            tpos = lev.pos[x[pair_pts[sel]]]
            inv = np.stack([lev.inv_reps[t] for t in tpos])
            C[sel] = np.take_along_axis(inv, prod, axis=1)
        residue, stop, row = self._batch_sift(C, i + 1)
        if residue is None:
            if flat_hi < total:
                lev.pending.appendleft((pt_lo, pt_hi, g_lo, g_hi, flat_hi))
            return
        # Re-queue the pairs after the failing one; their residues may change
        # once the new generator is inserted, so they are re-sifted later.
        done_flat = offset + row + 1
        if done_flat < total:
            lev.pending.appendleft((pt_lo, pt_hi, g_lo, g_hi, done_flat))
        if stop == len(self._levels):
            moved = np.flatnonzero(residue != self._identity)
            self._levels.append(_Level(int(moved[0]), self.degree, self._dtype))
            stop = len(self._levels) - 1
        self._insert_gen_range(residue, i + 1, stop)

    def _insert_gen_range(self, g: np.ndarray, lo: int, hi: int):
        for l in range(lo, hi + 1):
            lev = self._levels[l]
            lev.gens.append(g)
            lev.extend_orbit()
            lev.note_growth()

    def _batch_sift(self, C: np.ndarray, start: int):
        """Sift the rows of C through levels >= start.

        Returns (residue, stop_level, row_index) for the first row (in order)
        that does not sift to the identity, or (None, None, None).
        """
        rows = C.shape[0]
        active = np.ones(rows, dtype=bool)
        stop = np.full(rows, len(self._levels), dtype=np.int64)
        for l in range(start, len(self._levels)):
            if not active.any():
                break
            lev = self._levels[l]
            idx = np.flatnonzero(active)
            imgs = C[idx, lev.base]
            pos = lev.pos[imgs]
            out = pos < 0
            if out.any():
                bad = idx[out]
                stop[bad] = l
                active[bad] = False
                idx = idx[~out]
                pos = pos[~out]
            if len(idx) == 0:
                continue
            inv = np.stack([lev.inv_reps[k] for k in pos])
            C[idx] = np.take_along_axis(inv, C[idx], axis=1)
        # Rows that left the chain early are automatically non-identity.
        nontrivial = (C != self._identity).any(axis=1)
        bad_rows = np.flatnonzero(nontrivial)
        if len(bad_rows) == 0:
            return None, None, None
        r = int(bad_rows[0])
        return C[r].copy(), int(stop[r]), r

    # -- queries -----------------------------------------------------------

    def order(self) -> int:
        n = 1
        for lev in self._levels:
            n *= len(lev.orbit)
        return n

    def order_log(self) -> LogQuantity:
        out = LogQuantity.zero()
        for lev in self._levels:
            out = out + LogQuantity.of_integer(len(lev.orbit))
        return out

    def orbit_lengths(self) -> tuple:
        return tuple(len(lev.orbit) for lev in self._levels)

    def base(self) -> tuple:
        return tuple(lev.base + 1 for lev in self._levels)

    def generators(self) -> list:
        return [to_oneline(g) for g in self._input_gens]

    def strong_generators_internal(self) -> list:
        seen = set()
        out = []
        for lev in self._levels:
            for g in lev.gens:
                key = g.tobytes()
                if key not in seen:
                    seen.add(key)
                    out.append(g)
        return out

    def strong_generators(self) -> list:
        return [to_oneline(g) for g in self.strong_generators_internal()]

    def _sift(self, arr: np.ndarray) -> np.ndarray:
        for lev in self._levels:
            k = lev.pos[int(arr[lev.base])]
            if k < 0:
                return arr
            arr = _compose(arr, lev.inv_reps[k])
        return arr

    def contains(self, p) -> bool:
        arr = np.asarray(to_internal(p, self.degree), dtype=self._dtype)
        return bool((self._sift(arr) == self._identity).all())

    def contains_internal(self, arr: np.ndarray) -> bool:
        return bool((self._sift(arr.astype(self._dtype)) == self._identity).all())

    def verify_strong_generators(self) -> bool:
        """Re-sift every Schreier generator; true iff the chain is closed."""
        for i, lev in enumerate(self._levels):
            for k in range(len(lev.orbit)):
                for x in lev.gens:
                    a = x[lev.reps[k]]
                    c = lev.inv_reps[lev.pos[int(x[lev.orbit[k]])]][a]
                    if (self._sift(c) != self._identity).any():
                        return False
        return True

    # -- enumeration and sampling -------------------------------------------

    def enumerate_matrix(self, cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
        """All group elements as rows, each exactly once, deterministic order.

        Elements are products of transversal representatives, nested from the
        deepest level outward, with orbit points taken in ascending order.
        """
        n = self.order()
        if n > cap:
            raise EnumerationTooLargeError(
                f"group order {n} exceeds the enumeration cap {cap}")
        out = self._identity[None, :].copy()
        for lev in reversed(self._levels):
            order_idx = sorted(range(len(lev.orbit)), key=lambda k: lev.orbit[k])
            blocks = [lev.reps[k][out] for k in order_idx]
            out = np.concatenate(blocks, axis=0)
        return out

    def enumerate(self, cap: int = DEFAULT_ENUM_CAP):
        """Iterate the group, each element once, as 1-based tuples."""
        for row in self.enumerate_matrix(cap):
            yield to_oneline(row)

    def sample_internal(self, rng: random.Random) -> np.ndarray:
        """Uniform element: one representative per transversal, composed in
        chain order (deepest first)."""
        arr = self._identity
        for lev in reversed(self._levels):
            pts = sorted(lev.orbit)
            choice = lev.pos[pts[rng.randrange(len(pts))]]
            arr = _compose(arr, lev.reps[choice])
        return arr

    def sample(self, seed) -> tuple:
        rng = seed if isinstance(seed, random.Random) else random.Random(seed)
        return to_oneline(self.sample_internal(rng))

    # -- derived subgroups ---------------------------------------------------

    def pointwise_stabilizer(self, points) -> "StabChain":
        """The subgroup fixing every listed point (1-based), via base change."""
        pts = sorted({int(p) - 1 for p in points})
        for p in pts:
            if not 0 <= p < self.degree:
                raise ShapeError(f"point {p + 1} outside domain 1..{self.degree}")
        if not pts:
            return self
        rebuilt = StabChain(
            self.strong_generators_internal(),
            self.degree,
            prescribed_base=pts,
        )
        suffix = rebuilt._levels[len(pts):]
        gens = []
        seen = set()
        for lev in suffix:
            for g in lev.gens:
                key = g.tobytes()
                if key not in seen:
                    seen.add(key)
                    gens.append(g)
        return StabChain(gens, self.degree)

    def __repr__(self):
        return (f"StabChain(degree={self.degree}, order={self.order()}, "
                f"base={self.base()})")


def build_group(generators, degree: int | None = None) -> StabChain:
    """Stabilizer chain for the group generated by one-line permutations.

    The degree is inferred from the generators when not given; an empty
    generator list requires an explicit degree.
    """
    gens = [tuple(g) for g in generators]
    if degree is None:
        if not gens:
            raise TreeGroupsError("degree is required to build a group with no generators")
        degree = len(gens[0])
    arrs = [to_internal(g, degree) for g in gens]
    return StabChain(arrs, degree)


# -- homomorphism transversals and kernels ----------------------------------


def truncation_columns(m: int, big_level: int, small_level: int) -> np.ndarray:
    """Leaf columns whose images determine the level-``small_level`` action."""
    block = m ** (big_level - small_level)
    return np.arange(m**small_level, dtype=np.int64) * block


def truncate_action(mat: np.ndarray, m: int, big_level: int, small_level: int) -> np.ndarray:
    """Map rows acting on m^big_level leaves to rows acting on m^small_level
    vertices (the induced action on the shallower level)."""
    block = m ** (big_level - small_level)
    cols = truncation_columns(m, big_level, small_level)
    return (mat[:, cols] // block).astype(mat.dtype)


def hom_transversal(gens: list, degree: int, hom, max_states: int):
    """BFS transversal of the fibers of a homomorphism.

    ``hom`` maps a 0-based permutation row to a hashable key; the identity's
    key indexes the kernel fiber.  Returns (rep_matrix, key_to_index) with
    rep_matrix[i] a representative of fiber i in BFS discovery order.
    """
    dtype = gens[0].dtype if gens else _dtype_for(degree)
    ident = np.arange(degree, dtype=dtype)
    reps = [ident]
    keys = {hom(ident): 0}
    head = 0
    while head < len(reps):
        cur = reps[head]
        for g in gens:
            img = _compose(cur, g)
            k = hom(img)
            if k not in keys:
                if len(reps) >= max_states:
                    raise EnumerationTooLargeError(
                        f"homomorphism image exceeds the cap {max_states}")
                keys[k] = len(reps)
                reps.append(img)
        head += 1
    return np.stack(reps), keys


def kernel_schreier_generators(rep_matrix: np.ndarray, keys: dict, gens: list, hom) -> np.ndarray:
    """Schreier generators of the kernel, given a fiber transversal.

    Returns the deduplicated, non-identity generators as matrix rows.
    """
    n, degree = rep_matrix.shape
    inv_reps = np.argsort(rep_matrix, axis=1).astype(rep_matrix.dtype)
    ident = np.arange(degree, dtype=rep_matrix.dtype)
    out = []
    seen = set()
    for g in gens:
        prod = g[rep_matrix]  # compose(rep, g) for every row at once
        target = np.empty(n, dtype=np.int64)
        for r in range(n):
            target[r] = keys[hom(prod[r])]
        kerg = np.take_along_axis(inv_reps[target], prod, axis=1)
        for r in range(n):
            row = kerg[r]
            key = row.tobytes()
            if key in seen or (row == ident).all():
                continue
            seen.add(key)
            out.append(row.copy())
    if not out:
        return np.empty((0, degree), dtype=rep_matrix.dtype)
    return np.stack(out)
