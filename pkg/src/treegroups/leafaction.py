"""Vectorized extraction of portrait data from matrices of leaf permutations.

A row of such a matrix is a 0-based one-line permutation of the m^N leaves of
the depth-N tree, in lexicographic leaf order.  Tree automorphisms map the
leaf block of a vertex onto the leaf block of its image, so labels, vertex
images and whole windows can be read off with a handful of column gathers,
one per label entry, across all rows at once.

A label at an internal vertex is encoded as an integer code: the label p (a
permutation of {1..m}) has code sum_j (p[j+1]-1) * m^j.  A depth-d window is
the tuple of codes of its internal labels in breadth-first order.
"""

from __future__ import annotations

import numpy as np

from .tree_core import Portrait, Vertex, vertex_rank, vertices_at_level


def label_code_of_perm(p) -> int:
    code = 0
    for j in range(len(p) - 1, -1, -1):
        code = code * len(p) + (p[j] - 1)
    return code


def perm_of_label_code(code: int, m: int) -> tuple:
    out = []
    for _ in range(m):
        out.append(code % m + 1)
        code //= m
    return tuple(out)


def vertex_image_ranks(mat: np.ndarray, m: int, big_level: int, v: Vertex) -> np.ndarray:
    """Rank of the image of v at its own level, for every row."""
    if not v:
        return np.zeros(len(mat), dtype=np.int64)
    block = m ** (big_level - len(v))
    lo = vertex_rank(v, m) * block
    return mat[:, lo].astype(np.int64) // block


def label_codes_at(mat: np.ndarray, m: int, big_level: int, y: Vertex) -> np.ndarray:
    """Code of the label at the internal vertex y, for every row."""
    s = m ** (big_level - len(y) - 1)
    base = vertex_rank(y, m) * m
    codes = np.zeros(len(mat), dtype=np.int64)
    for j in range(m - 1, -1, -1):
        img = mat[:, (base + j) * s].astype(np.int64)
        child = (img % (m * s)) // s
        codes = codes * m + child
    return codes


def window_internal_vertices(v: Vertex, d: int, m: int):
    """Absolute internal vertices of the depth-d window at v, breadth first."""
    out = []
    for k in range(d):
        for w in vertices_at_level(m, k):
            out.append(v + w)
    return out


def window_code_matrix(mat: np.ndarray, m: int, big_level: int, v: Vertex, d: int) -> np.ndarray:
    """Window codes, one row per matrix row, one column per internal label."""
    cols = [label_codes_at(mat, m, big_level, y) for y in window_internal_vertices(v, d, m)]
    if not cols:
        return np.zeros((len(mat), 0), dtype=np.int64)
    return np.stack(cols, axis=1)


def portrait_from_codes(m: int, d: int, codes) -> Portrait:
    levels = []
    pos = 0
    for k in range(d):
        count = m**k
        levels.append(tuple(perm_of_label_code(int(c), m) for c in codes[pos:pos + count]))
        pos += count
    return Portrait(m, d, levels)


def portrait_to_codes(g: Portrait) -> tuple:
    return tuple(label_code_of_perm(lab) for level in g.labels for lab in level)


def window_leaf_matrix(mat: np.ndarray, m: int, big_level: int, v: Vertex, d: int) -> np.ndarray:
    """Leaf permutations (on m^d points, 0-based) of the depth-d windows at v.

    Works for arbitrary rows: the window at v maps the leaves below v to the
    leaves below the image of v, so its leaf action is the restriction of the
    row to v's block, rebased to the image block.
    """
    if d == 0:
        return np.zeros((len(mat), 1), dtype=mat.dtype)
    block = m ** (big_level - len(v))
    lo = vertex_rank(v, m) * block
    base = (mat[:, lo].astype(np.int64) // block) * block
    sub = mat[:, lo:lo + block].astype(np.int64) - base[:, None]
    step = m ** (big_level - len(v) - d)
    cols = np.arange(m**d, dtype=np.int64) * step
    return (sub[:, cols] // step).astype(mat.dtype)


def section_leaf_matrix(mat: np.ndarray, m: int, big_level: int, v: Vertex) -> np.ndarray:
    """Leaf permutations of the sections at a row-wise fixed vertex v.

    Every row must fix v; the section of depth big_level - len(v) then
    permutes the leaves below v, and its leaf permutation is the restriction
    of the row to v's block, rebased to 0.
    """
    block = m ** (big_level - len(v))
    lo = vertex_rank(v, m) * block
    sub = mat[:, lo:lo + block].astype(np.int64) - lo
    if sub.min() < 0 or sub.max() >= block:
        raise ValueError(f"some rows do not fix the vertex {v!r}")
    return sub.astype(mat.dtype)
