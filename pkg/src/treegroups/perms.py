"""One-line permutations of {1, ..., m}.

A permutation is a tuple ``p`` of length m with ``p[i-1]`` the image of the
point i.  Composition is left to right throughout the package: ``compose(p, q)``
applies p first, then q.  This matches a right action written exponentially,
where ``i^(pq) = (i^p)^q``.
"""

from __future__ import annotations

from itertools import permutations as _itertools_permutations

from .errors import ShapeError

Perm = tuple


def identity_perm(m: int) -> tuple:
    return tuple(range(1, m + 1))


def is_perm(p, m: int | None = None) -> bool:
    if m is not None and len(p) != m:
        return False
    return sorted(p) == list(range(1, len(p) + 1))


def check_perm(p, m: int | None = None):
    if not is_perm(p, m):
        raise ShapeError(f"not a permutation of 1..{m or len(p)}: {p!r}")


def compose(p: tuple, q: tuple) -> tuple:
    """Apply p, then q."""
    if len(p) != len(q):
        raise ShapeError(f"degree mismatch: {len(p)} vs {len(q)}")
    return tuple(q[x - 1] for x in p)


def invert(p: tuple) -> tuple:
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x - 1] = i + 1
    return tuple(inv)


def perm_power(p: tuple, e: int) -> tuple:
    if e < 0:
        return perm_power(invert(p), -e)
    out = identity_perm(len(p))
    acc = p
    while e:
        if e & 1:
            out = compose(out, acc)
        acc = compose(acc, acc)
        e >>= 1
    return out


def cycle_perm(m: int) -> tuple:
    """The m-cycle (1 2 ... m)."""
    return tuple(range(2, m + 1)) + (1,)


def all_perms(m: int):
    """All permutations of {1..m} in lexicographic one-line order."""
    return [tuple(p) for p in _itertools_permutations(range(1, m + 1))]


def format_perm(p) -> str:
    return " ".join(str(x) for x in p)


def parse_perm(text: str) -> tuple:
    p = tuple(int(tok) for tok in text.replace(",", " ").split())
    check_perm(p)
    return p
