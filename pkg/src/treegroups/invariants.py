"""Exact numeric invariants of the congruence tower.

Everything here is a rational combination of logarithms of primes
(LogQuantity) or an exact rational, derived from the quotient orders:

    r_n = m log|G_n| - log|G_{n+1}| + log|G_1|
    s_n = r_{n+1} - r_n
    F_n = log|G_1| - r_{n+1}      (valid for n at or below the window depth)
    f   = log|G_1| - r_D           (D the detected stabilization depth)

plus the Hausdorff dimension of the closure, both as the finite-level
sequence log|G_n| / log|A_n| and as the closed form obtained from the
recursion log|G_{D+k}| = m^k log|G_D| + (m^k - 1)/(m - 1) f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import group_defs
from .errors import PreconditionError, TreeGroupsError
from .logquantity import LogQuantity, shannon_entropy  # noqa: F401  (re-export)


def r_sequence(spec, n_max: int) -> list:
    """[r_1, ..., r_{n_max-1}], exact; needs orders up to level n_max."""
    if n_max < 2:
        raise TreeGroupsError(f"need n_max >= 2, got {n_max}")
    return [group_defs.r_value(spec, n) for n in range(1, n_max)]


def s_sequence(spec, n_max: int) -> list:
    """[s_1, ..., s_{n_max-2}] with s_n = r_{n+1} - r_n."""
    rs = r_sequence(spec, n_max)
    return [rs[i + 1] - rs[i] for i in range(len(rs) - 1)]


def big_F_formula(spec, n: int, D: int) -> LogQuantity:
    """log|G_1| - r_{n+1}; the window level n must be at least the pattern
    depth D, below which the underlying cell-count identity can fail."""
    if n < D:
        raise PreconditionError(
            f"window level n={n} is below the pattern depth D={D}; the "
            f"closed form for F requires n >= D")
    return group_defs.quotient_order_log(spec, 1) - group_defs.r_value(spec, n + 1)


@dataclass(frozen=True)
class FInvariantResult:
    """The f-invariant, or an explicit inconclusive status."""

    status: str                    # "ok" or "inconclusive"
    value: LogQuantity | None
    depth: int | None
    n_max: int
    f_values_checked: tuple        # F at window levels D..n_max-2, all equal
    detection_status: str

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def f_invariant(spec, n_max: int = 4,
                cap: int = group_defs.DEFAULT_ENUM_CAP) -> FInvariantResult:
    """log|G_1| - r_D for the detected depth D.

    Also evaluates log|G_1| - r_{n+1} for every computed window level n >= D
    and asserts they agree (the infimum is attained and constant).  When no
    depth is detected below n_max the result is an explicit inconclusive
    status, not a number.
    """
    det = group_defs.detect_depth(spec, n_max, cap)
    if not det.detected:
        return FInvariantResult("inconclusive", None, None, n_max, (), det.status)
    D = det.depth
    value = group_defs.quotient_order_log(spec, 1) - det.r_values[D - 1]
    checked = []
    for n in range(D, n_max - 1):
        fn = big_F_formula(spec, n, D)
        if fn != value:
            raise TreeGroupsError(
                f"F at window level {n} differs from F at {D} although the "
                f"r-sequence stabilized; inconsistent orders")
        checked.append(fn)
    return FInvariantResult("ok", value, D, n_max, tuple(checked), det.status)


def ambient_order_log(spec, n: int, ambient: str) -> LogQuantity:
    """log of the ambient group at level n: the full automorphism group, or
    the subgroup with labels in a fixed q-cycle for ambient 'wq'."""
    m = spec.m
    internal = (m**n - 1) // (m - 1)
    if ambient == "full":
        return Fraction(internal) * LogQuantity.of_integer(math.factorial(m))
    if ambient == "wq":
        _require_wq(spec)
        return Fraction(internal) * LogQuantity.of_integer(m)
    raise TreeGroupsError(f"unknown ambient {ambient!r} (expected 'full' or 'wq')")


def _require_wq(spec):
    """The spec's labels must all be powers of the m-cycle (1 2 ... m)."""
    from .perms import compose as compose_perm, cycle_perm, identity_perm
    m = spec.m
    powers = set()
    h = identity_perm(m)
    sigma = cycle_perm(m)
    for _ in range(m):
        powers.add(h)
        h = compose_perm(h, sigma)
    labels = set()
    if spec.pattern_group is not None:
        labels.update(spec.pattern_group)
    for name in spec.names:
        labels.add(spec.root(name))
    if not labels <= powers:
        raise TreeGroupsError(
            "ambient 'wq' requires every label to be a power of the full cycle")


@dataclass(frozen=True)
class DimensionReport:
    """Hausdorff dimension data: the exact finite-level sequence and, when a
    depth was detected, the exact closed-form limit.

    Each entry of ``sequence`` is (n, ratio, approx): ratio is an exact
    Fraction when log|G_n| is a rational multiple of log|A_n| (always the
    case for ambient 'wq', and for m = 2), else None with the float approx
    carrying the value.
    """

    ambient: str
    sequence: tuple
    limit_ratio: Fraction | None
    limit_approx: float | None
    depth: int | None
    detection_status: str


def hausdorff_dimension(spec, n_max: int, ambient: str = "full",
                        cap: int = group_defs.DEFAULT_ENUM_CAP) -> DimensionReport:
    """dim_n = log|G_n| / log|A_n| exactly, plus the closed-form limit.

    The limit uses lim log|G_n| / m^n = (log|G_D| + f/(m-1)) / m^D, scaled by
    the ambient normalization (m-1)/log of the ambient label group.
    """
    m = spec.m
    seq = []
    for n in range(1, n_max + 1):
        num = group_defs.quotient_order_log(spec, n)
        den = ambient_order_log(spec, n, ambient)
        ratio = num.proportion_to(den)
        approx = (num.to_float() / den.to_float()) if not den.is_zero() else 0.0
        if num.is_zero():
            ratio = Fraction(0)
            approx = 0.0
        seq.append((n, ratio, approx))
    det = group_defs.detect_depth(spec, n_max, cap) if n_max >= 3 else None
    limit_ratio = None
    limit_approx = None
    depth = det.depth if det is not None else None
    if depth is not None:
        D = depth
        f_val = group_defs.quotient_order_log(spec, 1) - det.r_values[D - 1]
        # lim log|G_n|/m^n, exactly, as a LogQuantity scaled by a rational
        lim_log = Fraction(1, m**D) * (
            group_defs.quotient_order_log(spec, D) + Fraction(1, m - 1) * f_val)
        if ambient == "wq":
            _require_wq(spec)
            norm = LogQuantity.of_integer(m)
        else:
            norm = LogQuantity.of_integer(math.factorial(m))
        scaled = Fraction(m - 1, 1) * lim_log
        limit_ratio = scaled.proportion_to(norm)
        limit_approx = scaled.to_float() / norm.to_float()
    return DimensionReport(ambient, tuple(seq), limit_ratio, limit_approx,
                           depth, det.status if det is not None else "not computed")


@dataclass(frozen=True)
class OrderLawReport:
    """Exact check of |G_{n+1}| * |G_{n-1}|^m == |G_n|^(m+1) per level."""

    passed: bool
    checked_levels: tuple
    failures: tuple


def verify_branch_order_condition(spec, D: int, n_max: int) -> OrderLawReport:
    """|G_{n+1}| = |G_n| * (|G_n| / |G_{n-1}|)^m for D <= n < n_max, exactly.

    Stated multiplicatively to stay in integers."""
    if D < 1 or n_max <= D:
        raise TreeGroupsError(f"need 1 <= D < n_max, got D={D}, n_max={n_max}")

    def order(n):
        return 1 if n == 0 else group_defs.quotient_order(spec, n)

    checked = []
    failures = []
    for n in range(D, n_max):
        lhs = order(n + 1) * order(n - 1) ** spec.m
        rhs = order(n) ** (spec.m + 1)
        checked.append(n)
        if lhs != rhs:
            failures.append((n, lhs, rhs))
    return OrderLawReport(not failures, tuple(checked), tuple(failures))


def verify_order_recursion(spec, D: int, n_max: int) -> OrderLawReport:
    """log|G_{D+k}| = m^k log|G_D| + (m^k - 1)/(m - 1) f, exactly, for all
    computed k, where f = log|G_1| - r_D."""
    m = spec.m
    f_val = group_defs.quotient_order_log(spec, 1) - group_defs.r_value(spec, D)
    base = group_defs.quotient_order_log(spec, D)
    checked = []
    failures = []
    for k in range(1, n_max - D + 1):
        expect = Fraction(m**k) * base + Fraction(m**k - 1, m - 1) * f_val
        got = group_defs.quotient_order_log(spec, D + k)
        checked.append(k)
        if expect != got:
            failures.append((k, got.to_float(), expect.to_float()))
    return OrderLawReport(not failures, tuple(checked), tuple(failures))


@dataclass(frozen=True)
class InvariantReport:
    """Everything the invariant sweep computes for one spec."""

    spec_label: str
    n_max: int
    orders: tuple
    r_values: tuple
    s_values: tuple
    depth: int | None
    detection_status: str
    f_result: FInvariantResult
    dimension: DimensionReport
    branch_order: OrderLawReport | None
    fractality_passed: bool | None


def invariant_report(spec, n_max: int, ambient: str = "full",
                     cap: int = group_defs.DEFAULT_ENUM_CAP,
                     fractality_level: int | None = 3) -> InvariantReport:
    orders = tuple(group_defs.quotient_order(spec, n) for n in range(1, n_max + 1))
    rs = tuple(r_sequence(spec, n_max))
    ss = tuple(s_sequence(spec, n_max))
    fres = f_invariant(spec, n_max, cap)
    dim = hausdorff_dimension(spec, n_max, ambient, cap)
    branch = None
    if fres.ok:
        branch = verify_branch_order_condition(spec, fres.depth, n_max)
    fract = None
    if fractality_level is not None and fractality_level <= n_max:
        fract = group_defs.fractality_evidence(spec, fractality_level, cap).passed
    return InvariantReport(spec.label, n_max, orders, rs, ss,
                           fres.depth, fres.detection_status, fres, dim,
                           branch, fract)
