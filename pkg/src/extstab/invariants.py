"""Exact stability combinatorics for bundle pairs and their subobjects.

Everything in this module is computed over the rationals (``fractions.Fraction``);
no floating point enters.  The central quantity is the defect form

    defect(a1, a2, t1, t2; sub) = a1*d1' + a2*d2' - t1*r1' - t2*r2'

evaluated on the numerical invariants (rank, degree) of a declared subobject.
A pair is stable for given parameters when every declared subobject has
negative defect.  Subobject lists are always caller-supplied; completeness is
the caller's concern (the chamber module provides complete lists for rank-one
extensions).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

Rational = Union[int, Fraction, str]


def as_fraction(x: Rational) -> Fraction:
    """Coerce ints, Fractions and 'p/q' strings to Fraction (never floats)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


class StabilityError(ValueError):
    """Base class for misuse of the exact stability layer."""


class ConstraintError(StabilityError):
    """Parameters do not satisfy the linear constraint of the bound pair."""


class EmptySubobjectError(StabilityError):
    """A subobject with total rank zero was supplied where rank >= 1 is needed."""


@dataclass(frozen=True)
class BundleInvariant:
    """Numerical shadow of a bundle: rank and degree."""

    rank: int
    degree: Fraction

    def __post_init__(self):
        if self.rank < 1:
            raise StabilityError("rank must be >= 1 (use None for the zero object)")
        object.__setattr__(self, "degree", as_fraction(self.degree))

    @property
    def slope(self) -> Fraction:
        return self.degree / self.rank


def bundle(rank: int, degree: Rational) -> BundleInvariant:
    return BundleInvariant(rank, as_fraction(degree))


@dataclass(frozen=True)
class ExtensionPair:
    """The bound pair (E1, E2): invariants of the two factors of a triple."""

    e1: BundleInvariant
    e2: BundleInvariant

    @property
    def r1(self) -> int:
        return self.e1.rank

    @property
    def r2(self) -> int:
        return self.e2.rank

    @property
    def d1(self) -> Fraction:
        return self.e1.degree

    @property
    def d2(self) -> Fraction:
        return self.e2.degree

    @property
    def total_rank(self) -> int:
        return self.r1 + self.r2

    @property
    def total_degree(self) -> Fraction:
        return self.d1 + self.d2

    @property
    def total_slope(self) -> Fraction:
        return self.total_degree / self.total_rank

    def full_witness(self) -> "SubobjectWitness":
        return SubobjectWitness(self.e1, self.e2)


def pair(r1: int, d1: Rational, r2: int, d2: Rational) -> ExtensionPair:
    return ExtensionPair(bundle(r1, d1), bundle(r2, d2))


def line_pair(d1: Rational, d2: Rational) -> ExtensionPair:
    """Convenience for the rank-one case studied by the chamber module."""
    return pair(1, d1, 1, d2)


class WitnessKind(enum.Enum):
    SUBTRIPLE = "subtriple"
    SURJECTIVE_SUBTRIPLE = "surjective-subtriple"
    SUBEXTENSION = "subextension"


@dataclass(frozen=True)
class SubobjectWitness:
    """Invariants (r1', d1', r2', d2') of a candidate destabilizer.

    ``None`` on a side denotes the zero sheaf.  Both sides zero is rejected.
    """

    sub1: Optional[BundleInvariant]
    sub2: Optional[BundleInvariant]
    kind: WitnessKind = WitnessKind.SUBTRIPLE

    def __post_init__(self):
        if self.sub1 is None and self.sub2 is None:
            raise EmptySubobjectError("witness must have at least one nonzero side")

    @property
    def r1(self) -> int:
        return 0 if self.sub1 is None else self.sub1.rank

    @property
    def r2(self) -> int:
        return 0 if self.sub2 is None else self.sub2.rank

    @property
    def d1(self) -> Fraction:
        return Fraction(0) if self.sub1 is None else self.sub1.degree

    @property
    def d2(self) -> Fraction:
        return Fraction(0) if self.sub2 is None else self.sub2.degree

    @property
    def total_rank(self) -> int:
        return self.r1 + self.r2

    @property
    def total_degree(self) -> Fraction:
        return self.d1 + self.d2

    def fits_inside(self, bound: ExtensionPair) -> bool:
        return self.r1 <= bound.r1 and self.r2 <= bound.r2

    def label(self) -> str:
        def side(b):
            return "0" if b is None else f"({b.rank},{b.degree})"

        return f"[{side(self.sub1)}|{side(self.sub2)}]"


def witness(sub1, sub2, kind: WitnessKind = WitnessKind.SUBTRIPLE) -> SubobjectWitness:
    """Build a witness from (rank, degree) tuples, None for a zero side."""
    s1 = None if sub1 is None else bundle(*sub1)
    s2 = None if sub2 is None else bundle(*sub2)
    return SubobjectWitness(s1, s2, kind)


@dataclass(frozen=True)
class ParamTuple:
    """Stability parameters (a1, a2, t1, t2); weights must be non-negative.

    Zero weights are permitted but flagged (``has_zero_weight``): the
    surjective-triple reduction naturally produces a vanishing first weight.
    """

    a1: Fraction
    a2: Fraction
    tau1: Fraction
    tau2: Fraction

    def __post_init__(self):
        for name in ("a1", "a2", "tau1", "tau2"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.a1 < 0 or self.a2 < 0:
            raise StabilityError("weights a1, a2 must be non-negative")

    @property
    def has_zero_weight(self) -> bool:
        return self.a1 == 0 or self.a2 == 0

    def scaled(self, lam: Rational) -> "ParamTuple":
        lam = as_fraction(lam)
        if lam <= 0:
            raise StabilityError("scale factor must be positive")
        return ParamTuple(lam * self.a1, lam * self.a2, lam * self.tau1, lam * self.tau2)

    def constraint_defect(self, bound: ExtensionPair) -> Fraction:
        return (self.a1 * bound.d1 + self.a2 * bound.d2
                - self.tau1 * bound.r1 - self.tau2 * bound.r2)

    def check_constraint(self, bound: ExtensionPair) -> None:
        if self.constraint_defect(bound) != 0:
            raise ConstraintError("parameters off the constraint hyperplane")


def params(a1: Rational, a2: Rational, tau1: Rational, tau2: Rational) -> ParamTuple:
    return ParamTuple(as_fraction(a1), as_fraction(a2), as_fraction(tau1), as_fraction(tau2))


@dataclass(frozen=True)
class AlphaParam:
    """Reduced extension-side parameters: the single slope shift alpha.

    ``tau`` is the common value forced by the constraint
    d1 + d2 = r1*tau + r2*(tau - alpha); the associated four-tuple is
    (1, 1, tau, tau - alpha).
    """

    alpha: Fraction
    tau: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        object.__setattr__(self, "tau", as_fraction(self.tau))

    @classmethod
    def for_pair(cls, alpha: Rational, bound: ExtensionPair) -> "AlphaParam":
        alpha = as_fraction(alpha)
        tau = (bound.total_degree + bound.r2 * alpha) / bound.total_rank
        return cls(alpha, tau)

    def to_tuple(self) -> ParamTuple:
        return ParamTuple(Fraction(1), Fraction(1), self.tau, self.tau - self.alpha)


AnyParams = Union[ParamTuple, AlphaParam]


def _as_tuple(p: AnyParams) -> ParamTuple:
    return p.to_tuple() if isinstance(p, AlphaParam) else p


def defect(p: AnyParams, sub: SubobjectWitness) -> Fraction:
    """The linear defect form whose sign on subobjects decides stability."""
    t = _as_tuple(p)
    return t.a1 * sub.d1 + t.a2 * sub.d2 - t.tau1 * sub.r1 - t.tau2 * sub.r2


def alpha_slope(sub: Union[SubobjectWitness, ExtensionPair], alpha: Rational) -> Fraction:
    """Slope shifted by alpha times the second-factor rank proportion."""
    alpha = as_fraction(alpha)
    if isinstance(sub, ExtensionPair):
        r2, rank, degree = sub.r2, sub.total_rank, sub.total_degree
    else:
        r2, rank, degree = sub.r2, sub.total_rank, sub.total_degree
    if rank == 0:
        raise EmptySubobjectError("empty subobject")
    return degree / rank + alpha * Fraction(r2, rank)


class Stability(enum.Enum):
    STABLE = "stable"
    STRICTLY_SEMISTABLE = "strictly-semistable"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class Verdict:
    status: Stability
    witness: Optional[SubobjectWitness]
    max_defect: Optional[Fraction]

    @property
    def is_stable(self) -> bool:
        return self.status is Stability.STABLE


def _witness_order_key(item):
    th, w = item
    # Ties broken toward the largest defect, then largest total rank; the
    # remaining keys only make the reported destabilizer deterministic.
    return (th, w.total_rank, w.r1, w.total_degree, w.d1)


def stability_verdict(p: AnyParams, witnesses: Iterable[SubobjectWitness],
                      bound: ExtensionPair) -> Verdict:
    """Classify the pair against a declared subobject list.

    Stable iff every witness has negative defect; a zero maximum is reported
    as strictly semistable.  The verdict for unstable / strictly semistable
    carries a maximizing witness.
    """
    t = _as_tuple(p)
    t.check_constraint(bound)
    scored = [(defect(t, w), w) for w in witnesses]
    if not scored:
        return Verdict(Stability.STABLE, None, None)
    best_theta, best_w = max(scored, key=_witness_order_key)
    if best_theta < 0:
        return Verdict(Stability.STABLE, None, best_theta)
    if best_theta == 0:
        return Verdict(Stability.STRICTLY_SEMISTABLE, best_w, best_theta)
    return Verdict(Stability.UNSTABLE, best_w, best_theta)


@dataclass(frozen=True)
class Interval:
    """Open-closed interval (lo, hi]; empty when lo >= hi."""

    lo: Fraction
    hi: Fraction

    @property
    def empty(self) -> bool:
        return self.lo >= self.hi

    def contains(self, x: Rational) -> bool:
        x = as_fraction(x)
        return self.lo < x <= self.hi


def necessary_alpha_interval(d1: Rational, d2: Rational, r1: int, r2: int) -> Interval:
    """Window of alpha values compatible with both stability and solvability.

    The lower bound comes from the trivial first-factor subobject, the upper
    bound from the sign constraint on the slope shift.
    """
    if r1 < 1 or r2 < 1:
        raise StabilityError("ranks must be >= 1")
    lo = as_fraction(d1) / r1 - as_fraction(d2) / r2
    return Interval(lo, Fraction(0))


# ---------------------------------------------------------------------------
# Parameter conversions between the three equivalent stability problems.
# ---------------------------------------------------------------------------

class Viewpoint(enum.Enum):
    EXTENSION = "extension"
    COHOMOLOGY_TRIPLE = "cohomology-triple"
    SURJECTIVE_TRIPLE = "surjective-triple"


@dataclass(frozen=True)
class ParamViews:
    """One stability problem expressed in all three parameterizations."""

    extension: Optional[AlphaParam]
    cohomology: ParamTuple
    surjective: ParamTuple
    bound: ExtensionPair

    @property
    def surjective_bound(self) -> ExtensionPair:
        """The pair (E2, E) on which the surjective-triple defect is evaluated."""
        e = BundleInvariant(self.bound.total_rank, self.bound.total_degree)
        return ExtensionPair(self.bound.e2, e)


def cohomology_to_surjective(t: ParamTuple) -> ParamTuple:
    return ParamTuple(t.a2 - t.a1, t.a1, t.tau2 - t.tau1, t.tau1)


def surjective_to_cohomology(t: ParamTuple) -> ParamTuple:
    return ParamTuple(t.a2, t.a1 + t.a2, t.tau2, t.tau1 + t.tau2)


def convert_parameters(view: Viewpoint, p: AnyParams, bound: ExtensionPair) -> ParamViews:
    """Express parameters in all three viewpoints.

    The extension slot is populated only when the cohomology-side weights are
    equal and positive (the reduced alpha form exists exactly then).
    Conversions are exact and mutually inverse.
    """
    if view is Viewpoint.EXTENSION:
        if not isinstance(p, AlphaParam):
            p = AlphaParam.for_pair(as_fraction(p), bound)  # type: ignore[arg-type]
        coh = p.to_tuple()
    elif view is Viewpoint.COHOMOLOGY_TRIPLE:
        coh = _as_tuple(p)
    elif view is Viewpoint.SURJECTIVE_TRIPLE:
        coh = surjective_to_cohomology(_as_tuple(p))
    else:  # pragma: no cover
        raise StabilityError(f"unknown viewpoint {view}")

    coh.check_constraint(bound)
    surj = cohomology_to_surjective(coh)
    ext = None
    if coh.a1 == coh.a2 and coh.a1 > 0:
        scaled = coh.scaled(Fraction(1, 1) / coh.a1)
        ext = AlphaParam(scaled.tau1 - scaled.tau2, scaled.tau1)
    return ParamViews(ext, coh, surj, bound)


def witness_to_surjective(w: SubobjectWitness) -> SubobjectWitness:
    """Map a subtriple witness (E1', E2') to its surjective-side image (E2', E').

    The total space E' carries the summed invariants; the map preserves the
    defect value under the parameter swap.
    """
    total = None
    if w.total_rank > 0:
        total = BundleInvariant(w.total_rank, w.total_degree)
    return SubobjectWitness(w.sub2, total, WitnessKind.SURJECTIVE_SUBTRIPLE)


def defect_swap_pair(p: AnyParams, w: SubobjectWitness) -> tuple[Fraction, Fraction]:
    """Both sides of the defect identity linking the two triple viewpoints.

    Returns (defect on (E1',E2') at (a1,a2,t1,t2),
             defect on (E2',E')  at (a2-a1,a1,t2-t1,t1)); they agree exactly.
    """
    t = _as_tuple(p)
    lhs = defect(t, w)
    swapped = ParamTuple.__new__(ParamTuple)  # bypass weight-sign validation
    object.__setattr__(swapped, "a1", t.a2 - t.a1)
    object.__setattr__(swapped, "a2", t.a1)
    object.__setattr__(swapped, "tau1", t.tau2 - t.tau1)
    object.__setattr__(swapped, "tau2", t.tau1)
    rhs = defect(swapped, witness_to_surjective(w))
    return lhs, rhs


# ---------------------------------------------------------------------------
# Decomposition of a non-surjective subtriple into its two surjective parts.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitReport:
    """Exact bookkeeping for splitting a subtriple along the image of pi'.

    All defects are evaluated on pairs inside the surjective triple (E, E2),
    first slot weighted by a1.  The identity recorded here is

        theta(E', image) + theta(preimage, E2')
            = 2*theta(E', E2') + (a1 - a2)*delta_d + (tau2 - tau1)*delta_r

    (derived by exact expansion; the two sides are returned separately so the
    cancellation can be asserted).
    """

    theta: Fraction
    theta_image_term: Fraction
    theta_preimage_term: Fraction
    delta_d: Fraction
    delta_r: int

    @property
    def surjective_sum(self) -> Fraction:
        return self.theta_image_term + self.theta_preimage_term

    def identity_sides(self, p: ParamTuple) -> tuple[Fraction, Fraction]:
        rhs = 2 * self.theta + (p.a1 - p.a2) * self.delta_d \
            + (p.tau2 - p.tau1) * self.delta_r
        return self.surjective_sum, rhs


def surjective_split(p: AnyParams,
                     total: BundleInvariant,
                     base: BundleInvariant,
                     kernel: Optional[BundleInvariant],
                     image: Optional[BundleInvariant],
                     preimage: BundleInvariant) -> SplitReport:
    """Split a (possibly non-surjective) subtriple (E', E2') of (E, E2).

    ``kernel``, ``image`` and ``preimage`` are the invariants of Ker(pi'),
    pi'(E') and pi^{-1}(E2').  Rank/degree additivity along the two exact
    sequences 0 -> Ker -> E' -> Im -> 0 and 0 -> Ker -> Pre -> E2' -> 0 is
    enforced; the rank jump delta_r is asserted non-negative.
    """
    t = _as_tuple(p)
    rk = 0 if kernel is None else kernel.rank
    dk = Fraction(0) if kernel is None else kernel.degree
    ri = 0 if image is None else image.rank
    di = Fraction(0) if image is None else image.degree

    if total.rank != rk + ri or total.degree != dk + di:
        raise StabilityError("kernel/image additivity violated for E'")
    if preimage.rank != rk + base.rank or preimage.degree != dk + base.degree:
        raise StabilityError("kernel/base additivity violated for the preimage")

    delta_r = preimage.rank - total.rank
    delta_d = preimage.degree - total.degree
    if delta_r < 0:
        raise StabilityError("rank of the preimage cannot drop below rank E'")

    def th(first_r, first_d, second_r, second_d):
        return t.a1 * first_d + t.a2 * second_d - t.tau1 * first_r - t.tau2 * second_r

    theta = th(total.rank, total.degree, base.rank, base.degree)
    theta_img = th(total.rank, total.degree, ri, di)
    theta_pre = th(preimage.rank, preimage.degree, base.rank, base.degree)
    report = SplitReport(theta, theta_img, theta_pre, delta_d, delta_r)
    lhs, rhs = report.identity_sides(t)
    if lhs != rhs:  # pure arithmetic; failure would be a programming error
        raise AssertionError("surjective split identity failed to close")
    return report


# ---------------------------------------------------------------------------
# The small-parameter region where triple stability controls both factors.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegionReport:
    stable_set_empty: bool
    in_region: bool
    margin: Fraction            # tau1/a1 - slope(E1)
    eps1_bound: Fraction
    eps2_bound: Fraction


def epsilon_region_report(bound: ExtensionPair, p: AnyParams,
                          eps1: Rational, eps2: Rational) -> RegionReport:
    """Test whether parameters sit in the semistability-forcing region.

    The region is 0 < tau1/a1 - slope(E1) < eps1 together with
    tau1/a1 - slope(E1) < (a2/a1)*eps2, both strict.  The stable set is
    flagged empty whenever tau1/a1 <= slope(E1).
    """
    t = _as_tuple(p)
    if t.a1 == 0:
        raise StabilityError("region undefined")
    eps1 = as_fraction(eps1)
    eps2 = as_fraction(eps2)
    margin = t.tau1 / t.a1 - bound.e1.slope
    bound2 = (t.a2 / t.a1) * eps2
    empty = margin <= 0
    in_region = (0 < margin < eps1) and (margin < bound2)
    return RegionReport(empty, in_region, margin, eps1, bound2)
