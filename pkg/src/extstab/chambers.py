"""Walls, chambers and the complete classification of rank-one extensions.

The parameter space for a fixed bound pair is cut into chambers by the walls
{ defect(params, w) = 0 }, one per numerical subobject class w.  General wall
enumeration is truncated to a caller-supplied degree box (no a-priori bound
makes the wall set finite), and every report records the truncation radius.

For extensions of one line bundle by another the subobject lists are complete
and everything is decided exactly: the stable window in the slope-shift alpha
is (d1 - d2, d1 + d2 - 2*div), where div is the maximal degree of a line
subbundle of the extension bundle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

from .invariants import (
    AlphaParam,
    BundleInvariant,
    ExtensionPair,
    Rational,
    Stability,
    StabilityError,
    SubobjectWitness,
    Verdict,
    WitnessKind,
    as_fraction,
    witness,
)


class LineCaseError(StabilityError):
    """Raised when data violates the d1 < d2 rank-one hypotheses."""


# ---------------------------------------------------------------------------
# Wall enumeration inside a degree box.
# ---------------------------------------------------------------------------

Normal = tuple[int, int, int, int]


@dataclass(frozen=True)
class Wall:
    """A codimension-one wall, represented by a primitive integer normal.

    ``normal`` is (d1', d2', -r1', -r2') scaled to a canonical primitive
    representative (gcd 1, first nonzero entry positive).  ``degenerate``
    marks normals parallel to the constraint normal: for those the defect
    vanishes identically on the parameter space and no actual wall is cut.
    """

    witness: SubobjectWitness
    normal: Normal
    degenerate: bool
    degree_box: int


def _canonical_normal(n: Sequence[int]) -> Normal:
    g = 0
    for v in n:
        g = math.gcd(g, abs(v))
    if g == 0:
        return tuple(0 for _ in n)  # type: ignore[return-value]
    scaled = [v // g for v in n]
    for v in scaled:
        if v != 0:
            if v < 0:
                scaled = [-u for u in scaled]
            break
    return tuple(scaled)  # type: ignore[return-value]


def _parallel(n: Sequence[int], m: Sequence[int]) -> bool:
    for i in range(4):
        for j in range(i + 1, 4):
            if n[i] * m[j] - n[j] * m[i] != 0:
                return False
    return True


def enumerate_walls(bound: ExtensionPair, degree_box: int) -> List[Wall]:
    """All walls from integer witnesses with |d_i'| <= degree_box.

    Witness sides run over 0 <= r_i' <= r_i with a zero-rank side forced to
    degree zero; the two-sided zero witness is excluded.  Walls are
    deduplicated by projective equivalence of their normals; degenerate
    normals are flagged, not dropped.
    """
    if degree_box < max(abs(int(bound.d1)), abs(int(bound.d2))):
        raise StabilityError("degree_box must cover the bound pair degrees")
    full_normal = (int(bound.d1), int(bound.d2), -bound.r1, -bound.r2)
    seen: dict[Normal, Wall] = {}
    degs = range(-degree_box, degree_box + 1)
    for r1p in range(bound.r1 + 1):
        for r2p in range(bound.r2 + 1):
            if r1p == 0 and r2p == 0:
                continue
            d1s = degs if r1p > 0 else (0,)
            for d1p in d1s:
                d2s = degs if r2p > 0 else (0,)
                for d2p in d2s:
                    key = _canonical_normal((d1p, d2p, -r1p, -r2p))
                    if key in seen:
                        continue
                    w = witness(None if r1p == 0 else (r1p, d1p),
                                None if r2p == 0 else (r2p, d2p))
                    seen[key] = Wall(w, key, _parallel(key, full_normal), degree_box)
    return sorted(seen.values(), key=lambda wall: wall.normal)


def walls_meeting_window(walls: Sequence[Wall], tau_bound: Rational) -> List[Wall]:
    """Walls whose hyperplane meets the slice {a1 = a2 = 1, |tau_i| <= T}.

    In that slice a wall reads tau1*r1' + tau2*r2' = d1' + d2'; it meets the
    box exactly when |d1' + d2'| <= (r1' + r2')*T (weights are non-negative).
    """
    t = as_fraction(tau_bound)
    hits = []
    for wall in walls:
        w = wall.witness
        s = w.total_degree
        if w.total_rank == 0:
            if s == 0:
                hits.append(wall)
        elif abs(s) <= w.total_rank * t:
            hits.append(wall)
    return hits


def slice_line_classes(walls: Sequence[Wall]) -> set[tuple[int, int, int]]:
    """Canonical traces of walls in the slice {a1 = a2 = 1}.

    A wall cuts the slice along tau1*r1' + tau2*r2' = d1' + d2', so its trace
    is determined by (r1', r2', d1' + d2') up to scale; distinct box-level
    normals can share one trace.
    """
    out = set()
    for wall in walls:
        w = wall.witness
        key = _canonical_normal((w.r1, w.r2, int(w.total_degree)))
        out.add((key[0], key[1], key[2]))
    return out


def stable_box_bound(bound: ExtensionPair, tau_bound: Rational) -> int:
    """Degree box beyond which the slice traces of window walls stop growing.

    Any slice line with |d1' + d2'| <= (r1' + r2')*T is realized by witness
    degrees of magnitude at most max(r1, r2)*T, so boxes past that bound only
    reproduce slice-line classes already found (compare via
    ``slice_line_classes``; the raw four-dimensional wall list itself keeps
    growing with the box, which is why reports carry the truncation radius).
    """
    t = as_fraction(tau_bound)
    b = max(bound.r1, bound.r2) * t
    return max(int(math.ceil(b)), abs(int(bound.d1)), abs(int(bound.d2)))


# ---------------------------------------------------------------------------
# Rank-one extensions: critical values, classification, stratification.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DivisorData:
    """Maximal degree of a line subbundle of the extension bundle.

    This is an analytic input: it belongs to a specific extension, not to the
    numerical pair, and callers must supply it.  For extensions of L2 by L1
    it never exceeds deg L2, with equality exactly for the split extension.
    """

    div: int

    def check_against(self, d2: int) -> None:
        if self.div > d2:
            raise LineCaseError("div cannot exceed the quotient degree d2")


def _require_line_case(d1: int, d2: int) -> None:
    if d1 >= d2:
        raise LineCaseError("outside the rank-one hypotheses (need d1 < d2)")


def alpha_critical_values(d1: int, d2: int) -> List[int]:
    """The length-2 grid of walls on the alpha line: d1-d2, d1-d2+2, ..., d2-d1."""
    _require_line_case(d1, d2)
    return list(range(d1 - d2, d2 - d1 + 1, 2))


@dataclass(frozen=True)
class StratumLabel:
    """Interval (k, k+2) of the alpha grid containing alpha, or the wall k."""

    k: int
    on_wall: bool

    def name(self) -> str:
        return f"wall@{self.k}" if self.on_wall else f"Ext_{self.k}"


def stratum_of_alpha(d1: int, d2: int, alpha: Rational) -> StratumLabel:
    a = as_fraction(alpha)
    base = d1 - d2
    offset = a - base
    if offset.denominator == 1 and int(offset) % 2 == 0:
        return StratumLabel(int(a), True)
    k = base + 2 * math.floor(offset / 2)
    return StratumLabel(k, False)


def classify_extension(d1: int, d2: int, div: DivisorData | int,
                       alpha: Rational) -> tuple[Verdict, StratumLabel]:
    """Exact verdict for a rank-one extension with known div, plus its stratum.

    Stable on the open window (d1-d2, d1+d2-2*div), strictly semistable on
    its boundary, unstable elsewhere; the destabilizer is the first-factor
    line below the window and the best lifted line above it.
    """
    _require_line_case(d1, d2)
    dd = div if isinstance(div, DivisorData) else DivisorData(div)
    dd.check_against(d2)
    a = as_fraction(alpha)
    lo = Fraction(d1 - d2)
    hi = Fraction(d1 + d2 - 2 * dd.div)
    label = stratum_of_alpha(d1, d2, a)

    w_first = witness((1, d1), None, WitnessKind.SUBEXTENSION)
    w_lift = witness(None, (1, dd.div), WitnessKind.SUBEXTENSION)
    if lo < a < hi:
        return Verdict(Stability.STABLE, None, None), label
    if a <= lo:
        status = Stability.STRICTLY_SEMISTABLE if a == lo else Stability.UNSTABLE
        return Verdict(status, w_first, None), label
    status = Stability.STRICTLY_SEMISTABLE if a == hi else Stability.UNSTABLE
    return Verdict(status, w_lift, None), label


def admissible_witnesses_line_case(d1: int, d2: int, div: DivisorData | int,
                                   min_degree: Optional[int] = None
                                   ) -> List[SubobjectWitness]:
    """Complete witness list for the rank-one stability verdict.

    The subextensions of a rank-one extension are the first factor itself and
    the lifted line subbundles, whose degree is at most div.  Lines of lower
    degree have strictly smaller defect, so truncating the (downward
    infinite) family at ``min_degree`` changes no verdict; by default two
    shadow degrees below div are kept.
    """
    _require_line_case(d1, d2)
    dd = div if isinstance(div, DivisorData) else DivisorData(div)
    dd.check_against(d2)
    floor_deg = dd.div - 2 if min_degree is None else min_degree
    out = [witness((1, d1), None, WitnessKind.SUBEXTENSION)]
    for deg in range(dd.div, floor_deg - 1, -1):
        out.append(witness(None, (1, deg), WitnessKind.SUBEXTENSION))
    return out


def params_for_alpha(d1: int, d2: int, alpha: Rational) -> AlphaParam:
    return AlphaParam.for_pair(as_fraction(alpha),
                               ExtensionPair(BundleInvariant(1, Fraction(d1)),
                                             BundleInvariant(1, Fraction(d2))))


# ---------------------------------------------------------------------------
# The containment diagram of alpha strata.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Stratum:
    k: int                       # stratum = alpha in the open interval (k, k+2)
    max_div: int                 # extensions with div <= max_div lie in it

    @property
    def interval(self) -> tuple[int, int]:
        return (self.k, self.k + 2)

    @property
    def name(self) -> str:
        return f"Ext_{self.k}"


@dataclass(frozen=True)
class AlphaStratification:
    """Critical values, strata and the containment chain between them.

    The chain runs from the widest stratum (all non-split extensions) down to
    Ext_plus; Ext_minus and Ext_plus are the strata the bundle-level
    semistable and stable loci attach to, with the parity-dependent indices
    -2/0 (even d1-d2) or -1/+1 (odd).  Containments are emitted as directed
    edges (superset, subset).
    """

    d1: int
    d2: int
    critical_values: List[int]
    strata: List[Stratum]
    edges: List[tuple[str, str]]
    aliases: dict[str, str]
    ext_star_index: int
    ext_minus_index: int
    ext_plus_index: int
    stable_bundle_max_div: int
    semistable_bundle_max_div: int

    def stratum(self, k: int) -> Stratum:
        for s in self.strata:
            if s.k == k:
                return s
        raise KeyError(k)


def stratum_max_div(d1: int, d2: int, k: int) -> int:
    # alpha-stable throughout (k, k+2) iff d1 + d2 - 2*div >= k + 2.
    return (d1 + d2 - k) // 2 - 1


def strata_diagram(d1: int, d2: int) -> AlphaStratification:
    _require_line_case(d1, d2)
    even = (d1 - d2) % 2 == 0
    k_minus = -2 if even else -1
    k_plus = 0 if even else 1
    ks = list(range(d1 - d2, k_plus + 1, 2))
    strata = [Stratum(k, stratum_max_div(d1, d2, k)) for k in ks]
    edges = [(f"Ext_{a}", f"Ext_{b}") for a, b in zip(ks, ks[1:])]
    edges.append(("Ext_ss", "Ext_s"))
    aliases = {
        "Ext*": f"Ext_{d1 - d2}",
        "Ext_ss": f"Ext_{k_minus}",
        "Ext_s": f"Ext_{k_plus}",
    }
    return AlphaStratification(
        d1=d1, d2=d2,
        critical_values=alpha_critical_values(d1, d2),
        strata=strata,
        edges=edges,
        aliases=aliases,
        ext_star_index=d1 - d2,
        ext_minus_index=k_minus,
        ext_plus_index=k_plus,
        stable_bundle_max_div=(d1 + d2 - 1) // 2,
        semistable_bundle_max_div=(d1 + d2) // 2,
    )
