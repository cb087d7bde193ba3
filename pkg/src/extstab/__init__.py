"""Stability of holomorphic extensions: exact combinatorics plus a torus solver.

Two halves, talking to each other through a common parameter language:

* exact (rational) stability verdicts for pairs-with-subobjects, and the
  wall-and-chamber geometry of the parameter space (``invariants``,
  ``chambers``);
* a numerical solver for the coupled vortex / deformed Hermitian-Einstein
  equations of rank-one extensions on the unit flat torus (``torus``,
  ``vortex``), whose convergence behaviour is cross-checked against the
  exact verdicts.
"""

__version__ = "0.1.0"

from .invariants import (  # noqa: F401
    AlphaParam,
    BundleInvariant,
    ExtensionPair,
    ParamTuple,
    Stability,
    SubobjectWitness,
    Verdict,
    Viewpoint,
    WitnessKind,
    alpha_slope,
    as_fraction,
    bundle,
    convert_parameters,
    defect,
    defect_swap_pair,
    line_pair,
    necessary_alpha_interval,
    pair,
    params,
    stability_verdict,
    witness,
)
