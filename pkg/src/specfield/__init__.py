"""Spectra of parameterised operator fields and their Hoelder continuity."""

__version__ = "0.1.0"

from .hyperspace import CompactSet, Gap, HitAndMissNbhd, edges, gaps, hausdorff, dist_point, from_points, in_nbhd, poly_image
from .operators import (
    DenseHermitian,
    PeriodicJacobi,
    Poly2,
    SymTridiag,
    UnitaryDiag,
    band_edges,
    op_norm,
    poly_norm,
    probe_ball,
    probe_unitary_arc,
    resolvent_norm,
    spectrum,
    sturm_count,
)
from .models import (
    CounterexampleConfig,
    OperatorField,
    ParameterSpace,
    almost_mathieu,
    counterexample_family,
    field_bound,
    kohmoto,
    substitution_field,
)
from .analysis import (
    GapTrack,
    HolderEstimate,
    SpectrumTrace,
    check_edge_continuity,
    detect_gap_tips,
    estimate_constants,
    p2_modulus,
    spectrum_modulus,
    sweep,
    track_gaps,
    verify_bounds,
)
