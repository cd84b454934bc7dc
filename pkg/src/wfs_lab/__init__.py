"""Numerical laboratory for weight-filtered spectroscopy of non-Hermitian
open quantum systems.

Layers, bottom up: operator (dense complex operators + JSON round-trip),
spectral (numerical Jordan structure), filtration (weight filtration and
monodromy), models (presets and Liouvillians), response (pulse-sequence
signal synthesis), inversion (harmonic inversion and 2D Laplace maps),
protocols (named measurement pipelines), cli (command-line front end).
"""

from .errors import (
    AliasingError,
    ChannelAmbiguityError,
    ConditioningError,
    ConfigError,
    ContaminationWarning,
    IllConditionedStructureError,
    InconsistentModelError,
    InvalidInputError,
    OnSingularityError,
    ProtocolError,
    RangeOverflowError,
    SingularBaseError,
    StiffnessError,
    TrackingError,
    WfsLabError,
)
from .operator import Operator, as_matrix
from .spectral import JordanCluster, SpectralDecomposition, matrix_exp, propagate_rk4, spectral_decompose
from .filtration import MonodromyResult, WeightFiltration, hodge_grading, monodromy_loop, weight_filtration
from .models import (
    PRESETS,
    AssembledModel,
    LiouvilleSpace,
    ModelSpec,
    assemble,
    hamiltonian_to_liouvillian,
    rotating_frame,
    winding_number,
)
from .response import (
    Axis,
    PulseSequence,
    ResponseGrid,
    add_noise,
    linear_response,
    phase_cycled,
    photon_echo_2d,
    three_pulse_3d,
)
from .inversion import (
    Inversion2DResult,
    LaplaceMap2D,
    PoleEntry,
    PoleTable,
    cross_peak_intensity,
    invert_2d,
    laplace_map,
    matrix_pencil_1d,
    pade_poles_1d,
    tikhonov_ilt_2d,
)
from .protocols import (
    HwhResult,
    IsolationReport,
    SweepResult,
    WfsResult,
    f_iso,
    hfs_project,
    hwh_tomography,
    insulation_certificate,
    sweep,
    wfs_map,
)

__version__ = "0.1.0"
