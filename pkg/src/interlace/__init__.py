"""Forward and inverse maps between interlacing spectra and perturbation vectors.

The rank-one map sends ``v`` to the spectrum of ``S + v v*``; the bordered
map sends ``(v, c)`` to the spectrum of ``[[S, v], [v*, c]]``.  Both are
inverted in closed form and by numerical continuation, and the full
preimage sets are enumerated over the real and complex fields.
"""

__version__ = "0.1.0"

from .core import (
    BORDERED,
    DEFAULT_TOL,
    RANK_ONE,
    BorderedProblem,
    FaceImage,
    FaceProfile,
    FieldVector,
    OrderedSpectrum,
    OrthantVector,
    TolerancePolicy,
    as_spectrum,
    box_bounds,
    check_interlacing_bordered,
    check_interlacing_rank_one,
    classify_faces,
    face_image_bordered,
    face_image_rank_one,
)
from .eigen import (
    EigenDecomposition,
    SecularSystem,
    arrowhead_eigenpairs,
    eig_hermitian,
    rank_one_eigenpairs,
    secular_roots_arrowhead,
    secular_roots_rank_one,
)
from .errors import *  # noqa: F401,F403
from .forward import (
    abs_map,
    check_slice_identities,
    eigenvalue_derivative,
    eigenvalue_second_derivative_bordered,
    forward,
    forward_bordered,
    forward_rank_one,
    jacobian_F,
    jacobian_G,
)
from .inverse import (
    CertificationFailed,
    ContinuationOptions,
    SolveCertificate,
    certify,
    invert_bordered_closed,
    invert_bordered_continuation,
    invert_rank_one_closed,
    invert_rank_one_continuation,
)
from .preimage import (
    PhaseAssignment,
    PreimageCount,
    SignPattern,
    enumerate_real_preimages,
    preimage_count,
    sample_complex_preimage,
    sign_patterns,
)
