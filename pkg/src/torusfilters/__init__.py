"""Wavelet filter banks on the n-torus.

Bracket products over the subalgebra fixed by a dilation's dual group,
low-pass and high-pass filter validation, completion of a low-pass filter
to a full bank, cascade transforms, and a det-3 example on ``T^5`` whose
low-pass filter has no continuous high-pass partners.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .lattice import (  # noqa: F401
    CosetReps,
    DilationMatrix,
    DualGroupF,
    coset_representatives,
    dual_group,
    smith_normal_form,
    validate_dilation,
)
from .torusfn import TorusFunction, bracket, coefficient_bracket  # noqa: F401
from .filters import (  # noqa: F401
    FilterBank,
    polyphase,
    reconstruct,
    unitarity_defect,
    validate_family,
    validate_low_pass,
)
from .completion import (  # noqa: F401
    align_sweep,
    complete_q2,
    gram_schmidt_smooth,
    householder_complete,
    project_and_complement,
)
from .cascade import ScalingTransform, sample_export, scaling_fourier, wavelet_fourier  # noqa: F401
from .kernels import BACKEND  # noqa: F401
