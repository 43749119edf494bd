"""Truncated signatures, log-signatures, log-ODE solves and signature kernels."""

__version__ = "0.1.0"

from .tensor_algebra import (
    AlgebraShape,
    TruncatedTensor,
    add,
    concat_mul,
    dim,
    scale,
    tensor_exp,
    tensor_log,
    unit,
)
from .lie_basis import (
    LyndonBasis,
    LyndonCoordinates,
    bracket_to_tensor,
    build_basis,
    coords_to_tensor,
    tensor_to_coords,
)
from .stream import (
    PiecewiseLinearPath,
    Stream,
    TickTable,
    embed_counting,
    embed_linear,
    insert_points,
    parse_table,
    parse_ticks,
)
from .signature import SignatureResult, chen_concat, levy_area, log_signature, signature
from .logode import LogOdeConfig, VectorFieldSet, frozen_field, logode_step, solve_cde
from .sigkernel import StaticKernel, gram, mmd2_unbiased, sig_kernel
