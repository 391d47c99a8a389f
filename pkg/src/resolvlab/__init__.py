"""resolvlab: spectral laboratory for free-surface compressible-flow resolvents.

Per-Fourier-mode half-space solvers, symbol-class scans, lower-bound
certification, randomized square-function estimates, contour-quadrature
time evolution and a bent-half-space perturbation solver.
"""

__version__ = "0.1.0"

from .regions import (  # noqa: F401
    FluidParams,
    ReducedParams,
    SectorSpec,
    SpectralPoint,
    in_gamma_region,
    in_lambda_region,
    in_sigma,
    reduce_params,
    sector_inequality_check,
)
from .symbols import (  # noqa: F401
    CoreSymbols,
    LopatinskiMatrix,
    SymbolParams,
    eval_M,
    eval_core,
    eval_lopatinski,
    eval_nJk,
    eval_QQprime,
)
