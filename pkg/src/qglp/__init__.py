"""Noncommutative L_p analysis and Fourier analysis on finite quantum groups.

Core objects: block algebras with a tracial state (:mod:`qglp.fdalgebra`),
finite quantum groups with derived Haar state, antipode and Peter-Weyl
decomposition (:mod:`qglp.qgroup`), Fourier calculus (:mod:`qglp.fourier`),
certification of L_p-improving convolution operators (:mod:`qglp.improving`),
Cesaro limits and Hopf images (:mod:`qglp.ergodic`), and word-level reduced
free products (:mod:`qglp.freeprod`).  A FastAPI service wraps the package;
the CLI is a thin client of that service.
"""

__version__ = "0.1.0"

from .fdalgebra import (
    AlgebraElement,
    BlockStructure,
    Functional,
    is_positive,
    lp_norm,
    make_state,
    ricard_xu_defect,
)
from .qgroup import (
    QuantumGroup,
    build_function_algebra,
    build_group_algebra,
    tensor_product,
    validate_quantum_group,
)

__all__ = [
    "__version__",
    "AlgebraElement",
    "BlockStructure",
    "Functional",
    "QuantumGroup",
    "build_function_algebra",
    "build_group_algebra",
    "is_positive",
    "lp_norm",
    "make_state",
    "ricard_xu_defect",
    "tensor_product",
    "validate_quantum_group",
]
