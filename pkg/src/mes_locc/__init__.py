"""Local discrimination of qudit maximally entangled states.

Library surface: :mod:`~mes_locc.tensor` (dense multi-qudit algebra),
:mod:`~mes_locc.states` (canonical basis, Weyl operators, the flagged
mixtures), :mod:`~mes_locc.protocols` (exact LOCC simulation),
:mod:`~mes_locc.entanglement` (Schmidt, negativity, PPT) and
:mod:`~mes_locc.verify` (check suites behind ``mes-locc verify``).
"""

from .entanglement import (
    Cut,
    entanglement_entropy,
    log_negativity,
    necessity_report,
    ppt_check,
    schmidt_decomposition,
    smolin_decomposition_check,
)
from .protocols import Branch, ProtocolRun, Transcript, bell_measurement, discriminate, distill_copy, teleport
from .states import (
    BellIndex,
    ResourceSpec,
    bell_basis,
    bell_state,
    build_rho,
    build_rho_s,
    conjugate_state,
    haar_random_state,
    resource_state,
    weyl_operator,
)
from .tensor import (
    DensityMatrix,
    StateVector,
    SubsystemLayout,
    fidelity_pure,
    hermitian_eigenvalues,
    partial_trace,
    partial_transpose,
    permute_subsystems,
    tensor_product,
    trace_norm,
)

__version__ = "0.1.0"
