"""Linear-optical networks on pure product inputs: Bargmann-Fock simulation and modal entanglement."""

from .bfseries import (
    MultivariateSeries,
    SingleModeSeries,
    VacuumOverlapError,
    apply_displacement,
    ensure_vacuum_overlap,
    fock_amplitudes,
    is_additively_separable,
    product_series,
    series_exp,
    series_log,
    substitute_linear,
)
from .entangle import EntanglementReport, product_test, schmidt_entropy, single_mode_marginal
from .focksim import FockVector, apply_network_oracle, from_bf, norm_deficit
from .network import (
    NetworkUnitary,
    elementwise_power_norms,
    haar_random_unitary,
    make_beamsplitter,
    real_rephasing_witness,
    structure_report,
)
from .states import Cat, Coherent, DisplacedSqueezed, Fock, SqueezedVacuum, g_coefficients, mode_series
from .suite import random_suite, simulate
from .theorem import Prediction, Reason, TheoremVerdict, check_quadratic_condition, classify, verify_norm_strictness

__version__ = "0.1.0"
