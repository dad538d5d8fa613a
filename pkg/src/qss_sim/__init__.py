"""Sequential (n,n)-threshold quantum secret sharing: simulator and analytics.

A dealer shares a stream of single-qubit secrets among n receivers using a
GHZ resource that is rebuilt from recycled qubits between iterations. The
package simulates the protocol exactly (all measurement branches, no
sampling) on registers of up to 8 qubits, models phase- and
amplitude-damping transmission noise, implements the weak-measurement /
reversal protection scheme with post-selection, and provides every relevant
closed-form fidelity and success probability together with cross-validation
machinery tying the two sides together.
"""

from .analysis import (
    DomainError,
    avg_f1,
    avg_f_ad,
    avg_f_opt0,
    avg_f_opt0_closed_form,
    avg_f_pd,
    avg_success_opt0,
    f0_ww,
    f1_ww,
    f_ad,
    f_ad_outcome1,
    f_pd,
    fidelity,
    in_validity_region,
    r_opt,
    region_bounds,
    sp1,
    sp2,
)
from .channels import (
    KrausChannel,
    WeakMeasurementOp,
    adc,
    apply_channel,
    apply_selective,
    pdc,
    validate_cptp,
    weak_op,
)
from .linalg import (
    DensityMatrix,
    PureState,
    embed,
    max_eigenvalue,
    partial_trace,
    su2,
    tensor,
)
from .optimize import (
    ScalarObjective,
    UnitaryObjective,
    correction_objective,
    maximize_scalar,
    optimize_correction,
)
from .protocol import (
    CORRECTION_TABLE,
    IterationReport,
    MeasurementRecord,
    NoiseSpec,
    ProtocolConfig,
    ProtocolState,
    Secret,
    Wmrqm,
    advance,
    aggregate_fidelity,
    correction,
    encode_secret,
    make_resource,
    measure_projective,
    recycle_and_rerun,
    run_iteration,
    run_protocol,
    start_chain,
    success_probability,
    withheld_outcome_state,
)

__version__ = "0.1.0"
