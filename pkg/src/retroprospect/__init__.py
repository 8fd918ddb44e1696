"""Retro-prospective derivatives, differential connection tensors and the trendometer."""

from .dynamics import (
    ConstraintMap,
    SetValuedOracle,
    Trajectory,
    Tube,
    build_regulation_map,
    euler_step,
    minmax_entry_constraint,
    simulate,
    tangential_condition_sample,
)
from .epihypo import (
    DirectionalDerivatives,
    FermatVerdict,
    Schedule,
    estimate_directional,
    fermat_check,
    is_reversal_direction_pair,
)
from .errors import CsvFormatError, DegenerateVelocityError, EmptySampleError, ValidationError
from .evolution import (
    Evolution,
    VelocityPair,
    backward_quotient,
    forward_quotient,
    peano_quotient,
    second_order_quotient,
    velocity_pair,
)
from .kernel import AugmentedGrid, compute_kernel, kernel_membership
from .tables import SeriesTable, load_csv, write_csv
from .tensor import (
    ConnectionTensor,
    EntryClass,
    classify_entry,
    connection_tensor,
    kfold_product,
    normalized,
    outer,
    pairwise_matrix,
)
from .trendometer import (
    Kind,
    ReversalEvent,
    ReversalReport,
    analyze,
    bear_bull_proportions,
    cross_reversal_scan,
    detect_reversals,
    jerkiness_ranking,
    jerkiness_velocity,
)

__version__ = "0.1.0"
