"""Host field framework with an embedded guest-script runtime.

Numerical fields live in host-owned buffers; user-supplied scripts run in an
embedded guest scope and exchange data with the host by per-element copy,
whole-field copy, or by reference through array views over raw buffer
addresses. Ships a scripted-boundary-profile demonstrator, an explicit
finite-difference heat solver with a scripted step, a linear-elastic
constitutive law with analytic and neural-network scripted variants, and a
benchmark CLI comparing the transfer strategies.
"""

from .bridge import (
    CopyStats,
    GuestError,
    GuestErrorKind,
    RefLease,
    Session,
    TransferStrategy,
    close_session,
    exec_statement,
    get_element,
    get_field_copy,
    get_scalar,
    load_script,
    open_session,
    publish_field_by_ref,
    put_element,
    put_field_copy,
    release_lease,
    set_scalar,
)
from .fields import (
    ErrorNorms,
    FieldBuffer,
    ShapeMismatchError,
    StructuredGrid,
    SYMM_COMPONENTS,
    error_norms,
    expand_symmetric,
    make_grid,
    read_field_csv,
    symmetrize_gradient,
    write_field_csv,
)
from .heat import (
    HeatConfig,
    NativeStep,
    ProfileBC,
    ScriptedStep,
    SolveReport,
    compute_gamma,
    centre_cell_value,
    centre_line_profile,
    eval_scripted_profile,
    jacobi_fd_step,
    native_fd_step,
    profile_reference,
    scripted_fd_step,
    seed_boundary_cells,
    solve_steady,
)
from .hooke import (
    DEFAULT_STRAIN_RANGE,
    LameParams,
    LawKind,
    WeightBundle,
    build_exact_nn_weights,
    hooke_matrix,
    hooke_native,
    lame_from_engineering,
    load_weights,
    nn_predict,
    save_weights,
    scripted_stress,
    synth_strain_field,
)

__version__ = "0.1.0"
