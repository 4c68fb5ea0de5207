"""Decoherence-free interactions between giant atoms in a waveguide.

Subpackages by layer:

``tensor``
    dense operator toolkit (Kronecker products, partial trace, exponentials)
``topology``
    coupling-point layouts and the interference condition
``effective``
    averaged interaction, second-order Hamiltonian, coupling matrix J
``collision``
    cascaded collision unitaries and time-bin stream simulation
``circuit``
    gate-circuit form of the braided collision
``dispersive``
    far-detuned discrete-mode contrast
"""
__version__ = "0.1.0"

from .circuit import (  # noqa: E402
    Circuit,
    Gate,
    GateKind,
    circuit_unitary,
    compile_braided,
    compile_general,
    emit_text,
    iswap_iterations,
    parse_text,
    purity_probe,
    xy_matrix,
)
from .collision import (  # noqa: E402
    Engine,
    SimConfig,
    Trajectory,
    cascaded_unitary,
    commutator_sum,
    magnus_consistency,
    run_stream,
    run_sweep,
    simultaneous_unitary,
    subcollision_generators,
)
from .dispersive import ModeSet, dispersive_heff, windowed_average  # noqa: E402
from .effective import (  # noqa: E402
    averaged_interaction,
    coupling_matrix,
    lamb_shift_check,
    second_order_H,
)
from .registers import AtomRegister, BinRegister, JointSpace  # noqa: E402
from .topology import (  # noqa: E402
    Layout,
    Topology,
    braided,
    classify_two_atom,
    df_residual,
    layout_from_phases,
    nested,
    phases_from_positions,
    serial,
)

__all__ = [
    "AtomRegister", "BinRegister", "Circuit", "Engine", "Gate", "GateKind", "JointSpace",
    "Layout", "ModeSet", "SimConfig", "Topology", "Trajectory", "averaged_interaction",
    "braided", "cascaded_unitary", "circuit_unitary", "classify_two_atom", "commutator_sum",
    "compile_braided", "compile_general", "coupling_matrix", "df_residual", "dispersive_heff",
    "emit_text", "iswap_iterations", "lamb_shift_check", "layout_from_phases",
    "magnus_consistency", "nested", "parse_text", "phases_from_positions", "purity_probe",
    "run_stream", "run_sweep", "second_order_H", "serial", "simultaneous_unitary",
    "subcollision_generators", "windowed_average", "xy_matrix",
]
