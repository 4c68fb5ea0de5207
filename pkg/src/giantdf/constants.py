"""Numerical tolerances and limits shared by the whole package.

Tests and the ``verify`` subcommand reference these names rather than
repeating literals.
"""

#: Structural identities (Hermiticity, exact operator identities, traces).
STRUCTURAL_TOL = 1e-12

#: Unitarity of returned propagators, ``max|U^dag U - 1|``.
UNITARY_TOL = 1e-10

#: Density-matrix trace / positivity slack.
DENSITY_TOL = 1e-10

#: Associativity of Kronecker products.
KRON_TOL = 1e-13

#: Closed-form coupling-matrix identities.
COUPLING_TOL = 1e-13

#: Default tolerance of the per-atom interference residual.
DF_TOL = 1e-9

#: Largest Hilbert-space dimension built by default.
MAX_DIM = 4096

#: gamma * dt above which the coarse-graining regime is considered violated.
GAMMA_DT_WARN = 0.1

#: Upper bound on gamma * dt accepted by the braided circuit compiler.
GAMMA_DT_COMPILE_MAX = 0.25
