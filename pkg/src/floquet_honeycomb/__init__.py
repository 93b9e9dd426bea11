"""Floquet topology of a periodically driven honeycomb lattice.

Library layout:

- ``model``      lattice geometry, Bloch and real-space extended operators
- ``disorder``   on-site disorder sampling (uncorrelated and speckle-like)
- ``invariants`` Chern, winding and Bott indices
- ``phases``     analytic boundaries and clean-system classification
- ``born``       lowest-order disorder self-energies and shifted boundaries
- ``dynamics``   stroboscopic evolution and edge transport diagnostics
- ``cli``        batch front end with presets and manifests
"""

from .model import (
    BLUE,
    RED,
    FloquetOperator,
    LatticeSpec,
    ModelParams,
    bond_vectors,
    build_bloch_blocks,
    build_realspace_floquet,
    build_ribbon_bloch,
    dirac_points,
    hopping_amplitude,
    instantaneous_hamiltonian,
    load_operator,
    nnn_vectors,
    primitive_vectors,
    quasienergy_spectrum,
    reciprocal_vectors,
    save_operator,
)

__version__ = "0.1.0"
