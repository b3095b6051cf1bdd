"""Linear-optics synthesis and simulation of two-qubit POVMs on a single photon.

Two qubits live on one photon (polarization and path). A teleportation stage
moves a two-photon polarization state onto that photon; a tree of gadget
layers and single-photon modules then realizes an arbitrary measurement.
"""

from .exceptions import (
    DimensionMismatch,
    DocumentError,
    InvalidConfig,
    InvalidDensity,
    InvalidPovm,
    NotEffect,
    NotHermitian,
    NotPsd,
    NotUnitary,
    PhotonPovmError,
    UnsupportedSettings,
    ZeroBranch,
    ZeroVector,
)
from .optics import GadgetSettings, ModuleSettings, assemble_four_outcome, gadget_unitary, module_kraus
from .runtime import ExperimentConfig, ExperimentReport, born_probs, run_shots, teleport_trials, verify
from .states import Bell, BellIndex, StateVector, bell_state, two_photon_state
from .synthesis import (
    CompiledUnitary,
    PovmSpec,
    SynthesisTree,
    bell_preset,
    compile_unitary,
    reconstruct_effects,
    solve_vector_map,
    synth_bipartition,
    synth_instrument,
    synth_povm,
)
from .teleport import branch, teleport_postselected, teleport_sampled

__version__ = "0.1.0"
