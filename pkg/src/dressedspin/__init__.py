"""Pulse-level simulator for dressed spin qubits in a global on-resonance field."""

from .core import (
    Basis,
    BasisMismatchError,
    HermitianOperator,
    StateVector,
    UnitaryOperator,
    apply,
    basis_state,
    eigh,
    gate_fidelity,
    propagator,
    tensor,
)
from .model import (
    DoubleDotParams,
    ParameterError,
    ReducedHamiltonian,
    RegimeError,
    SingleQubitParams,
    axis_angle,
    build_hamiltonian,
    generalized_rabi,
    hadamard_conjugate,
    singlet_triplet_form_check,
    sw_reduced,
    sw_reduced_generic,
    to_singlet_triplet,
)
from .dynamics import (
    Constant,
    ControlWaveform,
    EvolutionResult,
    LinearRamp,
    PulseSchedule,
    Segment,
    Sinusoid,
    SpectrumScan,
    Square,
    StepControl,
    constant_schedule,
    evolve,
    evolve_unitary,
    spectrum_scan,
)

__version__ = "0.1.0"
