"""Exact Brune and approximate lossy-Foster synthesis of fitted one-port
impedances, plus circuit quantization and qubit relaxation observables."""

__version__ = "0.1.0"

from .ratmodel import (
    TWO_PI,
    PoleResidueModel,
    RationalFunction,
    ScanSpec,
    PrReport,
    PrViolation,
    PrViolationKind,
    evaluate,
    evaluate_derivative,
    to_rational,
    from_rational,
    check_pr,
)
from .brune import (
    BruneCircuit,
    BruneStage,
    PreambleElement,
    PreambleKind,
    SynthesisOptions,
    synthesize,
    remove_jaxis_poles,
    find_min_real_part,
    extract_stage,
    extract_degenerate_stage,
)
from .foster import (
    FosterCircuit,
    FosterStage,
    DropReason,
    DroppedTerm,
    build_foster,
    stage_from_pair,
    q_factor,
)
from .quant import (
    JunctionParams,
    QuantizedSystem,
    SpectralDensity,
    SpectralDensityKind,
    Mode,
    RelaxationReport,
    build_system,
    build_system_via_transformations,
    coupling_vector,
    spectral_density,
    harmonic_modes,
    identify_qubit_mode,
    relaxation_rates,
)
from .response import (
    QubitPole,
    SweepRow,
    ladder_impedance,
    shunted_response,
    find_qubit_pole,
    sweep_lj,
)
from .io import (
    TouchstoneData,
    load_model,
    save_model,
    load_bundled_model,
    read_touchstone,
    write_touchstone,
    s_to_z,
    export_netlist,
)
