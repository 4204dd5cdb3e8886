from fxy.experiments.calibration import (
    CalibrationResult,
    LoopPhaseProbe,
    calibrate_loop_phases,
    verify_calibration,
)
from fxy.experiments.dpt import (
    DptResult,
    czz_correlation,
    first_minimum,
    loschmidt_echo,
    rate_function,
    run_dpt_sweep,
)
from fxy.experiments.gates import (
    PrepReport,
    iswap,
    prepare_entangled_state,
    sqrt_iswap,
    x_gate,
)
from fxy.experiments.interference import InterferenceMap, run_ab_interference
from fxy.experiments.readout import ReadoutModel, apply_readout_error
from fxy.experiments.sideband import (
    bond_decoherence,
    compare_full_vs_effective,
    dressed_transition_frequency,
    run_sideband_rabi,
)
from fxy.experiments.sweep import SweepSpec, SweepTarget

__all__ = [
    "CalibrationResult",
    "LoopPhaseProbe",
    "calibrate_loop_phases",
    "verify_calibration",
    "DptResult",
    "czz_correlation",
    "first_minimum",
    "loschmidt_echo",
    "rate_function",
    "run_dpt_sweep",
    "PrepReport",
    "iswap",
    "prepare_entangled_state",
    "sqrt_iswap",
    "x_gate",
    "InterferenceMap",
    "run_ab_interference",
    "ReadoutModel",
    "apply_readout_error",
    "bond_decoherence",
    "compare_full_vs_effective",
    "dressed_transition_frequency",
    "run_sideband_rabi",
    "SweepSpec",
    "SweepTarget",
]
