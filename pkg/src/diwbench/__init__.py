"""diwbench: design-to-metrics workbench for direct-ink-written stretchable strain sensors."""

__version__ = "0.1.0"

from .analysis import (
    CharacterizationReport,
    CycleCurve,
    build_curves,
    characterize,
    degree_of_hysteresis,
    fit_linear,
    repeatability_stats,
    stretchability,
)
from .gcode import GCodeProgram, emit, parse
from .harness import ProtocolConfig, run_cyclic, run_repeatability, run_to_failure
from .measurement import MeasurementLog, read_csv
from .sensor import (
    CircularElectrode,
    LayerStack,
    MaterialParams,
    SensorSpec,
    SerpentinePattern,
    response_release,
    response_stretch,
    serpentine_trace_length,
    zero_capacitance,
    zero_resistance,
)
from .toolpath import FabricationPlan, PrintParams, compile_electrode, compile_serpentine, emit_fabrication_plan
from .vm import execute

__all__ = [
    "CharacterizationReport",
    "CircularElectrode",
    "CycleCurve",
    "FabricationPlan",
    "GCodeProgram",
    "LayerStack",
    "MaterialParams",
    "MeasurementLog",
    "PrintParams",
    "ProtocolConfig",
    "SensorSpec",
    "SerpentinePattern",
    "build_curves",
    "characterize",
    "compile_electrode",
    "compile_serpentine",
    "degree_of_hysteresis",
    "emit",
    "emit_fabrication_plan",
    "execute",
    "fit_linear",
    "parse",
    "read_csv",
    "repeatability_stats",
    "response_release",
    "response_stretch",
    "run_cyclic",
    "run_repeatability",
    "run_to_failure",
    "serpentine_trace_length",
    "stretchability",
    "zero_capacitance",
    "zero_resistance",
]
