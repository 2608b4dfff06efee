from .config import (ClockSpec, ConfigError, GeneratorSpec, InterferenceSpec,
                     MacSpec, RadioSpec, ShareSpec, SimConfig, TopologySpec,
                     TrafficSpec, load_config, resolve_shifts, resolve_topology)
from .engine import (ConnectivityResult, ShareState, auto_engaged,
                     classify_quorum_shift, compare_to_bound,
                     measure_aggregation_delay, node_pattern,
                     physical_connectivity_check, quorum_share, run,
                     run_config, share_pattern)
from .report import SimReport
from .sweep import (SweepMatrix, run_baseline_comparison, rows_to_csv,
                    summarize_medians)

__all__ = [
    "ClockSpec", "ConfigError", "ConnectivityResult", "GeneratorSpec",
    "InterferenceSpec", "MacSpec", "RadioSpec", "ShareSpec", "ShareState",
    "SimConfig", "SimReport", "SweepMatrix", "TopologySpec", "TrafficSpec",
    "auto_engaged", "classify_quorum_shift", "compare_to_bound",
    "load_config", "measure_aggregation_delay", "node_pattern",
    "physical_connectivity_check", "quorum_share", "resolve_shifts",
    "resolve_topology", "rows_to_csv", "run", "run_baseline_comparison",
    "run_config", "share_pattern", "summarize_medians",
]
