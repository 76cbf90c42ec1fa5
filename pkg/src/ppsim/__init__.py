"""Overlaps of parity-preserving brick-wall circuits via hole-punched Pfaffian sums."""
from .circuits import (
    Circuit,
    floquet_circuit,
    half_filling_states,
    load_circuit,
    dump_circuit,
    random_circuit,
    trotter_circuit,
)
from .contract import (
    BudgetExceededError,
    ExpansionResult,
    PfSumTable,
    contract_exact,
    contract_truncated,
    cutoff_order,
    eval_sweep,
    pfsum_table,
    runtime_estimate,
    simulate,
    truncation_error,
)
from .fermionize import GateNetwork, build_network, gate_tensor
from .gates import PPUGate, cphase, cz, fsim, make_ppu, random_ppu
from .oracle import overlap
from .pfaffian import pfaffian

__version__ = "0.1.0"
