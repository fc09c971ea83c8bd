"""Contract designers: the grid oracle, reference baselines and the trained policy."""

from .baselines import (
    BaselineKind,
    OracleReplayDesigner,
    RandomContractDesigner,
    oracle_replay,
    random_contract,
)
from .oracle import (
    GridSpec,
    OracleResult,
    default_grid,
    refine,
    solve_grid,
    solve_refined,
)
from .policy import PolicyContractDesigner
from .strategy import ContractDesigner

__all__ = [
    "BaselineKind",
    "ContractDesigner",
    "GridSpec",
    "OracleReplayDesigner",
    "OracleResult",
    "PolicyContractDesigner",
    "RandomContractDesigner",
    "default_grid",
    "oracle_replay",
    "random_contract",
    "refine",
    "solve_grid",
    "solve_refined",
]
