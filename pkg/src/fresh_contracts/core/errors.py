"""Exceptions raised by the contract design engine."""


class FreshContractsError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FreshContractsError, ValueError):
    """An input lies outside the domain of the freshness model.

    Raised for update cycles shorter than one slot and for update frequencies
    whose QoD log argument is not positive under the given caps.
    """


class ContractShapeError(FreshContractsError, ValueError):
    """The contract and the device type set have different lengths."""


class NoFeasiblePointError(FreshContractsError, ValueError):
    """No contract on the search grid satisfies IR and IC."""


class GridTooLargeError(FreshContractsError, ValueError):
    """The exhaustive search grid exceeds the evaluation guard."""


class ConfigError(FreshContractsError, ValueError):
    """An experiment configuration file could not be read or validated."""


class TrainingDivergedError(FreshContractsError, RuntimeError):
    """Network parameters became non-finite during training."""


class CheckpointError(FreshContractsError, ValueError):
    """A checkpoint file is missing, truncated or of an unknown format."""
