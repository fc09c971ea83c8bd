"""Decision-process environment, actor/critic networks and the PPO learner."""

from .checkpoint import load_checkpoint, save_checkpoint
from .env import (
    ContractEnv,
    EnvConfig,
    NetworkState,
    StepOutcome,
    decode_action,
    sample_state,
    state_features,
    step,
)
from .network import (
    AdamState,
    GaussianAction,
    MlpSpec,
    PolicyParams,
    adam_step,
    backward,
    forward_actor,
    forward_critic,
    init_policy_params,
)
from .ppo import (
    EpisodeBuffer,
    EpisodeLog,
    EvaluationReport,
    PpoConfig,
    TrainingResult,
    Transition,
    clip_function,
    compute_gae,
    evaluate,
    surrogate_loss,
    train,
    value_loss,
    value_targets,
)

__all__ = [
    "AdamState",
    "ContractEnv",
    "EnvConfig",
    "EpisodeBuffer",
    "EpisodeLog",
    "EvaluationReport",
    "GaussianAction",
    "MlpSpec",
    "NetworkState",
    "PolicyParams",
    "PpoConfig",
    "StepOutcome",
    "TrainingResult",
    "Transition",
    "adam_step",
    "backward",
    "clip_function",
    "compute_gae",
    "decode_action",
    "evaluate",
    "forward_actor",
    "forward_critic",
    "init_policy_params",
    "load_checkpoint",
    "sample_state",
    "save_checkpoint",
    "state_features",
    "step",
    "surrogate_loss",
    "train",
    "value_loss",
    "value_targets",
]
