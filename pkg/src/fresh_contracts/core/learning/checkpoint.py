"""
Binary checkpoints of the actor/critic parameters and optimizer moments.

Layout, all little-endian:
    magic (4 bytes) | version (uint32) | header length n (int64)
    | n int64 header values | 5 float64 settings
    | params | Adam first moments | Adam second moments (float64 each)

The int64 header holds input dim, action dim, the actor hidden widths
(count first), the critic hidden widths (count first), both init seeds and
the Adam step. The float64 settings are both output gains and the Adam
beta1, beta2 and eps.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from fresh_contracts.core.errors import CheckpointError
from fresh_contracts.core.learning.network import AdamState, MlpSpec, PolicyParams

CHECKPOINT_MAGIC = b"FQCK"
CHECKPOINT_VERSION = 1

_INT = np.dtype("<i8")
_FLOAT = np.dtype("<f8")
_VERSION = np.dtype("<u4")
_SETTINGS = 5

logger = logging.getLogger(__name__)


def _header(params: PolicyParams, adam: AdamState) -> np.ndarray:
    actor, critic = params.actor_spec, params.critic_spec
    return np.array(
        [
            actor.input_dim,
            actor.output_dim,
            len(actor.hidden_layers),
            *actor.hidden_layers,
            len(critic.hidden_layers),
            *critic.hidden_layers,
            actor.init_seed,
            critic.init_seed,
            adam.step,
        ],
        dtype=_INT,
    )


def save_checkpoint(path: Path, params: PolicyParams, adam: AdamState) -> Path:
    """Write parameters and optimizer state to ``path``."""
    path = Path(path)
    header = _header(params, adam)
    settings = np.array(
        [
            params.actor_spec.output_gain,
            params.critic_spec.output_gain,
            adam.beta1,
            adam.beta2,
            adam.eps,
        ],
        dtype=_FLOAT,
    )
    payload = b"".join(
        [
            CHECKPOINT_MAGIC,
            np.array([CHECKPOINT_VERSION], dtype=_VERSION).tobytes(),
            np.array([header.size], dtype=_INT).tobytes(),
            header.tobytes(),
            settings.tobytes(),
            params.vector.astype(_FLOAT).tobytes(),
            np.asarray(adam.m).astype(_FLOAT).tobytes(),
            np.asarray(adam.v).astype(_FLOAT).tobytes(),
        ]
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(payload)
    logger.info(f"Saved checkpoint with {params.vector.size} parameters to {path}")
    return path


class _Reader:
    def __init__(self, data: bytes, source: Path) -> None:
        self.data = data
        self.offset = 0
        self.source = source

    def take(self, dtype: np.dtype, count: int) -> np.ndarray:
        end = self.offset + dtype.itemsize * count
        if count < 0 or end > len(self.data):
            raise CheckpointError(f"Checkpoint {self.source} is truncated")
        values = np.frombuffer(self.data, dtype=dtype, count=count, offset=self.offset)
        self.offset = end
        return values.copy()


def load_checkpoint(path: Path) -> tuple[PolicyParams, AdamState]:
    """Read a checkpoint written by :func:`save_checkpoint`.

    Raises:
        CheckpointError: if the file is missing, truncated, or not a
            checkpoint of a supported version.
    """
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"Checkpoint not found: {path}")
    data = path.read_bytes()
    if data[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path} is not a checkpoint file")

    reader = _Reader(data, path)
    reader.offset = len(CHECKPOINT_MAGIC)
    version = int(reader.take(_VERSION, 1)[0])
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"Unsupported checkpoint version {version} in {path}, "
            f"expected {CHECKPOINT_VERSION}"
        )
    header = [int(v) for v in reader.take(_INT, int(reader.take(_INT, 1)[0]))]
    actor_gain, critic_gain, beta1, beta2, eps = reader.take(_FLOAT, _SETTINGS)

    try:
        input_dim, action_dim, n_actor = header[:3]
        actor_hidden = tuple(header[3 : 3 + n_actor])
        n_critic = header[3 + n_actor]
        rest = header[4 + n_actor :]
        critic_hidden = tuple(rest[:n_critic])
        actor_seed, critic_seed, adam_step = rest[n_critic:]
    except (ValueError, IndexError) as e:
        raise CheckpointError(f"Malformed checkpoint header in {path}: {e}") from e

    actor_spec = MlpSpec(
        input_dim=input_dim,
        hidden_layers=actor_hidden,
        output_dim=action_dim,
        init_seed=actor_seed,
        output_gain=float(actor_gain),
    )
    critic_spec = MlpSpec(
        input_dim=input_dim,
        hidden_layers=critic_hidden,
        output_dim=1,
        init_seed=critic_seed,
        output_gain=float(critic_gain),
    )
    size = actor_spec.param_count + action_dim + critic_spec.param_count
    vector = reader.take(_FLOAT, size)
    adam = AdamState(
        m=reader.take(_FLOAT, size),
        v=reader.take(_FLOAT, size),
        step=adam_step,
        beta1=float(beta1),
        beta2=float(beta2),
        eps=float(eps),
    )
    if reader.offset != len(data):
        raise CheckpointError(f"Unexpected trailing bytes in checkpoint {path}")

    logger.debug(f"Loaded checkpoint {path} (Adam step {adam_step})")
    return PolicyParams(actor_spec, critic_spec, vector), adam
