"""Tests for the PPO learner: returns, losses, gradients and training runs."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np
import pytest

from fresh_contracts.core.errors import TrainingDivergedError
from fresh_contracts.core.learning.env import EnvConfig
from fresh_contracts.core.learning.network import (
    PolicyParams,
    forward_actor,
    forward_critic,
    init_policy_params,
)
from fresh_contracts.core.learning.ppo import (
    Batch,
    EpisodeBuffer,
    PpoConfig,
    Transition,
    clip_function,
    compute_gae,
    evaluate,
    evaluate_states,
    loss_and_gradient,
    rng_streams,
    sample_states,
    surrogate_loss,
    train,
    value_loss,
    value_targets,
)

if TYPE_CHECKING:
    from pytest_mock.plugin import MockerFixture


def make_buffer(rewards, values) -> EpisodeBuffer:
    buffer = EpisodeBuffer()
    for z, (reward, value) in enumerate(zip(rewards, values), start=1):
        buffer.add(
            Transition(
                features=np.zeros(6),
                pre_squash=np.zeros(4),
                raw_action=np.zeros(4),
                log_prob_old=0.0,
                reward=float(reward),
                value_estimate=float(value),
                round_index=z,
            )
        )
    return buffer


def naive_advantages(rewards, values, gamma: float) -> np.ndarray:
    last = len(rewards) - 1
    out = np.empty(len(rewards))
    for z in range(len(rewards)):
        partial = sum(gamma ** (y - z) * rewards[y] for y in range(z, last))
        out[z] = gamma ** (last - z) * values[last] - values[z] + partial
    return out


def policy_batch(
    params: PolicyParams, n: int, seed: int, offsets=(0.0,)
) -> Batch:
    """Actions sampled from ``params``, stored with log-probs shifted by ``offsets``.

    A stored log-prob lowered by ``o`` puts the policy ratio at exp(o).
    """
    rng = np.random.default_rng(seed)
    features = rng.uniform(0, 1, (n, params.actor_spec.input_dim))
    sample = forward_actor(params, features, rng)
    shift = np.resize(np.asarray(offsets, dtype=float), n)
    return Batch(
        features=features,
        pre_squash=sample.pre_squash,
        log_prob_old=sample.log_prob - shift,
        advantages=rng.normal(size=n),
        value_targets=rng.normal(size=n),
    )


@pytest.fixture
def tiny_env() -> EnvConfig:
    return EnvConfig(horizon=16)


@pytest.fixture
def tiny_ppo() -> PpoConfig:
    return PpoConfig(minibatch_size=8, update_epochs=2, episodes=2)


class TestTransition:
    def test_round_index_starts_at_one(self) -> None:
        with pytest.raises(ValueError, match="starts at 1"):
            Transition(np.zeros(6), np.zeros(4), np.zeros(4), 0.0, 1.0, 0.0, 0)

    def test_rejects_non_finite_log_prob(self) -> None:
        with pytest.raises(ValueError, match="Non-finite"):
            Transition(np.zeros(6), np.zeros(4), np.zeros(4), -math.inf, 1.0, 0.0, 1)


class TestAdvantages:
    """Test cases for the bootstrapped advantage estimate."""

    def test_worked_value(self) -> None:
        advantages = compute_gae(make_buffer([3.0, 7.0], [1.0, 2.0]), 0.95)
        assert advantages[0] == 0.95 * 2 - 1 + 3
        assert advantages[0] == pytest.approx(3.9)
        assert advantages[-1] == 0.0

    def test_last_round_is_zero(self) -> None:
        rng = np.random.default_rng(0)
        buffer = make_buffer(rng.normal(size=10), rng.normal(size=10))
        assert compute_gae(buffer, 0.95)[-1] == 0.0

    def test_zero_rewards_and_values(self) -> None:
        advantages = compute_gae(make_buffer(np.zeros(12), np.zeros(12)), 0.95)
        np.testing.assert_array_equal(advantages, np.zeros(12))

    def test_matches_the_defining_sum(self) -> None:
        rng = np.random.default_rng(1)
        for _ in range(100):
            n = int(rng.integers(1, 65))
            gamma = float(rng.uniform(0.0, 1.0))
            rewards, values = rng.normal(size=n), rng.normal(size=n)
            np.testing.assert_allclose(
                compute_gae(make_buffer(rewards, values), gamma),
                naive_advantages(rewards, values, gamma),
                rtol=1e-12,
                atol=1e-12,
            )

    def test_empty_buffer(self) -> None:
        with pytest.raises(ValueError, match="empty"):
            compute_gae(EpisodeBuffer(), 0.95)


class TestValueTargets:
    """Test cases for the reward-to-go critic targets."""

    def test_undiscounted(self) -> None:
        targets = value_targets(make_buffer([1.0, 2.0, 3.0], [0, 0, 0]), 1.0)
        np.testing.assert_array_equal(targets, [6.0, 5.0, 3.0])

    def test_single_round(self) -> None:
        assert value_targets(make_buffer([4.5], [0.0]), 0.95).tolist() == [4.5]

    def test_no_discounting_keeps_rewards(self) -> None:
        rewards = [1.0, -2.0, 3.5]
        targets = value_targets(make_buffer(rewards, [0, 0, 0]), 0.0)
        np.testing.assert_array_equal(targets, rewards)

    def test_recursion_holds(self) -> None:
        rng = np.random.default_rng(2)
        rewards = rng.normal(size=30)
        targets = value_targets(make_buffer(rewards, np.zeros(30)), 0.95)
        for z in range(29):
            assert targets[z] == rewards[z] + 0.95 * targets[z + 1]

    def test_finalize_and_batch(self) -> None:
        buffer = make_buffer([1.0, 2.0], [0.5, 0.5])
        with pytest.raises(RuntimeError, match="finalize"):
            buffer.as_batch()
        buffer.finalize(0.9)
        batch = buffer.as_batch()
        assert len(batch) == 2
        assert batch.features.shape == (2, 6)
        buffer.clear()
        assert len(buffer) == 0
        assert buffer.advantages is None


class TestClipFunction:
    @pytest.mark.parametrize(
        "ratio,expected",
        [(0.5, 0.8), (1.0, 1.0), (1.5, 1.2), (0.8, 0.8), (1.2, 1.2)],
    )
    def test_table(self, ratio: float, expected: float) -> None:
        assert clip_function(ratio, 0.2) == pytest.approx(expected)

    def test_identity_inside_the_band(self) -> None:
        ratios = np.linspace(0.85, 1.15, 31)
        np.testing.assert_array_equal(clip_function(ratios, 0.2), ratios)

    def test_monotone(self) -> None:
        clipped = clip_function(np.linspace(0.0, 3.0, 301), 0.2)
        assert np.all(np.diff(clipped) >= 0)


class TestLosses:
    """Test cases for the clipped surrogate and value losses."""

    def test_surrogate_at_the_old_policy_is_the_mean_advantage(
        self, small_specs
    ) -> None:
        params = init_policy_params(*small_specs)
        batch = policy_batch(params, 64, seed=3)
        assert surrogate_loss(batch, params, 0.2) == pytest.approx(
            float(np.mean(batch.advantages)), abs=1e-12
        )

    @pytest.mark.parametrize("advantage,expected", [(1.5, 1.2 * 1.5), (-1.5, -3.0)])
    def test_surrogate_with_doubled_probability(
        self, small_specs, advantage: float, expected: float
    ) -> None:
        params = init_policy_params(*small_specs)
        batch = policy_batch(params, 1, seed=4, offsets=(math.log(2.0),))
        batch = Batch(
            features=batch.features,
            pre_squash=batch.pre_squash,
            log_prob_old=batch.log_prob_old,
            advantages=np.array([advantage]),
            value_targets=batch.value_targets,
        )
        assert surrogate_loss(batch, params, 0.2) == pytest.approx(expected, rel=1e-12)

    def test_value_loss_is_zero_on_target(self, small_specs) -> None:
        params = init_policy_params(*small_specs)
        batch = policy_batch(params, 16, seed=5)
        on_target = Batch(
            features=batch.features,
            pre_squash=batch.pre_squash,
            log_prob_old=batch.log_prob_old,
            advantages=batch.advantages,
            value_targets=forward_critic(params, batch.features),
        )
        assert value_loss(on_target, params) == 0.0

    def test_value_loss_single_residual(self, small_specs) -> None:
        params = init_policy_params(*small_specs)
        start, mid, end = params.critic.offsets[-1]
        base = params.critic_slice.start
        params.vector[base + start : base + mid] = 0.0
        params.vector[base + mid : base + end] = 1.0
        batch = policy_batch(params, 1, seed=6)
        batch = Batch(
            features=batch.features,
            pre_squash=batch.pre_squash,
            log_prob_old=batch.log_prob_old,
            advantages=batch.advantages,
            value_targets=np.array([3.0]),
        )
        assert value_loss(batch, params) == 4.0

    def test_doubling_residuals_quadruples_the_value_loss(self, small_specs) -> None:
        params = init_policy_params(*small_specs)
        batch = policy_batch(params, 32, seed=7)
        values = forward_critic(params, batch.features)
        residual = np.random.default_rng(8).normal(size=32)

        def with_targets(targets: np.ndarray) -> Batch:
            return Batch(
                batch.features,
                batch.pre_squash,
                batch.log_prob_old,
                batch.advantages,
                targets,
            )

        single = value_loss(with_targets(values - residual), params)
        double = value_loss(with_targets(values - 2 * residual), params)
        assert double == pytest.approx(4 * single, rel=1e-9)

    def test_normalized_advantages(self, small_specs) -> None:
        batch = policy_batch(init_policy_params(*small_specs), 128, seed=9)
        shifted = Batch(
            batch.features,
            batch.pre_squash,
            batch.log_prob_old,
            3.0 + 10.0 * batch.advantages,
            batch.value_targets,
        ).normalized()
        assert shifted.advantages.mean() == pytest.approx(0.0, abs=1e-12)
        assert shifted.advantages.std() == pytest.approx(1.0, rel=1e-6)


class TestLossGradient:
    """Test cases for the analytic gradient of c * L_V - L_C."""

    @pytest.mark.parametrize(
        "offsets",
        [(0.0,), (0.5, 0.0, -0.5)],
        ids=["old-policy", "clipped-and-unclipped"],
    )
    def test_matches_finite_differences(self, small_specs, offsets) -> None:
        """Test every parameter's derivative on 200 random points.

        Ratios sit at exp(+-0.5) or 1, away from the clip kinks, so the
        finite differences never cross a branch.
        """
        params = init_policy_params(*small_specs)
        batch = policy_batch(params, 200, seed=10, offsets=offsets)
        config = PpoConfig()

        breakdown, gradient = loss_and_gradient(params, batch, config)
        assert breakdown.total == pytest.approx(
            config.value_coef * breakdown.value - breakdown.surrogate
        )

        def total(vector: np.ndarray) -> float:
            p = PolicyParams(params.actor_spec, params.critic_spec, vector)
            return loss_and_gradient(p, batch, config)[0].total

        h = 1e-6
        numeric = np.empty_like(params.vector)
        for i in range(params.vector.size):
            up, down = params.vector.copy(), params.vector.copy()
            up[i] += h
            down[i] -= h
            numeric[i] = (total(up) - total(down)) / (2 * h)
        np.testing.assert_allclose(gradient, numeric, rtol=1e-4, atol=1e-7)


class TestTrain:
    """Test cases for the training loop."""

    def test_deterministic_for_a_seed(
        self, tiny_env: EnvConfig, tiny_ppo: PpoConfig, small_specs
    ) -> None:
        first = train(tiny_env, tiny_ppo, *small_specs, seed=312)
        second = train(tiny_env, tiny_ppo, *small_specs, seed=312)
        assert first.logs == second.logs
        assert first.params.vector.tobytes() == second.params.vector.tobytes()

    def test_seeds_differ(
        self, tiny_env: EnvConfig, tiny_ppo: PpoConfig, small_specs
    ) -> None:
        first = train(tiny_env, tiny_ppo, *small_specs, seed=312)
        second = train(tiny_env, tiny_ppo, *small_specs, seed=313)
        assert first.logs != second.logs

    def test_update_schedule(
        self, tiny_env: EnvConfig, tiny_ppo: PpoConfig, small_specs
    ) -> None:
        """Test two updates per 16-round episode with a minibatch of 8."""
        result = train(tiny_env, tiny_ppo, *small_specs, seed=1)
        assert result.update_count == 4
        assert result.adam.step == 4 * tiny_ppo.update_epochs
        assert [log.episode for log in result.logs] == [1, 2]
        assert all(math.isfinite(log.surrogate_loss) for log in result.logs)

    def test_leftover_rounds_are_dropped(self, small_specs) -> None:
        env = EnvConfig(horizon=12)
        ppo = PpoConfig(minibatch_size=8, update_epochs=1, episodes=3)
        assert train(env, ppo, *small_specs, seed=2).update_count == 3

    def test_short_episode_never_updates(self, small_specs) -> None:
        env = EnvConfig(horizon=5)
        ppo = PpoConfig(minibatch_size=8, episodes=1)
        result = train(env, ppo, *small_specs, seed=3)

        initial = init_policy_params(*small_specs, init_log_std=ppo.init_log_std)
        assert result.update_count == 0
        np.testing.assert_array_equal(result.params.vector, initial.vector)
        assert math.isnan(result.logs[0].surrogate_loss)
        assert math.isnan(result.logs[0].value_loss)
        assert -500.0 <= result.logs[0].mean_reward

    def test_reports_every_episode(
        self,
        tiny_env: EnvConfig,
        tiny_ppo: PpoConfig,
        small_specs,
        mocker: MockerFixture,
        caplog: pytest.LogCaptureFixture,
    ) -> None:
        callback = mocker.MagicMock()
        with caplog.at_level("INFO"):
            result = train(
                tiny_env, tiny_ppo, *small_specs, seed=4, on_episode=callback
            )
        assert callback.call_count == 2
        log, params = callback.call_args.args
        assert log == result.logs[-1]
        np.testing.assert_array_equal(params.vector, result.params.vector)
        assert "Episode 2/2" in caplog.text

    def test_non_finite_parameters_abort(
        self,
        tiny_env: EnvConfig,
        tiny_ppo: PpoConfig,
        small_specs,
        mocker: MockerFixture,
    ) -> None:
        def poisoned(params, gradient, state, learning_rate):
            state.step += 1
            return PolicyParams(
                params.actor_spec,
                params.critic_spec,
                np.full_like(params.vector, np.nan),
            )

        mocker.patch(
            "fresh_contracts.core.learning.ppo.adam_step", side_effect=poisoned
        )
        with pytest.raises(TrainingDivergedError, match="non-finite"):
            train(tiny_env, tiny_ppo, *small_specs, seed=5)

    def test_rng_streams_are_independent(self) -> None:
        env_rng, action_rng, batch_rng = rng_streams(312)
        draws = [rng.random(4).tolist() for rng in (env_rng, action_rng, batch_rng)]
        assert len({tuple(d) for d in draws}) == 3
        again = [rng.random(4).tolist() for rng in rng_streams(312)]
        assert again == draws


class TestEvaluate:
    """Test cases for deterministic policy evaluation."""

    def test_repeatable(self, small_specs, env_config: EnvConfig) -> None:
        params = init_policy_params(*small_specs)
        first = evaluate(params, env_config, n_states=10, seed=2024)
        second = evaluate(params, env_config, n_states=10, seed=2024)
        assert first == second
        assert first.n_states == 10
        assert 0.0 <= first.feasibility_rate <= 1.0

    def test_no_states(self, small_specs, env_config: EnvConfig) -> None:
        report = evaluate(init_policy_params(*small_specs), env_config, 0, seed=1)
        assert report.n_states == 0
        assert math.isnan(report.mean_reward)
        assert report.oracle_ratio is None

    def test_oracle_ratio(self, small_specs, env_config: EnvConfig) -> None:
        params = init_policy_params(*small_specs)
        states = sample_states(env_config, 4, seed=6)
        report = evaluate_states(params, env_config, states, [2000.0] * 4)
        assert report.oracle_ratio == pytest.approx(report.mean_reward / 2000.0)

    def test_oracle_utilities_must_align(
        self, small_specs, env_config: EnvConfig
    ) -> None:
        params = init_policy_params(*small_specs)
        states = sample_states(env_config, 3, seed=6)
        with pytest.raises(ValueError, match="oracle utilities"):
            evaluate_states(params, env_config, states, [1.0])
