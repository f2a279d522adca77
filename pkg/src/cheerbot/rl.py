"""Reinforcement learning over the next-emotion policy.

Episodes alternate listener action and simulated-speaker reaction for a
fixed number of turns; the only reward is the change in speaker valence
between the opening utterance and the final reaction.  Two trainers share
that environment: REINFORCE with a running-mean baseline on the predictor
head, and DQN with a separate Q head over the predictor's frozen features.
Everything downstream of the config seed is deterministic.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import nn
from .catalog import EmotionLabel
from .corpus import DialogueContext, UtteranceRecord
from .detector import DetectorModel, detect
from .nn import DenseNet, Tensor, params_hash
from .predictor import PredictorModel
from .retrieval import BiEncoder, retrieve
from .speaker_sim import RetrievalSpeaker, SpeakerTurn, SyntheticOracle

ALGORITHMS = ("pg", "dqn")


class EpisodeError(RuntimeError):
    pass


@dataclass(frozen=True)
class RlConfig:
    algorithm: str
    seed: int
    n_turns: int = 3
    n_episodes: int = 300
    gamma: float = 0.99
    lr: float = 5e-5
    online_train_freq: int = 4
    target_sync_freq: int = 3000
    buffer_capacity: int = 5000
    batch_size: int = 32
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_frac: float = 0.3
    clip: float = 1.0
    q_hidden: int = 64
    reward_window: int = 20

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if not isinstance(self.seed, int):
            raise ValueError("seed is mandatory and must be an integer")
        if self.n_turns < 1 or self.n_episodes < 1:
            raise ValueError("n_turns and n_episodes must be >= 1")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must be in (0, 1]")
        if self.online_train_freq < 1 or self.target_sync_freq < 1:
            raise ValueError("update frequencies must be >= 1")
        if self.buffer_capacity < 1 or self.batch_size < 1:
            raise ValueError("buffer capacity and batch size must be >= 1")
        if self.batch_size > self.buffer_capacity:
            raise ValueError("batch size cannot exceed buffer capacity")
        if not 0.0 <= self.eps_end <= self.eps_start <= 1.0:
            raise ValueError("epsilon schedule must satisfy 0 <= end <= start <= 1")
        if not 0.0 < self.eps_frac <= 1.0:
            raise ValueError("eps_frac must be in (0, 1]")
        if self.lr <= 0 or self.clip <= 0:
            raise ValueError("lr and clip must be positive")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RlConfig":
        return cls(**json.loads(text))


@dataclass(frozen=True)
class EpisodeTurn:
    speaker_text: str
    e_now: EmotionLabel
    features: np.ndarray
    action: EmotionLabel
    reply_text: str


@dataclass
class Episode:
    n_turns: int
    turns: list[EpisodeTurn]
    valence_trace: list[float]


def empathy_valence(episode: Episode) -> float:
    """Final-minus-first valence; intermediate trace points never enter."""
    if len(episode.valence_trace) != episode.n_turns + 1:
        raise EpisodeError(
            f"incomplete valence trace: {len(episode.valence_trace)} points "
            f"for {episode.n_turns} turns"
        )
    return float(episode.valence_trace[-1] - episode.valence_trace[0])


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray | None
    done: bool


class ReplayBuffer:
    """Fixed-capacity ring; the oldest transition is evicted first."""

    def __init__(self, capacity: int = 5000):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._items: list[Transition] = []
        self._pos = 0

    def push(self, tr: Transition) -> None:
        if len(self._items) < self.capacity:
            self._items.append(tr)
        else:
            self._items[self._pos] = tr
        self._pos = (self._pos + 1) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        if batch_size > len(self._items):
            raise ValueError("not enough transitions to sample")
        idx = rng.choice(len(self._items), size=batch_size, replace=False)
        return [self._items[i] for i in idx]

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self):
        return iter(self._items)


# ---------------------------------------------------------------------------
# environments: a uniform open/step view over the two speaker backends


class OracleEnv:
    """Synthetic-oracle episodes: valence and current emotion come straight
    from the oracle state, no detector in the loop."""

    def __init__(self, oracle: SyntheticOracle):
        self.oracle = oracle

    @property
    def catalog(self):
        return self.oracle.catalog

    def open(self) -> SpeakerTurn:
        return self.oracle.reset()

    def step(self, action: EmotionLabel, reply_text: str) -> SpeakerTurn:
        return self.oracle.react(action)


class CorpusEnv:
    """Retrieval-speaker episodes: reactions are real speaker utterances,
    valence and current emotion come from the detector."""

    def __init__(self, speaker: RetrievalSpeaker, detector: DetectorModel, situation: str):
        self.speaker = speaker
        self.detector = detector
        self.situation = situation
        self._history: list[str] = []

    def _annotate(self, turn: SpeakerTurn) -> SpeakerTurn:
        out = detect(self.detector, turn.text)
        return SpeakerTurn(text=turn.text, emotion=out.dominant, valence=out.va.valence)

    def open(self) -> SpeakerTurn:
        self._history = []
        turn = self._annotate(self.speaker.open(self.situation))
        self._history.append(turn.text)
        return turn

    def step(self, action: EmotionLabel, reply_text: str) -> SpeakerTurn:
        self._history.append(reply_text)
        query = " ".join([self.situation, *self._history[-4:]])
        # k>1 so the speaker can skip lines it already said; a top-1 match
        # is usually its own previous utterance, which would freeze the trace
        result = retrieve(self.speaker.encoder, self.speaker.pool, query, e_next=None, k=8)
        seen = set(self._history)
        pick = result.indices[0]
        for idx in result.indices:
            if self.speaker.pool.entries[idx].text not in seen:
                pick = idx
                break
        raw = SpeakerTurn(text=self.speaker.pool.entries[pick].text)
        turn = self._annotate(raw)
        self._history.append(turn.text)
        return turn


# ---------------------------------------------------------------------------
# responders


class TemplateResponder:
    """Fixed-shape reply carrying the chosen emotion; enough for oracle
    rollouts where only the emotion matters."""

    def respond(self, action: EmotionLabel, context_text: str) -> str:
        return f"i hear you . ({action.name})"


class RetrievalResponder:
    def __init__(self, encoder: BiEncoder, pool, k: int = 1):
        self.encoder = encoder
        self.pool = pool
        self.k = k

    def respond(self, action: EmotionLabel, context_text: str) -> str:
        result = retrieve(self.encoder, self.pool, context_text, e_next=action, k=self.k)
        return self.pool.entries[result.indices[0]].text


# ---------------------------------------------------------------------------
# policies


class SoftmaxPolicy:
    def __init__(self, predictor: PredictorModel):
        self.predictor = predictor

    def action_probs(self, feats: np.ndarray) -> np.ndarray:
        probs = self.predictor.probs_from_features(feats)
        return probs / probs.sum()

    def select(self, feats: np.ndarray, rng: np.random.Generator) -> int:
        probs = self.action_probs(feats)
        return int(rng.choice(len(probs), p=probs))


class ArgmaxPolicy:
    def __init__(self, predictor: PredictorModel):
        self.predictor = predictor

    def select(self, feats: np.ndarray, rng: np.random.Generator) -> int:
        return int(np.argmax(self.predictor.probs_from_features(feats)))


class UniformPolicy:
    def __init__(self, n_actions: int):
        self.n_actions = n_actions

    def select(self, feats: np.ndarray, rng: np.random.Generator) -> int:
        return int(rng.integers(self.n_actions))


class QNetwork:
    """Q values over the predictor's frozen feature vector."""

    def __init__(
        self,
        feature_dim: int,
        n_actions: int,
        hidden: int = 64,
        rng: np.random.Generator | None = None,
    ):
        self.feature_dim = feature_dim
        self.n_actions = n_actions
        self.hidden = hidden
        self.net = DenseNet([feature_dim, hidden, n_actions], ["relu", "identity"], rng=rng)

    def forward(self, feats: Tensor) -> Tensor:
        return self.net.forward(feats)

    def q_values(self, feats: np.ndarray) -> np.ndarray:
        feats = np.atleast_2d(np.asarray(feats, dtype=np.float64))
        return self.net.forward(Tensor(feats)).data.copy()

    def parameters(self) -> list[Tensor]:
        return self.net.parameters()

    def clone(self) -> "QNetwork":
        other = QNetwork(self.feature_dim, self.n_actions, self.hidden, rng=None)
        other.load_from(self)
        return other

    def load_from(self, other: "QNetwork") -> None:
        for mine, theirs in zip(self.parameters(), other.parameters()):
            mine.data = theirs.data.copy()


class EpsilonGreedyQPolicy:
    def __init__(self, qnet: QNetwork, epsilon: float = 0.0):
        self.qnet = qnet
        self.epsilon = epsilon

    def select(self, feats: np.ndarray, rng: np.random.Generator) -> int:
        if self.epsilon > 0.0 and rng.random() < self.epsilon:
            return int(rng.integers(self.qnet.n_actions))
        return int(np.argmax(self.qnet.q_values(feats)[0]))


def greedy_q_policy(qnet: QNetwork) -> EpsilonGreedyQPolicy:
    return EpsilonGreedyQPolicy(qnet, epsilon=0.0)


# ---------------------------------------------------------------------------
# rollout


def run_episode(
    policy, predictor: PredictorModel, responder, env, n_turns: int, rng: np.random.Generator
) -> Episode:
    opening = env.open()
    if opening.valence is None or opening.emotion is None:
        raise EpisodeError("turn 0: environment opening lacks valence or emotion")
    trace = [float(opening.valence)]
    turns: list[EpisodeTurn] = []
    text, e_now = opening.text, opening.emotion
    for t in range(n_turns):
        try:
            feats = predictor.features(text, e_now)
            action = predictor.catalog.by_id(policy.select(feats, rng))
            reply = responder.respond(action, text)
            reaction = env.step(action, reply)
            if reaction.valence is None or reaction.emotion is None:
                raise EpisodeError("environment reaction lacks valence or emotion")
        except EpisodeError:
            raise
        except Exception as exc:
            raise EpisodeError(f"turn {t}: {exc}") from exc
        turns.append(
            EpisodeTurn(
                speaker_text=text, e_now=e_now, features=feats, action=action, reply_text=reply
            )
        )
        trace.append(float(reaction.valence))
        text, e_now = reaction.text, reaction.emotion
    return Episode(n_turns=n_turns, turns=turns, valence_trace=trace)


# ---------------------------------------------------------------------------
# policy-gradient trainer


class RunningMean:
    def __init__(self):
        self.count = 0
        self.value = 0.0

    def update(self, x: float) -> None:
        self.count += 1
        self.value += (x - self.value) / self.count


def pg_surrogate(
    predictor: PredictorModel, episodes: list[Episode], advantages: list[float], gamma: float
) -> Tensor:
    """REINFORCE surrogate -1/B * sum over episodes and turns of
    gamma^(T-1-t) * advantage * log pi(a_t | s_t)."""
    feats, actions, coeffs = [], [], []
    for ep, adv in zip(episodes, advantages):
        horizon = ep.n_turns
        for t, turn in enumerate(ep.turns):
            feats.append(turn.features)
            actions.append(turn.action.id)
            coeffs.append((gamma ** (horizon - 1 - t)) * adv)
    probs = predictor.head_forward(Tensor(np.stack(feats)), training=False)
    picked = nn.gather_cols(probs, np.asarray(actions, dtype=np.intp))
    logp = nn.log(nn.clamp_min(picked, nn.PROB_FLOOR))
    weighted = nn.mul(logp, np.asarray(coeffs, dtype=np.float64))
    return nn.mul(nn.sum_(weighted), -1.0 / len(episodes))


def pg_update(
    predictor: PredictorModel,
    episodes: list[Episode],
    config: RlConfig,
    optimizer: nn.Optimizer,
    baseline: RunningMean,
) -> float:
    """One clipped step on the predictor head only; the baseline is the
    running mean of episode rewards seen before each episode."""
    advantages = []
    for ep in episodes:
        reward = empathy_valence(ep)
        advantages.append(reward - baseline.value)
        baseline.update(reward)
    loss = pg_surrogate(predictor, episodes, advantages, config.gamma)
    nn.backward(loss)
    optimizer.step()
    return float(loss.item())


# ---------------------------------------------------------------------------
# DQN trainer


def dqn_step(
    qnet: QNetwork,
    target_net: QNetwork,
    buffer: ReplayBuffer,
    config: RlConfig,
    step_count: int,
    optimizer: nn.Optimizer,
    rng: np.random.Generator,
) -> float | None:
    """Called once per environment step.  Every online_train_freq-th step
    (buffer permitting) one smooth-L1 batch update runs; every
    target_sync_freq-th step the target net snapshots the online net."""
    loss_val = None
    if step_count % config.online_train_freq == 0 and len(buffer) >= config.batch_size:
        batch = buffer.sample(config.batch_size, rng)
        states = np.stack([tr.state for tr in batch])
        actions = np.asarray([tr.action for tr in batch], dtype=np.intp)
        rewards = np.asarray([tr.reward for tr in batch], dtype=np.float64)
        not_done = np.asarray([0.0 if tr.done else 1.0 for tr in batch])
        next_states = np.stack(
            [
                tr.next_state if tr.next_state is not None else np.zeros(qnet.feature_dim)
                for tr in batch
            ]
        )
        q_next = target_net.q_values(next_states).max(axis=1)
        targets = rewards + config.gamma * q_next * not_done
        picked = nn.gather_cols(qnet.forward(Tensor(states)), actions)
        loss = nn.smooth_l1_loss(picked, targets)
        nn.backward(loss)
        optimizer.step()
        loss_val = float(loss.item())
    if step_count % config.target_sync_freq == 0:
        target_net.load_from(qnet)
    return loss_val


def epsilon_at(step: int, total_steps: int, config: RlConfig) -> float:
    """Linear decay from eps_start to eps_end over the first eps_frac of
    the step budget, flat afterwards."""
    ramp = max(1, int(round(config.eps_frac * total_steps)))
    frac = min(step, ramp) / ramp
    return config.eps_start + (config.eps_end - config.eps_start) * frac


# ---------------------------------------------------------------------------
# top-level training


@dataclass
class RlResult:
    config: RlConfig
    episode_rewards: list[float]
    curve: list[tuple[int, float]]
    qnet: QNetwork | None = None

    def curve_rows(self) -> list[str]:
        return [f"{step},{value!r}" for step, value in self.curve]


def save_curve(result: RlResult, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("step,mean_reward_window\n")
        for row in result.curve_rows():
            fh.write(row + "\n")


def _curve_point(rewards: list[float], window: int, env_step: int) -> tuple[int, float]:
    tail = rewards[-window:]
    return env_step, float(np.mean(tail))


def _frozen_hashes(predictor: PredictorModel, extra_params: list[list[Tensor]]) -> list[str]:
    frozen = [predictor.embedding, *predictor.encoder.parameters()]
    hashes = [params_hash(frozen)]
    for params in extra_params:
        hashes.append(params_hash(params))
    return hashes


def train_rl(
    config: RlConfig,
    predictor: PredictorModel,
    responder,
    env,
    frozen_components: list[list[Tensor]] | None = None,
) -> RlResult:
    """Train the next-emotion policy against `env`.

    PG updates the predictor head in place; DQN leaves the predictor
    untouched and returns its Q net in the result.  Components listed in
    `frozen_components` (plus the predictor's encoder) are hash-checked to
    be unchanged by training.
    """
    frozen_components = frozen_components or []
    before = _frozen_hashes(predictor, frozen_components)
    rng = np.random.default_rng(config.seed)
    rewards: list[float] = []
    curve: list[tuple[int, float]] = []

    if config.algorithm == "pg":
        policy = SoftmaxPolicy(predictor)
        optimizer = nn.Optimizer(
            predictor.head_parameters(),
            nn.OptimConfig(algorithm="adam", learning_rate=config.lr, clip_bound=config.clip),
        )
        baseline = RunningMean()
        for ep_idx in range(config.n_episodes):
            episode = run_episode(policy, predictor, responder, env, config.n_turns, rng)
            rewards.append(empathy_valence(episode))
            pg_update(predictor, [episode], config, optimizer, baseline)
            curve.append(
                _curve_point(rewards, config.reward_window, (ep_idx + 1) * config.n_turns)
            )
        result = RlResult(config=config, episode_rewards=rewards, curve=curve)
    else:
        n_actions = len(predictor.catalog)
        qnet = QNetwork(predictor.feature_dim, n_actions, config.q_hidden, rng=rng)
        target_net = qnet.clone()
        buffer = ReplayBuffer(config.buffer_capacity)
        optimizer = nn.Optimizer(
            qnet.parameters(),
            nn.OptimConfig(algorithm="adam", learning_rate=config.lr, clip_bound=config.clip),
        )
        policy = EpsilonGreedyQPolicy(qnet, epsilon=config.eps_start)
        total_steps = config.n_episodes * config.n_turns
        step = 0
        for ep_idx in range(config.n_episodes):
            opening = env.open()
            if opening.valence is None or opening.emotion is None:
                raise EpisodeError("turn 0: environment opening lacks valence or emotion")
            trace = [float(opening.valence)]
            text, e_now = opening.text, opening.emotion
            feats = predictor.features(text, e_now)
            for t in range(config.n_turns):
                policy.epsilon = epsilon_at(step, total_steps, config)
                action = predictor.catalog.by_id(policy.select(feats, rng))
                reply = responder.respond(action, text)
                reaction = env.step(action, reply)
                trace.append(float(reaction.valence))
                done = t == config.n_turns - 1
                if done:
                    reward = trace[-1] - trace[0]
                    next_feats = None
                else:
                    reward = 0.0
                    next_feats = predictor.features(reaction.text, reaction.emotion)
                buffer.push(Transition(feats, action.id, reward, next_feats, done))
                step += 1
                dqn_step(qnet, target_net, buffer, config, step, optimizer, rng)
                if not done:
                    text, e_now, feats = reaction.text, reaction.emotion, next_feats
            rewards.append(trace[-1] - trace[0])
            curve.append(_curve_point(rewards, config.reward_window, step))
        result = RlResult(config=config, episode_rewards=rewards, curve=curve, qnet=qnet)

    after = _frozen_hashes(predictor, frozen_components)
    if before != after:
        raise RuntimeError("training touched parameters that must stay frozen")
    return result


@dataclass
class EvalStats:
    rewards: list[float]
    actions: list[list[int]]

    def mean_reward(self) -> float:
        return float(np.mean(self.rewards))

    def action_histogram(self, n_actions: int) -> np.ndarray:
        counts = np.zeros(n_actions, dtype=np.int64)
        for ep in self.actions:
            for a in ep:
                counts[a] += 1
        return counts


def evaluate_policy(
    policy,
    predictor: PredictorModel,
    responder,
    env,
    n_turns: int,
    episodes: int,
    rng: np.random.Generator,
) -> EvalStats:
    rewards, actions = [], []
    for _ in range(episodes):
        ep = run_episode(policy, predictor, responder, env, n_turns, rng)
        rewards.append(empathy_valence(ep))
        actions.append([t.action.id for t in ep.turns])
    return EvalStats(rewards=rewards, actions=actions)
