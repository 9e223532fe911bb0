from .base import Algorithm, Decision, RewardPolicy, RoutingAgent  # noqa
from .bandits import BanditState, EpsilonGreedyAgent, UcbAgent, bandit_update, egreedy_select, ucb_select  # noqa
from .baselines import BaselineAgent, baseline_select  # noqa
from .checkpoints import dump_checkpoint, load_checkpoint  # noqa
from .qlearning import CongestionScope, QLearningAgent, QLearnState, qlearn_select, qlearn_update  # noqa
from .schedules import EpsilonSchedule, epsilon_at  # noqa
