from .classic import (
    DEFAULT_ETA,
    ENVIRONMENTS,
    Acrobot,
    CartPole,
    ClassicEnv,
    MountainCar,
    PendulumDiscrete,
    StepResult,
    make_env,
)
from .finite import (
    FiniteMDP,
    OracleValues,
    chain_mdp,
    discounted_return,
    regret,
    returns_to_go,
    tail_length,
    value_iteration,
)
