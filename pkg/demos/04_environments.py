"""Synthetic bandit instances, rewards, and regret bookkeeping."""

import numpy as np

from tensorbandits import (
    LinkFamily,
    RegretTrace,
    TransformSpec,
    generate_synthetic_instance,
    instance_from_reward_tensor,
    oracle_arm,
    play,
    regret_update,
    reward_rng,
    t_product,
)

spec = TransformSpec.dct(3)
inst = generate_synthetic_instance(10, 10, 3, 1, 100, LinkFamily("logistic"), spec, seed=3)
best, value = oracle_arm(inst)
print(f"{inst.n_arms} arms, best arm {best} with mean reward {value:.4f}, omega_min {inst.omega_min:.3f}")

# rewards are keyed on (seed, round, arm), so any two policies see the same draw
trace = RegretTrace("demo", seed=0)
for t, arm in enumerate([5, 17, best, best], start=1):
    obs = play(inst, arm, reward_rng(0, t, arm), round_=t)
    regret_update(trace, inst, arm)
    print(f"round {t}: arm {arm:3d}, reward {obs.reward:.0f}, cumulative regret {trace.cumulative[-1]:.4f}")

# an environment built from a user-supplied reward tensor; each transform
# slice needs at least d1 = d2 = 3 nonzero singular values
rng = np.random.default_rng(0)
M = t_product(rng.standard_normal((6, 3, 3)), rng.standard_normal((3, 5, 3)), spec)
env = instance_from_reward_tensor(M, d1=3, d2=3, spec=spec, seed=1)
print(f"reward-tensor environment: {env.n_arms} arms of shape {env.dims}")
