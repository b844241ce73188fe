"""Fine-tune a stage-I model by filtered dreaming and salience-weighted inputs."""

import numpy as np

from helmfep import Stage2Config, TrainConfig, enumerate_wellformed, train_stage1, train_stage2
from helmfep.metrics import kl_from_uniform

words = enumerate_wellformed()
gen, rec, _ = train_stage1(TrainConfig(seed=0), words, trace=False)

cfg = Stage2Config(seed=0)
gen2, rec2, dist, trace = train_stage2(gen, rec, words, cfg, np.random.default_rng(1000))

for r in trace.rounds[::20] + [trace.rounds[-1]]:
    print(f"round {r.round:3d}: accuracy {r.accuracy:.4f}, accepted {r.accepted}/{cfg.sleep_attempts_per_round}, "
          f"KL {r.kl_from_uniform:.4f}")

# the salience now leans towards what the model likes to dream
order = np.argsort(dist.weights)[::-1]
print("\nmost salient patterns:")
for i in order[:8]:
    print(dist.patterns[i].bits, dist.weights[i], f"{dist.weights[i] / dist.total:.4f}")
print("least salient:", [dist.patterns[i].bits for i in order[-3:]])
print(f"total count {dist.total} = 256 + accepted dreams {sum(r.accepted for r in trace.rounds)}")
print(f"KL(salience || uniform) = {kl_from_uniform(dist):.4f} nats")
