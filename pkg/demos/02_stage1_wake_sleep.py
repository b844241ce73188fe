"""Train a Helmholtz machine by wake-sleep and watch accuracy and free energy."""

import numpy as np

from helmfep import TrainConfig, enumerate_wellformed, generation_accuracy, train_stage1
from helmfep.training import eval_rng

cfg = TrainConfig(seed=0, trace_interval=10_000)
gen, rec, trace = train_stage1(cfg, enumerate_wellformed())

print(f"{'iteration':>10} {'accuracy':>9} {'free energy':>12}")
for rec_ in trace.records:
    print(f"{rec_.iteration:>10} {rec_.accuracy:>9.4f} {rec_.free_energy:>12.4f}")

acc, distinct, entropy = generation_accuracy(gen, 10_000, eval_rng(0, 9))
print(f"\nfinal: accuracy {acc:.4f}, {distinct} distinct valid dreams, entropy {entropy:.2f} nats")
# invalid dreams count towards the entropy too, so it can exceed ln 256
print(f"uniform over the valid set would have entropy {np.log(256):.2f} nats")

# weights stay small; the top layer learns a bias of its own
for m, w in enumerate(gen.weights):
    print(f"generative weights {m}: shape {w.shape}, max |w| {np.abs(w).max():.2f}")
print("top bias:", gen.top_bias.round(2))
