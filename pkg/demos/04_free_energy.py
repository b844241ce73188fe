"""Free energy as complexity minus accuracy, before and after training."""

import numpy as np

from helmfep import (GenerativeParams, NetworkShape, RecognitionParams, TrainConfig,
                     enumerate_wellformed, estimate_free_energy, train_stage1)
from helmfep.metrics import fe_decomposition

shape = NetworkShape()
rng = np.random.default_rng(0)
word = enumerate_wellformed()[100]

# with every parameter at zero each unit is a fair coin
gen0, rec0 = GenerativeParams.zeros(shape), RecognitionParams.zeros(shape)
print("zero parameters:", estimate_free_energy(gen0, rec0, word.sign_form, 500, rng),
      "vs 10 ln 2 =", 10 * np.log(2))

gen, rec, _ = train_stage1(TrainConfig(seed=0, stage1_iterations=20_000), enumerate_wellformed(), trace=False)

for label, bits in [("valid", word.bits), ("invalid", "0000000000"), ("invalid", "1001001001")]:
    data = np.array([1.0 if c == "1" else -1.0 for c in bits])
    fe, se = estimate_free_energy(gen, rec, data, 2000, rng)
    cx, ac = fe_decomposition(gen, rec, data, 2000, rng)
    print(f"{bits} ({label:7s}) F = {fe:6.3f} +- {se:.3f}   complexity {cx:6.3f}   accuracy term {ac:7.3f}")
