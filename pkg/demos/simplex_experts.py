"""AO-EG on the probability simplex (prediction with expert advice).

Each expert's loss is drawn i.i.d. in [0, 1], so no expert is much better
than another: the weights stay spread out and regret stays well inside the
entropic bound.
"""

import numpy as np

from aoftrl import AOEG, LastGradient, Simplex, run_online
from aoftrl.harness.streams import RandomLinear, generate_stream

n, T = 10, 2_000
simplex = Simplex(n)
stream = generate_stream(RandomLinear(1.0, nonnegative=True), 7, T, simplex)
rep = run_online(stream, simplex, LastGradient(), AOEG(C=1.0), T)

np.set_printoptions(precision=3, suppress=True)
print("final weights:", rep.final_iterate)
print("mean loss per expert:", stream.gradients().mean(axis=0))
print(f"regret {rep.regret:.3f}  bound {rep.bounds['aoeg']:.3f}")
