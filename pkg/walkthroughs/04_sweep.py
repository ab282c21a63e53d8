"""
Every feature subset, three classifiers, ten folds
==================================================

The generator's class-conditional distributions make one feature worth 90%
accuracy at best; combining features pushes well past that.
"""

import time

from bdi.learn import sweep_combinations
from bdi.synthetic import bayes_optimal_accuracy, generate

for d in range(1, 6):
    print(d, "features: Bayes-optimal", round(bayes_optimal_accuracy(d), 4))

ds = generate(10_000, seed=0)
t0 = time.perf_counter()
report = sweep_combinations(ds, seed=0)
print(f"\n31 subsets x 3 models in {time.perf_counter() - t0:.1f}s\n")
print(report.summary())
