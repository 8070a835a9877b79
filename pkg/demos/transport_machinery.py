"""Tour of the loss machinery: SWAP tests, cost matrices, Sinkhorn plans.

Everything the trainer consumes, shown on small ensembles: exact and
shot-sampled overlap estimation, the infidelity cost matrix, the
log-domain Sinkhorn coupling, and the exact assignment oracle it is
tested against.
"""

import numpy as np

from reupgen import (
    SinkhornConfig,
    cost_matrix,
    exact_assignment,
    ring_y_ensemble,
    sinkhorn,
    swap_test_estimate,
    transport_value,
    zero_state,
)
from reupgen.transport import uniform_marginals

rng = np.random.default_rng(0)

# SWAP test: ancilla statistics estimate |<a|b>| without post-selecting
plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
for shots in (100, 10_000, 1_000_000):
    estimate = swap_test_estimate(zero_state(1), plus, shots=shots, rng=rng)
    print(f"|<0|+>| from {shots:>9,} shots: {estimate:.5f}   (exact {1 / np.sqrt(2):.5f})")

# cost matrix between two small ring draws, exact vs shot-sampled
a = ring_y_ensemble(5, seed=1)
b = ring_y_ensemble(5, seed=2)
exact_cost = cost_matrix(a, b)
sampled_cost = cost_matrix(a, b, shots=100_000, rng=rng)
print("\nexact cost matrix (1 - |overlap|):")
print(np.round(exact_cost, 4))
print(f"max |exact - sampled| at 1e5 shots: {np.abs(exact_cost - sampled_cost).max():.4f}")

# entropic coupling vs the exact assignment optimum
config = SinkhornConfig(epsilon=0.005, max_iterations=20_000)
plan = sinkhorn(exact_cost, *uniform_marginals(5, 5), config)
sigma, exact_value = exact_assignment(exact_cost)
print(f"\nSinkhorn plan (eps={config.epsilon}, converged={plan.converged}):")
print(np.round(plan.plan, 3))
print(f"<P, C> = {transport_value(exact_cost, plan):.5f}")
print(f"exact assignment {[int(s) for s in sigma]} gives {exact_value:.5f}")
