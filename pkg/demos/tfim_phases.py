"""Learn transverse-field Ising ground states across a coupling range.

Training data are exact ground states of H = -sum Z Z - g sum X on an
open chain, at couplings g drawn uniformly from [1.3, 1.5].  The circuit
learns the one-parameter family from 1-D noise; quality is judged by how
well the transverse magnetization distribution of generated states
matches that of the data.

Runs at 6 sites with shortened training (~2 min); the published scale is
10 sites and 1000 epochs (tests/test_acceptance.py).
"""

from reupgen import (
    GeneratorConfig,
    NoiseSpec,
    TfimConfig,
    TrainConfig,
    distribution_distance_1d,
    generate_ensemble,
    magnetization,
    sample_noise,
    tfim_ground_states,
    train_ensemble,
)

n_sites = 6
train_set, g_values = tfim_ground_states(TfimConfig(n_sites=n_sites, count=60, seed=21))
print(f"exact diagonalization: {len(g_values)} ground states, g in [{g_values.min():.3f}, {g_values.max():.3f}]")

config = GeneratorConfig(n_qubits=n_sites, reps=12)
noise = NoiseSpec("uniform", lo=-0.01, hi=0.01)
train_config = TrainConfig(epochs=300, lr=0.05, seed=13, noise=noise)

data_mag = magnetization(train_set).details
theta, records = train_ensemble(
    config,
    train_set,
    train_config,
    aux_fn=lambda s: distribution_distance_1d(magnetization(s).details, data_mag),
)
for record in records[:: len(records) // 6]:
    print(f"  epoch {record.epoch:4d}: loss={record.loss:.4f}  mag-W1={record.aux_metric:.5f}")

generated = generate_ensemble(
    config, theta, sample_noise(NoiseSpec("uniform", lo=-0.01, hi=0.01, seed=99), 60)
)
gen_mag = magnetization(generated).details
print(f"\nmagnetization range, data: [{data_mag.min():.4f}, {data_mag.max():.4f}]")
print(f"magnetization range, generated: [{gen_mag.min():.4f}, {gen_mag.max():.4f}]")
print(f"distribution distance W1 = {distribution_distance_1d(gen_mag, data_mag):.5f}")
