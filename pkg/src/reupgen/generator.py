"""Noise-reuploading generator circuit.

One repetition applies, on every qubit, the fixed encoding gate R(x, x, x)
followed by a trainable gate R(theta[p, q]), then a CZ-chain entangler
layer (skipped entirely for single-qubit circuits).  The same noise scalar
x is re-encoded at every one of the ``reps`` repetitions, so the output
state is a deterministic, highly nonlinear function of x.

Trainable angles form a real array of shape (reps, n_qubits, 3).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .statevec import MAX_QUBITS, entangler_diagonal, euler_gate


@dataclass(frozen=True)
class GeneratorConfig:
    """Circuit shape: qubit count, repetition count, entangler layout."""

    n_qubits: int
    reps: int
    entangler: str = "cz_chain"
    use_entangler: bool = field(default=True)

    def __post_init__(self):
        if not (1 <= self.n_qubits <= MAX_QUBITS):
            raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if self.entangler != "cz_chain":
            raise ValueError(f"unknown entangler topology {self.entangler!r}")
        if self.n_qubits == 1:
            # single-qubit circuits have no entangler
            object.__setattr__(self, "use_entangler", False)

    @property
    def theta_shape(self) -> tuple[int, int, int]:
        return (self.reps, self.n_qubits, 3)


def parameter_count(config: GeneratorConfig) -> int:
    """Number of trainable angles: 3 per qubit per repetition."""
    return 3 * config.reps * config.n_qubits


def random_theta(config: GeneratorConfig, rng: np.random.Generator) -> np.ndarray:
    """Initial angles, uniform on [-pi, pi)."""
    return rng.uniform(-np.pi, np.pi, size=config.theta_shape)


def check_theta(config: GeneratorConfig, theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != config.theta_shape:
        raise ValueError(f"theta shape {theta.shape} != expected {config.theta_shape}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta contains non-finite entries")
    return theta


def encoding_gates(noises: np.ndarray) -> np.ndarray:
    """R(x, x, x) for each noise value; shape (batch, 2, 2).

    All three Euler angles of the encoding gate are set to the same x.
    """
    x = np.asarray(noises, dtype=float)
    return euler_gate(x, x, x)


def apply_gate_columns(cols: np.ndarray, gate: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Apply a 2x2 gate on ``qubit`` to states stored as columns.

    ``cols`` has shape (2**n, batch): one state per column, so the
    batch axis is the fast axis and every slice below stays contiguous
    regardless of the qubit index.  ``gate`` is (2, 2) or (batch, 2, 2).
    """
    shape = cols.shape
    view = cols.reshape(2 ** (n - 1 - qubit), 2, 2**qubit, -1)
    if gate.ndim > 2:
        # one matrix per state: entries broadcast along the column axis
        m00, m01, m10, m11 = gate[:, 0, 0], gate[:, 0, 1], gate[:, 1, 0], gate[:, 1, 1]
    else:
        m00, m01, m10, m11 = gate[0, 0], gate[0, 1], gate[1, 0], gate[1, 1]
    v0 = view[:, 0]
    v1 = view[:, 1]
    out = np.empty_like(view)
    np.multiply(m00, v0, out=out[:, 0])
    out[:, 0] += m01 * v1
    np.multiply(m10, v0, out=out[:, 1])
    out[:, 1] += m11 * v1
    return out.reshape(shape)


def forward_columns(config: GeneratorConfig, theta: np.ndarray, noises: np.ndarray) -> np.ndarray:
    """Generated states as columns; shape (2**n, batch).

    The per-repetition, per-qubit gate is the 2x2 product
    R(theta[p, q]) @ R(x, x, x), applied qubit by qubit, then the
    entangler layer closes the repetition.
    """
    theta = check_theta(config, theta)
    x = np.atleast_1d(np.asarray(noises, dtype=float))
    if x.ndim != 1 or x.size == 0:
        raise ValueError("noises must be a nonempty 1-D array")
    if not np.all(np.isfinite(x)):
        raise ValueError("noise values must be finite")
    n = config.n_qubits

    enc = encoding_gates(x)                      # (batch, 2, 2)
    train = euler_gate(theta[..., 0], theta[..., 1], theta[..., 2])  # (reps, n, 2, 2)
    diag = entangler_diagonal(n)[:, None] if config.use_entangler else None

    cols = np.zeros((2**n, x.size), dtype=complex)
    cols[0, :] = 1.0
    for p in range(config.reps):
        for q in range(n):
            cols = apply_gate_columns(cols, train[p, q] @ enc, q, n)
        if diag is not None:
            cols = cols * diag
    return cols


def forward_states(config: GeneratorConfig, theta: np.ndarray, noises: np.ndarray) -> np.ndarray:
    """Generated states for a batch of noise values; shape (batch, 2**n)."""
    return np.ascontiguousarray(forward_columns(config, theta, noises).T)


def generate_state(config: GeneratorConfig, theta: np.ndarray, noise: float) -> np.ndarray:
    """Generated state for a single noise value; shape (2**n,)."""
    return forward_states(config, theta, np.array([float(noise)]))[0]


def generate_ensemble(config: GeneratorConfig, theta: np.ndarray, noises) -> np.ndarray:
    """Generated ensemble, one row per noise value, order preserved."""
    noises = np.asarray(noises, dtype=float)
    if noises.size == 0:
        raise ValueError("noise list must be nonempty")
    return forward_states(config, theta, noises)
