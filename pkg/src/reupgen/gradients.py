"""Analytic gradients of the training losses with respect to the angles.

Everything is built on one reverse (adjoint) sweep: after a forward pass,
the circuit is walked backwards gate by gate, undoing each unitary on the
state while transporting a costate bra, and inserting the generator of
each trainable rotation (-i Z/2 or -i Y/2) at its site to read off
d<bra|state>/d(angle).  Encoding gates carry no trainable parameters and
are just undone.  One sweep yields the derivative with respect to every
angle at the cost of a few forward passes, for any batch of noise values
with per-sample bra vectors.

The ensemble loss holds the Sinkhorn plan fixed while differentiating
<plan, cost(theta)>; this is the exact gradient of the converged entropic
objective (Danskin/envelope), so finite differences must be taken through
``transport.regularized_value`` when checking it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import transport
from .generator import (
    GeneratorConfig,
    apply_gate_columns,
    check_theta,
    encoding_gates,
    forward_columns,
    forward_states,
)
from .statevec import (
    density_eigenvalues,
    entangler_diagonal,
    entropy_from_eigenvalues,
    euler_gate,
    reduced_density_qubit0,
)

_LN2 = float(np.log(2.0))


def _block_overlaps(lam_cols: np.ndarray, psi_cols: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """s[i, j, b] = <lam_b restricted to qubit value i | psi_b at value j>.

    Contracting s with any 2x2 matrix G gives <lam_b|G on qubit|psi_b>, so
    one pass over the state pair serves every generator insertion at this
    gate site.
    """
    lam = lam_cols.reshape(2 ** (n - 1 - qubit), 2, 2**qubit, -1)
    psi = psi_cols.reshape(2 ** (n - 1 - qubit), 2, 2**qubit, -1)
    return np.einsum("hilb,hjlb->ijb", lam.conj(), psi)


def adjoint_sweep(
    config: GeneratorConfig,
    theta: np.ndarray,
    noises: np.ndarray,
    bras: np.ndarray,
    final_states: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Overlaps <bra_b|psi(theta, x_b)> and their complex angle derivatives.

    ``bras`` holds one (not necessarily normalized) vector per noise value,
    shape (batch, 2**n).  Returns (overlaps (batch,), grads
    (batch, reps, n_qubits, 3) complex).

    The backward pass walks the circuit once, undoing each combined
    encoding+trainable gate on both the state and the costate.  At each
    trainable gate U = Rz(c) Ry(b) Rz(a) the three angle derivatives are
    read off as <costate|G_k|state> with the gate-local generators

        G_a = U (-i Z / 2) U^dag,  G_b = Rz(c) (-i Y / 2) Rz(c)^dag,
        G_c = -i Z / 2,

    all contracted against one shared block-overlap tensor, so the extra
    cost per gate is a single pass over the batch.
    """
    theta = check_theta(config, theta)
    x = np.atleast_1d(np.asarray(noises, dtype=float))
    bras = np.asarray(bras, dtype=complex)
    n = config.n_qubits
    batch = x.size
    if bras.shape != (batch, 2**n):
        raise ValueError(f"bras shape {bras.shape} != {(batch, 2 ** n)}")

    if final_states is not None:
        psi = np.ascontiguousarray(np.asarray(final_states, dtype=complex).T)
    else:
        psi = forward_columns(config, theta, x)
    lam = np.ascontiguousarray(bras.T)
    overlaps = np.einsum("db,db->b", lam.conj(), psi)

    enc = encoding_gates(x)                                      # (batch, 2, 2)
    train = euler_gate(theta[..., 0], theta[..., 1], theta[..., 2])  # (reps, n, 2, 2)
    undo = (train[:, :, None, :, :] @ enc).conj().swapaxes(-1, -2)   # (reps, n, batch, 2, 2)

    half_z = np.array([[-0.5j, 0.0], [0.0, 0.5j]])
    gen_a = train @ half_z @ train.conj().swapaxes(-1, -2)       # (reps, n, 2, 2)
    rz_c = euler_gate(theta[..., 2], 0.0, 0.0)
    half_y = np.array([[0.0, -0.5], [0.5, 0.0]])
    gen_b = rz_c @ half_y @ rz_c.conj().swapaxes(-1, -2)

    diag = entangler_diagonal(n)[:, None] if config.use_entangler else None
    grads = np.empty((batch, config.reps, n, 3), dtype=complex)
    for p in reversed(range(config.reps)):
        if diag is not None:
            psi = psi * diag
            lam = lam * diag
        for q in reversed(range(n)):
            blocks = _block_overlaps(lam, psi, q, n)
            grads[:, p, q, 0] = np.einsum("ij,ijb->b", gen_a[p, q], blocks)
            grads[:, p, q, 1] = np.einsum("ij,ijb->b", gen_b[p, q], blocks)
            grads[:, p, q, 2] = -0.5j * blocks[0, 0] + 0.5j * blocks[1, 1]
            psi = apply_gate_columns(psi, undo[p, q], q, n)
            lam = apply_gate_columns(lam, undo[p, q], q, n)
    return overlaps, grads


def overlap_gradient(
    config: GeneratorConfig, theta: np.ndarray, noise: float, target: np.ndarray
) -> tuple[complex, np.ndarray]:
    """<target|psi(theta, x)> and its complex derivative per angle."""
    target = np.asarray(target, dtype=complex)
    ov, grads = adjoint_sweep(config, theta, np.array([float(noise)]), target[None, :])
    return complex(ov[0]), grads[0]


def ensemble_loss_gradient(
    config: GeneratorConfig,
    theta: np.ndarray,
    noises: np.ndarray,
    targets: np.ndarray,
    sinkhorn_config: transport.SinkhornConfig | None = None,
    *,
    return_states: bool = False,
):
    """Transport loss against a target ensemble and its fixed-plan gradient.

    Loss is <plan, cost> at the converged Sinkhorn plan for the batch of
    generated states versus ``targets`` (uniform marginals).  The gradient
    holds the plan fixed; pairs with |overlap| < 1e-12 contribute zero
    (subgradient choice at the nonsmooth point).
    """
    x = np.atleast_1d(np.asarray(noises, dtype=float))
    targets = np.asarray(targets, dtype=complex)
    if x.size == 0 or targets.size == 0:
        raise ValueError("noises and targets must be nonempty")
    cfg = sinkhorn_config or transport.SinkhornConfig()

    states = forward_states(config, theta, x)
    ov = states @ targets.conj().T          # ov[i, j] = <target_j|psi_i>
    absolute = np.abs(ov)
    cost = np.clip(1.0 - absolute, 0.0, 1.0)
    a, b = transport.uniform_marginals(cost.shape[0], cost.shape[1])
    plan = transport.sinkhorn(cost, a, b, cfg).plan
    loss = float(np.sum(plan * cost))

    safe = absolute >= 1e-12
    weights = np.where(safe, plan * ov / np.where(safe, absolute, 1.0), 0.0)
    bras = weights @ targets                # per-sample costate vectors
    _, grads = adjoint_sweep(config, theta, x, bras, final_states=states)
    grad = -np.sum(grads, axis=0).real
    if return_states:
        return loss, grad, states
    return loss, grad


def _entropy_and_costate(states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-state entanglement entropy and dS/d(conj psi) for 2-qubit states.

    The costate is m @ conj(A) with A = sum_a s'(lam_a) |u_a><u_a| built
    from closed-form 2x2 projectors; eigenvalues are clamped to
    [1e-12, 1 - 1e-12] before the log so the derivative stays finite.
    """
    rho = reduced_density_qubit0(states)
    lams = density_eigenvalues(rho)                      # (..., 2), descending
    entropy = entropy_from_eigenvalues(lams)

    clamped = np.clip(lams, 1e-12, 1.0 - 1e-12)
    sprime = -(np.log(clamped) + 1.0) / _LN2             # dS/dlam per eigenvalue
    gap = lams[..., 0] - lams[..., 1]
    eye = np.eye(2, dtype=complex)
    degenerate = gap < 1e-12
    safe_gap = np.where(degenerate, 1.0, gap)[..., None, None]
    proj_plus = (rho - lams[..., 1, None, None] * eye) / safe_gap
    amat = (
        sprime[..., 0, None, None] * proj_plus
        + sprime[..., 1, None, None] * (eye - proj_plus)
    )
    amat = np.where(
        degenerate[..., None, None],
        sprime.mean(axis=-1)[..., None, None] * eye,
        amat,
    )
    m = states.reshape(states.shape[:-1] + (2, 2))
    costate = (m @ amat.conj()).reshape(states.shape)
    return entropy, costate


def entanglement_entropies(states: np.ndarray) -> np.ndarray:
    """Entanglement entropy of qubit 0 for a batch of 2-qubit states."""
    return entropy_from_eigenvalues(density_eigenvalues(reduced_density_qubit0(states)))


def entropy_loss_gradient(
    config: GeneratorConfig,
    theta: np.ndarray,
    noises: np.ndarray,
    s_target: float,
    *,
    return_entropies: bool = False,
):
    """Mean squared entropy mismatch over the noise batch, with gradient.

    loss = mean_b (S(rho_0(x_b, theta)) - s_target)^2 for the two-qubit
    generator; the gradient chains the closed-form eigenvalue derivative
    through the adjoint sweep.
    """
    if config.n_qubits != 2:
        raise ValueError("entropy loss requires a 2-qubit generator")
    if not (0.0 <= s_target <= 1.0):
        raise ValueError(f"s_target must be in [0, 1], got {s_target}")
    x = np.atleast_1d(np.asarray(noises, dtype=float))

    states = forward_states(config, theta, x)
    entropy, costate = _entropy_and_costate(states)
    residual = entropy - s_target
    loss = float(np.mean(residual**2))

    # dLoss/dtheta = mean_b 2 r_b dS_b/dtheta, dS/dtheta = 2 Re <costate|dpsi>
    bras = (4.0 / x.size) * residual[:, None] * costate
    _, grads = adjoint_sweep(config, theta, x, bras, final_states=states)
    grad = np.sum(grads, axis=0).real
    if return_entropies:
        return loss, grad, entropy
    return loss, grad


@dataclass(frozen=True)
class FiniteDifferenceReport:
    max_rel_error: float
    failing_indices: list[tuple[int, ...]]
    passed: bool


def finite_difference_check(
    loss_fn,
    theta: np.ndarray,
    h: float = 1e-5,
    tolerance: float = 1e-4,
    abs_floor: float = 1e-6,
) -> FiniteDifferenceReport:
    """Central-difference check of an analytic gradient.

    ``loss_fn(theta) -> (value, grad)``; the analytic gradient is compared
    coordinate by coordinate against [f(t+h) - f(t-h)] / 2h with relative
    error |fd - an| / max(|fd|, |an|, abs_floor).  The floor turns the
    comparison absolute for coordinates where both sides are near zero,
    where central differences are pure cancellation noise (e.g. angles the
    loss provably does not depend on).
    """
    if not (1e-7 <= h <= 1e-2):
        raise ValueError(f"h must be in [1e-7, 1e-2], got {h}")
    theta = np.asarray(theta, dtype=float)
    _, analytic = loss_fn(theta)
    analytic = np.asarray(analytic, dtype=float)
    if analytic.shape != theta.shape:
        raise ValueError("gradient shape does not match theta")

    fd = np.empty_like(theta)
    it = np.nditer(theta, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        up = theta.copy()
        up[idx] += h
        down = theta.copy()
        down[idx] -= h
        fd[idx] = (loss_fn(up)[0] - loss_fn(down)[0]) / (2.0 * h)

    denom = np.maximum(np.maximum(np.abs(fd), np.abs(analytic)), abs_floor)
    rel = np.abs(fd - analytic) / denom
    failing = [tuple(int(i) for i in idx) for idx in np.argwhere(rel > tolerance)]
    return FiniteDifferenceReport(
        max_rel_error=float(rel.max()),
        failing_indices=failing,
        passed=not failing,
    )
