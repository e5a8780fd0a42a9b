"""Time evolution under static and piecewise-constant Hamiltonians.

The workhorse is a short-iterate Lanczos propagator with full
reorthogonalization and an adaptive sub-step controlled by the standard
residual estimate |beta_{m+1} * y_m|.  Everything is deterministic: no
randomness, fixed reduction order, so identical inputs give identical
trajectories.  A dense-diagonalization reference propagator serves as the
accuracy oracle for small systems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import (
    ConvergenceFailureError,
    DimTooLargeError,
    InvalidParamsError,
    InvalidPulseError,
    NotHermitianError,
)
from .model import Basis, PulseSpec, SparseOperator

DEFAULT_ACCURACY_TOL = 1e-9
_NORM_TOL = 1e-8
_MAX_KRYLOV = 40
_BREAKDOWN_TOL = 1e-13


@dataclass
class Trajectory:
    """Time-stamped states and/or sampled observables of one evolution."""

    times: np.ndarray
    basis: Basis | None = None
    states: list[np.ndarray] | None = None
    observables: dict[str, np.ndarray] = field(default_factory=dict)

    def state_at(self, index: int) -> np.ndarray:
        if self.states is None:
            raise ValueError("trajectory did not store states")
        return self.states[index]


def _require_normalized(vec: np.ndarray) -> None:
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > 1e-6:
        raise InvalidParamsError(f"initial state norm {norm} deviates from 1")


def _require_hermitian(op: SparseOperator) -> None:
    if not op.is_hermitian():
        raise NotHermitianError("operator is not Hermitian")


def _lanczos(matvec, v0: np.ndarray, m: int):
    """Lanczos tridiagonalization with full reorthogonalization.

    Returns (V, alphas, betas, beta_next) where V has orthonormal columns,
    T = tridiag(betas, alphas, betas) and beta_next is the next off-diagonal
    element (0.0 on invariant-subspace breakdown).
    """
    dim = v0.shape[0]
    m = min(m, dim)
    v_mat = np.empty((dim, m), dtype=complex)
    alphas = np.empty(m)
    betas = np.empty(max(m - 1, 0))
    v_mat[:, 0] = v0
    w = matvec(v0)
    alphas[0] = np.real(np.vdot(v_mat[:, 0], w))
    w = w - alphas[0] * v_mat[:, 0]
    # two reorthogonalization passes keep the basis orthonormal to rounding
    # even through semi-breakdowns (a single pass is not enough there)
    for _ in range(2):
        w = w - v_mat[:, :1] @ (v_mat[:, :1].conj().T @ w)
    beta_next = float(np.linalg.norm(w))
    for j in range(1, m):
        if beta_next < _BREAKDOWN_TOL:
            return v_mat[:, :j], alphas[:j], betas[: j - 1], 0.0
        betas[j - 1] = beta_next
        v_mat[:, j] = w / beta_next
        w = matvec(v_mat[:, j]) - beta_next * v_mat[:, j - 1]
        alphas[j] = np.real(np.vdot(v_mat[:, j], w))
        w = w - alphas[j] * v_mat[:, j]
        for _ in range(2):
            w = w - v_mat[:, : j + 1] @ (v_mat[:, : j + 1].conj().T @ w)
        beta_next = float(np.linalg.norm(w))
    return v_mat, alphas, betas, beta_next


def _krylov_phases(alphas: np.ndarray, betas: np.ndarray):
    if len(alphas) == 1:
        return np.array([alphas[0]]), np.array([[1.0]])
    return sla.eigh_tridiagonal(alphas, betas)


def expm_apply(
    op: SparseOperator,
    vec: np.ndarray,
    dt: float,
    accuracy_tol: float = DEFAULT_ACCURACY_TOL,
    max_krylov: int = _MAX_KRYLOV,
) -> np.ndarray:
    """Apply exp(-1j*H*dt) to vec with local error below accuracy_tol."""
    out = list(_propagate_collect(op, vec, [(dt, None)], accuracy_tol, max_krylov))
    return out[0][1]


def _propagate_collect(op, vec, targets, accuracy_tol, max_krylov=_MAX_KRYLOV):
    """Yield (tag, state) pairs for cumulative time offsets.

    ``targets`` is a list of (t_offset, tag) with strictly increasing
    |t_offset| of common sign; states are exp(-1j*H*t_offset) vec.
    """
    matvec = op.matrix.dot
    psi = np.array(vec, dtype=complex, copy=True)
    # the Lanczos basis starts from a unit vector; carry the caller's norm
    scale = float(np.linalg.norm(psi))
    if scale == 0.0:
        raise InvalidParamsError("cannot propagate the zero vector")
    psi /= scale
    t_cur = 0.0
    idx = 0
    total = targets[-1][0]
    if total == 0.0:
        for _t_off, tag in targets:
            yield tag, scale * psi
        return
    direction = math.copysign(1.0, total)
    guard = 0
    max_substeps = 1000 + int(200 * abs(total) * max(op.spectral_bound(), 1.0))
    while idx < len(targets):
        guard += 1
        if guard > max_substeps:
            raise ConvergenceFailureError("substep budget exhausted")
        v_mat, alphas, betas, beta_next = _lanczos(matvec, psi, max_krylov)
        w, z = _krylov_phases(alphas, betas)
        z0 = z[0, :]
        tau = total - t_cur
        if beta_next > 0.0:
            budget = accuracy_tol * max(abs(tau) / abs(total), 1e-3)
            for _ in range(80):
                y = z @ (np.exp(-1j * tau * w) * z0)
                err = beta_next * abs(y[-1])
                if err <= budget:
                    break
                tau *= 0.5
                budget = accuracy_tol * max(abs(tau) / abs(total), 1e-3)
            else:
                raise ConvergenceFailureError(
                    f"Krylov step did not reach tolerance {accuracy_tol}"
                )
        # emit all requested offsets inside the accepted substep
        while idx < len(targets) and (targets[idx][0] - t_cur) * direction <= abs(
            tau
        ) + 1e-15:
            t_rel = targets[idx][0] - t_cur
            y_out = z @ (np.exp(-1j * t_rel * w) * z0)
            yield targets[idx][1], scale * (v_mat @ y_out)
            idx += 1
        if idx >= len(targets):
            return
        y_step = z @ (np.exp(-1j * tau * w) * z0)
        psi = v_mat @ y_step
        t_cur += tau


def _sample(
    traj_times: np.ndarray,
    states_iter,
    basis: Basis | None,
    store_states: bool,
    observables,
) -> Trajectory:
    states: list[np.ndarray] | None = [] if store_states else None
    series: dict[str, list] = {name: [] for name in (observables or {})}
    for _, psi in states_iter:
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > _NORM_TOL:
            raise ConvergenceFailureError(f"norm drifted to {norm}")
        if store_states:
            states.append(psi)
        for name, fn in (observables or {}).items():
            series[name].append(fn(psi))
    return Trajectory(
        times=np.asarray(traj_times, dtype=float),
        basis=basis,
        states=states,
        observables={name: np.asarray(vals) for name, vals in series.items()},
    )


def _validate_grid(t_grid) -> np.ndarray:
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise InvalidParamsError("t_grid must be a non-empty 1-d array")
    if np.any(np.diff(grid) <= 0):
        raise InvalidParamsError("t_grid must be strictly increasing")
    if grid[0] < 0:
        raise InvalidParamsError("t_grid must start at t >= 0")
    return grid


def evolve(
    op: SparseOperator,
    psi0: np.ndarray,
    t_grid,
    accuracy_tol: float = DEFAULT_ACCURACY_TOL,
    store_states: bool = True,
    observables=None,
) -> Trajectory:
    """Evolve psi0 (state at t = 0) under a static Hamiltonian.

    Emits exp(-1j*H*t) psi0 at every grid time; ``observables`` maps names
    to functions of the state sampled along the way (useful when storing
    full states would be too large).
    """
    grid = _validate_grid(t_grid)
    _require_normalized(psi0)
    _require_hermitian(op)
    targets = [(float(t), i) for i, t in enumerate(grid)]
    states_iter = _propagate_collect(op, psi0, targets, accuracy_tol)
    return _sample(grid, states_iter, op.basis, store_states, observables)


def evolve_pulsed(
    h0: SparseOperator,
    pulse: PulseSpec,
    psi0: np.ndarray,
    t_grid,
    accuracy_tol: float = DEFAULT_ACCURACY_TOL,
    store_states: bool = True,
    observables=None,
) -> Trajectory:
    """Evolve under H0 with the rectangular emitter pulse switched in exactly.

    The integration is split at the pulse edges (onset, onset + width), so
    arbitrarily narrow pulses cost no extra steps.
    """
    grid = _validate_grid(t_grid)
    _require_normalized(psi0)
    _require_hermitian(h0)
    t_end = float(grid[-1])
    if pulse.onset + pulse.width > t_end:
        raise InvalidPulseError(
            f"pulse window [{pulse.onset}, {pulse.onset + pulse.width}] exceeds grid end {t_end}"
        )
    basis = h0.basis
    diag = np.zeros(basis.dim)
    diag[basis.index_of[(basis.e_index,)]] = pulse.amplitude
    h_pulse = SparseOperator(matrix=(h0.matrix + sp.diags(diag)).tocsr(), basis=basis)

    edges = [0.0, pulse.onset, pulse.onset + pulse.width, t_end]
    ops = [h0, h_pulse, h0]

    def emitted():
        psi = np.array(psi0, dtype=complex, copy=True)
        gi = 0
        for seg in range(3):
            a, b = edges[seg], edges[seg + 1]
            if b <= a:
                continue
            seg_targets = []
            while gi < len(grid) and grid[gi] <= b + 1e-15:
                seg_targets.append((float(grid[gi]) - a, gi))
                gi += 1
            carry_needed = gi < len(grid) or seg < 2
            if not seg_targets and not carry_needed:
                continue
            tail = b - a
            targets = list(seg_targets)
            emit_tail = False
            if carry_needed and (not targets or targets[-1][0] < tail - 1e-15):
                targets.append((tail, None))
                emit_tail = True
            if targets and targets[0][0] == 0.0:
                # grid point exactly at a segment edge: emit current state
                yield targets[0][1], psi.copy()
                targets = targets[1:]
            if not targets:
                continue
            last = None
            for tag, state in _propagate_collect(ops[seg], psi, targets, accuracy_tol):
                last = state
                if tag is not None:
                    yield tag, state
            if emit_tail or targets[-1][0] >= tail - 1e-15:
                psi = last
            else:  # pragma: no cover - defensive
                raise ConvergenceFailureError("segment did not reach its end")

    return _sample(grid, emitted(), basis, store_states, observables)


def pulsed_convergence_sweep(
    h0: SparseOperator,
    pulse: PulseSpec,
    psi0: np.ndarray,
    t_grid,
    w_conv_tol: float = 1e-6,
    max_halvings: int = 40,
    accuracy_tol: float = DEFAULT_ACCURACY_TOL,
):
    """Halve the pulse width until the final density profile stops changing.

    Mirrors the convergence procedure used for delta-like kicks: run with
    width w and w/2 and accept once the maximum site-density change at the
    final time drops below ``w_conv_tol``.  Returns (trajectory, sweep)
    where sweep is a list of (width, max_density_change) rows (the first
    row has no predecessor and reports NaN).
    """
    occ = h0.basis.occupation_matrix

    def final_density(width: float) -> tuple[Trajectory, np.ndarray]:
        p = PulseSpec(area=pulse.area, onset=pulse.onset, width=width)
        traj = evolve_pulsed(h0, p, psi0, t_grid, accuracy_tol=accuracy_tol)
        dens = occ @ np.abs(traj.states[-1]) ** 2
        return traj, dens

    width = pulse.width
    traj, dens = final_density(width)
    sweep = [(width, math.nan)]
    for _ in range(max_halvings):
        width *= 0.5
        traj_new, dens_new = final_density(width)
        change = float(np.max(np.abs(dens_new - dens)))
        sweep.append((width, change))
        traj, dens = traj_new, dens_new
        if change < w_conv_tol:
            return traj, sweep
    raise ConvergenceFailureError(
        f"pulse width sweep did not converge below {w_conv_tol} after {max_halvings} halvings"
    )


def full_diag_reference(
    op: SparseOperator,
    psi0: np.ndarray,
    t_grid,
    dense_cap: int = 4000,
    store_states: bool = True,
    observables=None,
) -> Trajectory:
    """Spectral-decomposition propagation, exact to rounding; the oracle."""
    grid = _validate_grid(t_grid)
    _require_normalized(psi0)
    _require_hermitian(op)
    if op.dim > dense_cap:
        raise DimTooLargeError(f"dimension {op.dim} exceeds dense_cap {dense_cap}")
    energies, vectors = np.linalg.eigh(op.to_dense())
    coeff = vectors.conj().T @ psi0

    def emitted():
        for i, t in enumerate(grid):
            yield i, vectors @ (np.exp(-1j * energies * t) * coeff)

    return _sample(grid, emitted(), op.basis, store_states, observables)
