"""Initial-state builders and measured quantities.

Covers Gaussian packets, bosonic two-excitation composition, site-resolved
photon density, the residual probability P_res inside the polariton region,
the emission probability extracted from its minimum, transmission/reflection
splits, a least-squares channel decomposition over products of one-particle
eigenstates, the atom-excitation polariton witness, and the two-photon /
photon-plus-polariton energy-mismatch gap.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import analytic
from .errors import (
    EdgeClippingWarning,
    IllConditionedError,
    InvalidParamsError,
    LossyComposeWarning,
    SeparationWarning,
    WindowTooLongError,
)
from .model import Basis, ModelKind, ModelParams, Sector, enumerate_basis
from .propagate import Trajectory

EDGE_AMPLITUDE_TOL = 1e-8
LOSSY_COMPOSE_TOL = 1e-6


@dataclass(frozen=True)
class PacketSpec:
    """Gaussian photon wave packet: centre site, carrier momentum, width alpha."""

    center: int
    momentum: float
    alpha: float

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise InvalidParamsError(f"alpha must be > 0, got {self.alpha}")
        if not -math.pi < self.momentum <= math.pi:
            raise InvalidParamsError(f"momentum must lie in (-pi, pi], got {self.momentum}")

    @property
    def half_width(self) -> float:
        """Half-width at half maximum of the probability profile, in sites."""
        return 2.0 * math.sqrt(math.log(2.0)) / self.alpha

    @property
    def group_velocity_factor(self) -> float:
        """|group velocity| in units of kappa: 2*|sin(momentum)|."""
        return 2.0 * abs(math.sin(self.momentum))


@dataclass(frozen=True)
class ObservableSeries:
    name: str
    times: np.ndarray
    values: np.ndarray


def gaussian_packet(spec: PacketSpec, basis: Basis) -> np.ndarray:
    """Normalized Gaussian packet on the photon sites, emitter amplitude zero."""
    if basis.sector is not Sector.ONE_EXC:
        raise InvalidParamsError("gaussian_packet needs a ONE_EXC basis")
    n = basis.half_length
    if abs(spec.center) > n:
        raise InvalidParamsError(f"packet centre {spec.center} outside chain (N={n})")
    if abs(spec.center) < 3.0 * spec.half_width:
        warnings.warn(
            f"packet centre {spec.center} is not well separated from the doped cavity "
            f"(half-width {spec.half_width:.2f})",
            SeparationWarning,
            stacklevel=2,
        )
    ls = np.arange(-n, n + 1)
    amps = np.exp(-0.5 * spec.alpha**2 * (ls - spec.center) ** 2) * np.exp(
        1j * spec.momentum * ls
    )
    vec = np.zeros(basis.dim, dtype=complex)
    vec[: basis.n_sites] = amps
    vec /= np.linalg.norm(vec)
    edge = max(abs(vec[0]), abs(vec[basis.n_sites - 1]))
    if edge > EDGE_AMPLITUDE_TOL:
        warnings.warn(
            f"packet tail {edge:.2e} at the chain edge exceeds {EDGE_AMPLITUDE_TOL}",
            EdgeClippingWarning,
            stacklevel=2,
        )
    return vec


@lru_cache(maxsize=8)
def _pair_indices(basis: Basis) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    first = np.array([config[0] for config in basis.states])
    second = np.array([config[1] for config in basis.states])
    equal = first == second
    return first, second, equal


def compose_two_excitation(
    u: np.ndarray, v: np.ndarray, basis: Basis
) -> tuple[np.ndarray, float]:
    """Bosonic symmetrized product of two one-excitation states.

    Pair amplitudes are u_i v_j + u_j v_i (sqrt(2) u_i v_i on a doubly
    occupied site).  On a SPIN basis the doubly-excited-emitter term is
    forbidden; its weight is dropped, the state renormalized, and the
    dropped fraction returned (a LossyComposeWarning flags fractions above
    1e-6).  On a HUBBARD basis nothing is dropped.
    """
    if basis.sector is not Sector.TWO_EXC:
        raise InvalidParamsError("compose_two_excitation needs a TWO_EXC basis")
    n_amp = basis.n_sites + 1
    if len(u) < n_amp or len(v) < n_amp:
        raise InvalidParamsError("u and v must be ONE_EXC amplitude vectors")
    u = np.asarray(u, dtype=complex)[:n_amp]
    v = np.asarray(v, dtype=complex)[:n_amp]
    first, second, equal = _pair_indices(basis)
    # evaluate both operand orders and average: argument-order invariance
    # to the last bit (SIMD complex products round asymmetrically)
    term_uv = u[first] * v[second] + u[second] * v[first]
    term_vu = v[first] * u[second] + v[second] * u[first]
    amps = 0.5 * (term_uv + term_vu)
    amps[equal] /= math.sqrt(2.0)
    kept_sq = float(np.sum(np.abs(amps) ** 2))
    if basis.model_kind is ModelKind.SPIN:
        dropped_sq = float(2.0 * abs(u[-1] * v[-1]) ** 2)
    else:
        dropped_sq = 0.0
    total_sq = kept_sq + dropped_sq
    if total_sq == 0.0:
        raise InvalidParamsError("composed state has zero norm")
    drop_weight = dropped_sq / total_sq
    if drop_weight > LOSSY_COMPOSE_TOL:
        warnings.warn(
            f"composition dropped doubly-excited-emitter weight {drop_weight:.3e}",
            LossyComposeWarning,
            stacklevel=2,
        )
    return amps / math.sqrt(kept_sq), drop_weight


def photon_density(state: np.ndarray, basis: Basis) -> np.ndarray:
    """Expected occupation per chain site plus the emitter entry (last).

    Doubly occupied sites count twice, so the entries sum to the sector
    excitation number.
    """
    return basis.occupation_matrix @ np.abs(np.asarray(state)) ** 2


def density_series(trajectory: Trajectory) -> np.ndarray:
    """(n_times, n_sites+1) density array of a trajectory."""
    if "density" in trajectory.observables:
        return trajectory.observables["density"]
    if trajectory.states is None or trajectory.basis is None:
        raise InvalidParamsError("trajectory carries neither densities nor states")
    occ = trajectory.basis.occupation_matrix
    return np.stack([occ @ np.abs(s) ** 2 for s in trajectory.states])


def _region_mask(basis: Basis, l0: int) -> np.ndarray:
    n = basis.half_length
    mask = np.zeros(basis.n_sites + 1, dtype=bool)
    lo, hi = max(0, n - l0), min(basis.n_sites - 1, n + l0)
    mask[lo : hi + 1] = True
    mask[basis.n_sites] = True  # emitter counts as inside
    return mask


def p_res(trajectory: Trajectory, l0: int) -> ObservableSeries:
    """Probability inside the polariton region: emitter plus sites |l| <= l0."""
    if trajectory.basis is None:
        raise InvalidParamsError("trajectory has no basis attached")
    dens = density_series(trajectory)
    mask = _region_mask(trajectory.basis, l0)
    return ObservableSeries(
        name=f"p_res_l0_{l0}", times=trajectory.times, values=dens[:, mask].sum(axis=1)
    )


def gamma_window_end(
    half_length: int, packet: PacketSpec, l0: int, kappa: float
) -> float:
    """Latest safe end of the emission-measurement window.

    The fastest outgoing front starts at the packet's leading edge
    (centre + 3 half-widths), moves at most 2*kappa sites per unit time,
    reflects off the open end and re-enters |l| <= l0; the window must end
    before that.
    """
    distance = 2.0 * half_length + abs(packet.center) - l0 - 3.0 * packet.half_width
    return distance / (2.0 * kappa)


def edge_arrival_time(half_length: int, packet: PacketSpec, kappa: float) -> float:
    """Earliest time an outgoing front can reach an open end of the chain.

    Before this time the finite chain reproduces the infinite-chain
    collision; afterwards boundary pile-up contaminates density profiles.
    """
    distance = half_length + abs(packet.center) - 3.0 * packet.half_width
    return distance / (2.0 * kappa)


def gamma_emission(
    trajectory: Trajectory,
    l0: int,
    window: tuple[float, float],
    boundary_return_time: float | None = None,
) -> float:
    """Emission probability 1 - min P_res(t) over the observation window."""
    t0, t1 = window
    if boundary_return_time is not None and t1 > boundary_return_time + 1e-9:
        raise WindowTooLongError(
            f"window end {t1} exceeds boundary return time {boundary_return_time}"
        )
    series = p_res(trajectory, l0)
    sel = (series.times >= t0 - 1e-12) & (series.times <= t1 + 1e-12)
    if not np.any(sel):
        raise InvalidParamsError(f"no samples inside window [{t0}, {t1}]")
    return float(1.0 - np.min(series.values[sel]))


def transmission_reflection(
    trajectory: Trajectory, t_final: float, l0: int
) -> tuple[float, float, float]:
    """(T_right, R_left, P_center) photon weights at t_final.

    Weight beyond +l0, beyond -l0 and inside (emitter included); the three
    sum to the sector excitation number.
    """
    if trajectory.basis is None:
        raise InvalidParamsError("trajectory has no basis attached")
    idx = int(np.argmin(np.abs(trajectory.times - t_final)))
    if abs(trajectory.times[idx] - t_final) > 1e-9 + 1e-9 * abs(t_final):
        raise InvalidParamsError(f"t_final {t_final} not on the trajectory grid")
    dens = density_series(trajectory)[idx]
    basis = trajectory.basis
    n = basis.half_length
    inside = _region_mask(basis, l0)
    left = np.zeros_like(inside)
    left[: max(0, n - l0)] = True
    right = np.zeros_like(inside)
    right[min(basis.n_sites, n + l0 + 1) : basis.n_sites] = True
    return (
        float(dens[right].sum()),
        float(dens[left].sum()),
        float(dens[inside].sum()),
    )


@dataclass(frozen=True)
class ChannelDecomposition:
    """Least-squares expansion over products of one-particle eigenstates."""

    c1: dict
    c2: dict
    residual_weight: float
    captured_weight: float
    gram_condition: float

    @property
    def c1_weight(self) -> float:
        return float(sum(abs(c) ** 2 for c in self.c1.values()))

    @property
    def c2_weight(self) -> float:
        return float(sum(abs(c) ** 2 for c in self.c2.values()))


def _mode_family(
    params: ModelParams,
    basis_one: Basis,
    n_modes: int,
    energy_center: float | None,
):
    """Scattering modes (even and odd) on the quantized grid nearest a shell."""
    ks = analytic.quantized_odd_momenta(params.half_length)
    energies = -2.0 * params.kappa * np.cos(ks)
    if energy_center is None:
        order = np.linspace(0, len(ks) - 1, num=min(n_modes, 2 * len(ks)) // 2).astype(int)
        chosen = sorted(set(order.tolist()))
    else:
        order = np.argsort(np.abs(energies - energy_center), kind="stable")
        chosen = sorted(order[: max(1, n_modes // 2)].tolist())
    modes = []
    for i in chosen:
        k = float(ks[i])
        modes.append(((k, "even"), analytic.scattering_state(k, params, basis_one)))
        modes.append(((k, "odd"), analytic.odd_parity_state(k, basis_one)))
    return modes


def channel_decomposition(
    state: np.ndarray,
    basis: Basis,
    params: ModelParams,
    n_modes: int = 40,
    energy_center: float | None = None,
    regularization: float = 1e-10,
    cond_limit: float = 1e8,
) -> ChannelDecomposition:
    """Expand a TWO_EXC state over {bound x scattering} and {scattering x scattering}.

    The one-particle grid uses the open-chain quantized momenta closest to
    ``energy_center`` (n_modes states, both parities).  Coefficients solve
    the Gram-regularized least-squares problem; the squared norm not
    captured by the span (two-excitation polariton content among it) is
    returned as ``residual_weight``.
    """
    if basis.sector is not Sector.TWO_EXC:
        raise InvalidParamsError("channel_decomposition needs a TWO_EXC basis")
    basis_one = enumerate_basis(params, Sector.ONE_EXC, basis.model_kind)
    bound = {
        sign: analytic.bound_state(params, sign, basis_one, boundary_tol=math.inf)
        for sign in (+1, -1)
    }
    modes = _mode_family(params, basis_one, n_modes, energy_center)

    keys: list[tuple] = []
    columns: list[np.ndarray] = []
    with warnings.catch_warnings():
        # the product family intrinsically drops doubly-excited-emitter
        # weight; that is the definition of the expansion basis, not a
        # caller mistake worth flagging per column
        warnings.simplefilter("ignore", LossyComposeWarning)
        for sign in (+1, -1):
            for label, vec in modes:
                prod, _ = compose_two_excitation(bound[sign], vec, basis)
                keys.append(("c1", sign, label))
                columns.append(prod)
        for i, (label_i, vec_i) in enumerate(modes):
            for label_j, vec_j in modes[i:]:
                prod, _ = compose_two_excitation(vec_i, vec_j, basis)
                keys.append(("c2", label_i, label_j))
                columns.append(prod)
    b_mat = np.column_stack(columns)
    gram = b_mat.conj().T @ b_mat
    cond = float(np.linalg.cond(gram))
    if cond > cond_limit:
        raise IllConditionedError(f"Gram condition number {cond:.3e} exceeds {cond_limit:.1e}")
    rhs = b_mat.conj().T @ np.asarray(state, dtype=complex)
    coeff = np.linalg.solve(gram + regularization * np.eye(gram.shape[0]), rhs)
    captured = b_mat @ coeff
    residual = state - captured
    c1 = {key[1:]: coeff[i] for i, key in enumerate(keys) if key[0] == "c1"}
    c2 = {key[1:]: coeff[i] for i, key in enumerate(keys) if key[0] == "c2"}
    return ChannelDecomposition(
        c1=c1,
        c2=c2,
        residual_weight=float(np.linalg.norm(residual) ** 2),
        captured_weight=float(np.linalg.norm(captured) ** 2),
        gram_condition=cond,
    )


def polariton_witness(trajectory: Trajectory) -> ObservableSeries:
    """Atom/auxiliary-site excitation probability over time.

    Used as the polariton-formation proxy: a lasting nonzero value after
    all photons have left the centre signals a created polariton.
    """
    dens = density_series(trajectory)
    return ObservableSeries(
        name="atom_excitation", times=trajectory.times, values=dens[:, -1]
    )


def trailing_average(series: ObservableSeries, window: tuple[float, float]) -> float:
    """Mean of a series over a time window (inclusive)."""
    t0, t1 = window
    sel = (series.times >= t0 - 1e-12) & (series.times <= t1 + 1e-12)
    if not np.any(sel):
        raise InvalidParamsError(f"no samples inside window [{t0}, {t1}]")
    return float(np.mean(series.values[sel]))


def _parity_orbit_blocks(parity_matrix) -> list:
    """Sparse isometries onto the even and odd sectors of a site reflection."""
    import scipy.sparse as sp

    perm = parity_matrix.argmax(axis=0).A1 if hasattr(parity_matrix, "argmax") else None
    if perm is None:  # pragma: no cover - scipy always supports argmax here
        raise InvalidParamsError("parity operator must be a permutation matrix")
    dim = parity_matrix.shape[0]
    seen = np.zeros(dim, dtype=bool)
    even_cols, odd_cols = [], []
    inv = 1.0 / math.sqrt(2.0)
    for j in range(dim):
        if seen[j]:
            continue
        pj = int(perm[j])
        seen[j] = True
        if pj == j:
            even_cols.append(({j: 1.0}))
        else:
            seen[pj] = True
            even_cols.append({j: inv, pj: inv})
            odd_cols.append({j: inv, pj: -inv})
    blocks = []
    for cols in (even_cols, odd_cols):
        rows, col_idx, vals = [], [], []
        for c, entries in enumerate(cols):
            for r, val in entries.items():
                rows.append(r)
                col_idx.append(c)
                vals.append(val)
        blocks.append(sp.coo_matrix((vals, (rows, col_idx)), shape=(dim, len(cols))).tocsr())
    return blocks


def equilibrium_average(
    op,
    states: np.ndarray,
    weights: np.ndarray,
    parity=None,
    cluster_tol: float = 1e-9,
) -> np.ndarray:
    """Infinite-time average of a configuration-diagonal observable.

    Dephasing in the energy eigenbasis leaves the diagonal ensemble; exact
    degeneracies (clustered within ``cluster_tol`` of the spectral span)
    keep their coherences.  ``states`` may hold several initial vectors as
    columns; the diagonalization is shared.  Passing the parity operator
    halves the dense work via the even/odd blocks (the observable must be
    reflection symmetric).
    """
    weights = np.asarray(weights, dtype=float)
    states = np.asarray(states, dtype=complex)
    squeeze = states.ndim == 1
    if squeeze:
        states = states[:, None]
    if parity is not None:
        blocks = _parity_orbit_blocks(parity.matrix)
    else:
        import scipy.sparse as sp

        blocks = [sp.identity(op.dim, format="csr")]
    totals = np.zeros(states.shape[1])
    scale = max(op.spectral_bound(), 1.0)
    for s_mat in blocks:
        h_block = (s_mat.T @ (op.matrix @ s_mat)).toarray()
        d_block = s_mat.multiply(s_mat).T @ weights
        psi_block = s_mat.T @ states
        energies, vectors = np.linalg.eigh(h_block)
        coeff = vectors.conj().T @ psi_block
        diag_weight = (np.abs(vectors) ** 2).T @ d_block
        totals += (np.abs(coeff) ** 2 * diag_weight[:, None]).sum(axis=0)
        # degenerate clusters keep their coherences
        start = 0
        m = len(energies)
        while start < m:
            stop = start + 1
            while stop < m and energies[stop] - energies[stop - 1] < cluster_tol * scale:
                stop += 1
            if stop - start > 1:
                block_vecs = vectors[:, start:stop]
                block_coeff = coeff[start:stop, :]
                m_mat = block_vecs.conj().T @ (d_block[:, None] * block_vecs)
                full = np.real(np.einsum("ni,nm,mi->i", block_coeff.conj(), m_mat, block_coeff))
                plain = (np.abs(block_coeff) ** 2 * diag_weight[start:stop, None]).sum(axis=0)
                totals += full - plain
            start = stop
    return totals[0] if squeeze else totals


def energy_mismatch(k: float, k_prime: float, params: ModelParams) -> float:
    """Gap between the two-photon energy and the photon-plus-polariton band.

    Returns min over the bound-state branch of
    max(0, | -2k cos(k) - 2k cos(k') - e_branch | - 2*kappa); a positive
    value certifies that exact conversion of two photons into one photon
    plus one polariton is forbidden at these momenta.
    """
    e_two = -2.0 * params.kappa * (math.cos(k) + math.cos(k_prime))
    e_plus, e_minus = analytic.bound_energies(params)
    band = 2.0 * params.kappa
    gaps = [max(0.0, abs(e_two - e_branch) - band) for e_branch in (e_plus, e_minus)]
    return min(gaps)
