"""Shared oracles for the test suite.

The brute-force builders below construct operators directly from
second-quantized occupation-number algebra (explicit creation/annihilation
matrices on a truncated Fock space) and are deliberately independent of the
package's pair-configuration bookkeeping.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from ccqed.model import ModelKind, ModelParams, Sector


def occupation_states(n_modes: int, total: int, cap_last: int) -> list[tuple[int, ...]]:
    """All occupation tuples with given total; the last mode is capped."""
    states = []
    for occ in itertools.product(range(total + 1), repeat=n_modes):
        if sum(occ) == total and occ[-1] <= cap_last:
            states.append(occ)
    return states


def _ladder(states: list[tuple[int, ...]], index: dict, mode: int) -> np.ndarray:
    """Creation operator for one mode on the truncated occupation basis."""
    dim = len(states)
    mat = np.zeros((dim, dim))
    for j, occ in enumerate(states):
        target = list(occ)
        target[mode] += 1
        key = tuple(target)
        if key in index:
            mat[index[key], j] = math.sqrt(occ[mode] + 1)
    return mat


def brute_force_sector(params: ModelParams, sector: Sector, kind: ModelKind):
    """(states, H) from explicit operator algebra; modes are sites then emitter."""
    n_modes = params.n_sites + 1
    total = sector.value
    cap = 1 if kind is ModelKind.SPIN else min(2, total)
    lower = occupation_states(n_modes, total - 1, cap)
    upper = occupation_states(n_modes, total, cap)
    both = lower + upper
    index = {occ: i for i, occ in enumerate(both)}
    create = [_ladder(both, index, mode) for mode in range(n_modes)]
    h = np.zeros((len(both), len(both)))
    for i in range(params.n_sites - 1):
        hop = create[i] @ create[i + 1].T
        h += -params.kappa * (hop + hop.T)
    link = create[params.half_length] @ create[-1].T
    h += params.coupling * (link + link.T)
    if kind is ModelKind.HUBBARD and math.isfinite(params.hubbard_u):
        n_e = create[-1] @ create[-1].T
        h += 0.5 * params.hubbard_u * (n_e @ (np.eye(len(both)) - n_e))
    sel = [index[occ] for occ in upper]
    return upper, h[np.ix_(sel, sel)]


def occupation_of_config(config: tuple[int, ...], n_modes: int) -> tuple[int, ...]:
    occ = [0] * n_modes
    for site in config:
        occ[site] += 1
    return tuple(occ)


def brute_force_product(u: np.ndarray, v: np.ndarray, params: ModelParams):
    """(states, vector) for B_u^dag B_v^dag |vac> on the bosonic Fock space."""
    n_modes = params.n_sites + 1
    states = (
        occupation_states(n_modes, 0, 2)
        + occupation_states(n_modes, 1, 2)
        + occupation_states(n_modes, 2, 2)
    )
    index = {occ: i for i, occ in enumerate(states)}
    create = [_ladder(states, index, mode) for mode in range(n_modes)]
    b_u = sum(u[m] * create[m] for m in range(n_modes))
    b_v = sum(v[m] * create[m] for m in range(n_modes))
    vac = np.zeros(len(states), dtype=complex)
    vac[index[tuple([0] * n_modes)]] = 1.0
    vec = b_u @ (b_v @ vac)
    two = occupation_states(n_modes, 2, 2)
    sel = [index[occ] for occ in two]
    return two, vec[sel]


@pytest.fixture
def small_params() -> ModelParams:
    return ModelParams(half_length=3, kappa=1.0, coupling=1.7, hubbard_u=9.0)
