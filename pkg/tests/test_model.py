import math

import numpy as np
import pytest

from ccqed.errors import BasisMismatchError, InvalidPulseError
from ccqed.model import (
    INFINITE,
    ModelKind,
    ModelParams,
    PulseSpec,
    Sector,
    build_hubbard_hamiltonian,
    build_kicked_hamiltonian,
    build_spin_hamiltonian,
    commutator_norm,
    enumerate_basis,
    parity_operator,
    total_excitation_operator,
)

from conftest import brute_force_sector, occupation_of_config


def test_basis_dimensions_n1():
    params = ModelParams(half_length=1)
    assert enumerate_basis(params, Sector.ONE_EXC, ModelKind.SPIN).dim == 4
    assert enumerate_basis(params, Sector.TWO_EXC, ModelKind.SPIN).dim == 9
    assert enumerate_basis(params, Sector.TWO_EXC, ModelKind.HUBBARD).dim == 10


@pytest.mark.parametrize("n", [1, 2, 5, 11])
@pytest.mark.parametrize("kind", [ModelKind.SPIN, ModelKind.HUBBARD])
def test_basis_dimension_formulas(n, kind):
    params = ModelParams(half_length=n)
    m = 2 * n + 1
    one = enumerate_basis(params, Sector.ONE_EXC, kind)
    assert one.dim == m + 1
    two = enumerate_basis(params, Sector.TWO_EXC, kind)
    expected = m * (m + 1) // 2 + m
    if kind is ModelKind.HUBBARD:
        expected = (m + 1) * (m + 2) // 2
    assert two.dim == expected


def test_basis_roundtrip_and_order(small_params):
    basis = enumerate_basis(small_params, Sector.TWO_EXC, ModelKind.HUBBARD)
    for i, config in enumerate(basis.states):
        assert basis.index_of[config] == i
    # photon pairs first (lexicographic), emitter-excited last
    m = basis.n_sites
    pure = [s for s in basis.states if basis.e_index not in s]
    assert pure == sorted(pure)
    assert len(pure) == m * (m + 1) // 2
    assert basis.states[-1] == (basis.e_index, basis.e_index)


def test_spin_matrix_element_examples():
    params = ModelParams(half_length=1, coupling=1.7)
    one = enumerate_basis(params, Sector.ONE_EXC, ModelKind.SPIN)
    h1 = build_spin_hamiltonian(params, one)
    # |photon at 0, g> <-> |e> element is the bare coupling
    assert h1.matrix[one.site_of(0), one.index_of[(one.e_index,)]] == pytest.approx(1.7)
    # lam=0 open 3-site chain spectrum plus the decoupled emitter level
    free = ModelParams(half_length=1, coupling=0.0)
    h0 = build_spin_hamiltonian(free, enumerate_basis(free, Sector.ONE_EXC, ModelKind.SPIN))
    spectrum = np.linalg.eigvalsh(h0.to_dense())
    assert spectrum == pytest.approx(
        [-math.sqrt(2), 0.0, 0.0, math.sqrt(2)], abs=1e-12
    )
    two = enumerate_basis(params, Sector.TWO_EXC, ModelKind.SPIN)
    h2 = build_spin_hamiltonian(params, two)
    row = two.index_of[(1, 1)]  # both photons on the centre site
    col = two.index_of[(1, two.e_index)]
    assert h2.matrix[row, col] == pytest.approx(math.sqrt(2) * 1.7)


@pytest.mark.parametrize("sector", [Sector.ONE_EXC, Sector.TWO_EXC])
@pytest.mark.parametrize("kind", [ModelKind.SPIN, ModelKind.HUBBARD])
def test_hamiltonians_match_bruteforce_operator_algebra(small_params, sector, kind):
    basis = enumerate_basis(small_params, sector, kind)
    if kind is ModelKind.SPIN:
        op = build_spin_hamiltonian(small_params, basis)
    else:
        op = build_hubbard_hamiltonian(small_params, basis)
    occ_states, h_ref = brute_force_sector(small_params, sector, kind)
    ref_index = {occ: i for i, occ in enumerate(occ_states)}
    n_modes = small_params.n_sites + 1
    perm = [ref_index[occupation_of_config(c, n_modes)] for c in basis.states]
    dense = op.to_dense().real
    assert dense == pytest.approx(h_ref[np.ix_(perm, perm)], abs=1e-12)


def test_hubbard_diagonal_and_free_limit():
    params = ModelParams(half_length=1, coupling=1.0, hubbard_u=10.0)
    basis = enumerate_basis(params, Sector.TWO_EXC, ModelKind.HUBBARD)
    h = build_hubbard_hamiltonian(params, basis)
    i_ee = basis.index_of[(basis.e_index, basis.e_index)]
    assert h.matrix[i_ee, i_ee] == pytest.approx(-10.0)
    # single particle never doubly occupies the auxiliary site
    params0 = ModelParams(half_length=4, coupling=1.3, hubbard_u=0.0)
    b_h = enumerate_basis(params0, Sector.ONE_EXC, ModelKind.HUBBARD)
    b_s = enumerate_basis(params0, Sector.ONE_EXC, ModelKind.SPIN)
    e_h = np.linalg.eigvalsh(build_hubbard_hamiltonian(params0, b_h).to_dense())
    e_s = np.linalg.eigvalsh(build_spin_hamiltonian(params0, b_s).to_dense())
    assert e_h == pytest.approx(e_s, abs=1e-12)


def test_spin_equals_constrained_hubbard_any_u(small_params):
    basis_s = enumerate_basis(small_params, Sector.TWO_EXC, ModelKind.SPIN)
    basis_h = enumerate_basis(small_params, Sector.TWO_EXC, ModelKind.HUBBARD)
    h_s = build_spin_hamiltonian(small_params, basis_s).to_dense()
    h_h = build_hubbard_hamiltonian(small_params, basis_h).to_dense()
    # identical ordering means the constrained block is the leading one
    assert h_h[: basis_s.dim, : basis_s.dim] == pytest.approx(h_s, abs=1e-14)


def test_hermiticity_and_symmetries(small_params):
    for sector in (Sector.ONE_EXC, Sector.TWO_EXC):
        basis = enumerate_basis(small_params, sector, ModelKind.SPIN)
        h = build_spin_hamiltonian(small_params, basis)
        assert h.is_hermitian()
        assert np.allclose(h.to_dense().imag, 0.0)
        par = parity_operator(basis)
        sq = (par.matrix @ par.matrix).toarray() - np.eye(basis.dim)
        assert np.max(np.abs(sq)) == 0.0
        assert commutator_norm(par, h) < 1e-12
        n_op = total_excitation_operator(basis)
        assert commutator_norm(n_op, h) < 1e-12
        diag = n_op.matrix.diagonal()
        assert np.all(diag == sector.value)


def test_basis_mismatch_errors(small_params):
    basis_h = enumerate_basis(small_params, Sector.TWO_EXC, ModelKind.HUBBARD)
    with pytest.raises(BasisMismatchError):
        build_spin_hamiltonian(small_params, basis_h)
    basis_s = enumerate_basis(small_params, Sector.TWO_EXC, ModelKind.SPIN)
    with pytest.raises(BasisMismatchError):
        build_hubbard_hamiltonian(small_params, basis_s)
    other = ModelParams(half_length=4, coupling=small_params.coupling)
    with pytest.raises(BasisMismatchError):
        build_spin_hamiltonian(other, basis_s)
    spin_inf = ModelParams(half_length=3, hubbard_u=INFINITE)
    with pytest.raises(BasisMismatchError):
        build_hubbard_hamiltonian(spin_inf, basis_h)


def test_kicked_hamiltonian_pulse():
    params = ModelParams(half_length=5, coupling=0.8, hubbard_u=0.0)
    basis = enumerate_basis(params, Sector.ONE_EXC, ModelKind.HUBBARD)
    pulse = PulseSpec(area=2.0, onset=1.0, width=2e-5)
    h0, v = build_kicked_hamiltonian(params, pulse, basis)
    assert h0.is_hermitian()
    # potential integrates to the requested area on the emitter projector
    v_dense = v.to_dense() * pulse.width
    expected = np.zeros_like(v_dense)
    i_e = basis.index_of[(basis.e_index,)]
    expected[i_e, i_e] = 2.0
    assert v_dense == pytest.approx(expected, abs=1e-12)
    with pytest.raises(InvalidPulseError):
        PulseSpec(area=2.0, onset=1.0, width=0.0)


def test_site_labels_and_occupation_matrix():
    params = ModelParams(half_length=2)
    basis = enumerate_basis(params, Sector.TWO_EXC, ModelKind.SPIN)
    labels = basis.site_labels()
    assert labels == [-2, -1, 0, 1, 2, "e"]
    vec = np.zeros(basis.dim)
    vec[basis.index_of[(2, 2)]] = 1.0  # two photons on site 0
    dens = basis.occupation_matrix @ vec
    assert dens[basis.site_of(0)] == pytest.approx(2.0)
    assert dens.sum() == pytest.approx(2.0)
