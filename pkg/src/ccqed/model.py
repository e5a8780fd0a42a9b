"""Bases and sparse Hamiltonians for the doped coupled-cavity chain.

The chain has sites l = -N..N (M = 2N+1 cavities) with nearest-neighbour
photon hopping ``kappa`` and open ends.  The centre cavity couples with
strength ``coupling`` to a two-level emitter.  Two equivalent descriptions
are supported:

* SPIN      -- the emitter is a two-level system (states g/e, hardcore),
* HUBBARD   -- the emitter is an auxiliary bosonic site ``e`` attached to
               the centre, with an on-site energy ``U/2 * n_e * (1 - n_e)``
               that is -U for double occupation and 0 otherwise.  Large |U|
               energetically decouples the doubly occupied auxiliary site,
               reproducing the spin model.

Internally every configuration is a sorted tuple of occupied site indices,
where chain site l maps to index l + N and the emitter/auxiliary site is
index M.  Basis ordering is fixed (pure photon pairs lexicographically,
emitter-excited states last) so that state vectors are bit-comparable
across runs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import BasisMismatchError, InvalidParamsError, InvalidPulseError

INFINITE = math.inf

_HERMITICITY_ATOL = 1e-12


class Sector(enum.Enum):
    ONE_EXC = 1
    TWO_EXC = 2


class ModelKind(enum.Enum):
    SPIN = "spin"
    HUBBARD = "hubbard"


@dataclass(frozen=True)
class ModelParams:
    """Chain geometry and couplings.

    half_length: N, chain spans sites -N..N.
    kappa: photon hopping strength (> 0, unit of energy).
    coupling: emitter-cavity coupling strength (>= 0).
    hubbard_u: on-site interaction of the auxiliary site; ``INFINITE``
        selects the hardcore constraint (spin model).
    """

    half_length: int
    kappa: float = 1.0
    coupling: float = 1.0
    hubbard_u: float = INFINITE

    def __post_init__(self) -> None:
        if self.half_length < 1:
            raise InvalidParamsError(f"half_length must be >= 1, got {self.half_length}")
        if not self.kappa > 0:
            raise InvalidParamsError(f"kappa must be > 0, got {self.kappa}")
        if self.coupling < 0:
            raise InvalidParamsError(f"coupling must be >= 0, got {self.coupling}")

    @property
    def n_sites(self) -> int:
        """Number of chain cavities M = 2N + 1."""
        return 2 * self.half_length + 1


@dataclass(frozen=True)
class Basis:
    """Ordered configuration basis for one excitation sector.

    ``states`` holds sorted tuples of occupied site indices (chain site l
    at index l + N, emitter at index M).  ``index_of`` inverts the order.
    """

    sector: Sector
    model_kind: ModelKind
    half_length: int
    states: tuple[tuple[int, ...], ...]
    index_of: dict[tuple[int, ...], int] = field(repr=False, compare=False)

    @property
    def n_sites(self) -> int:
        return 2 * self.half_length + 1

    @property
    def e_index(self) -> int:
        """Internal index of the emitter / auxiliary site."""
        return self.n_sites

    @property
    def dim(self) -> int:
        return len(self.states)

    def site_of(self, l: int) -> int:
        """Internal index of chain site l (l in -N..N)."""
        if abs(l) > self.half_length:
            raise IndexError(f"site {l} outside chain of half length {self.half_length}")
        return l + self.half_length

    def site_labels(self) -> list[object]:
        """Labels for density vectors: -N..N followed by 'e'."""
        n = self.half_length
        return [*range(-n, n + 1), "e"]

    @cached_property
    def occupation_matrix(self) -> sp.csr_matrix:
        """(n_sites+1) x dim matrix mapping |amplitudes|^2 to occupations."""
        rows, cols, vals = [], [], []
        for j, config in enumerate(self.states):
            for site in config:
                rows.append(site)
                cols.append(j)
                vals.append(1.0)
        mat = sp.coo_matrix(
            (vals, (rows, cols)), shape=(self.n_sites + 1, self.dim)
        )
        return mat.tocsr()


def enumerate_basis(params: ModelParams, sector: Sector, model_kind: ModelKind) -> Basis:
    """Enumerate configurations of a sector in a fixed, documented order.

    ONE_EXC: photon on each chain site (ascending l), emitter excitation last.
    TWO_EXC: unordered photon pairs (lexicographic, doubly occupied sites
    included), then photon+emitter states (ascending l), and for the HUBBARD
    kind finally the doubly occupied auxiliary site.
    """
    m = params.n_sites
    e = m
    states: list[tuple[int, ...]] = []
    if sector is Sector.ONE_EXC:
        states.extend((i,) for i in range(m))
        states.append((e,))
    else:
        states.extend((i, j) for i in range(m) for j in range(i, m))
        states.extend((i, e) for i in range(m))
        if model_kind is ModelKind.HUBBARD:
            states.append((e, e))
    index_of = {config: i for i, config in enumerate(states)}
    return Basis(
        sector=sector,
        model_kind=model_kind,
        half_length=params.half_length,
        states=tuple(states),
        index_of=index_of,
    )


@dataclass(frozen=True)
class SparseOperator:
    """Hermitian sparse operator tied to the Basis it acts on."""

    matrix: sp.csr_matrix
    basis: Basis

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix.dot(vec)

    def expectation(self, vec: np.ndarray) -> float:
        return float(np.real(np.vdot(vec, self.matrix.dot(vec))))

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def is_hermitian(self, atol: float = _HERMITICITY_ATOL) -> bool:
        delta = self.matrix - self.matrix.getH()
        if delta.nnz == 0:
            return True
        return float(np.max(np.abs(delta.data))) <= atol

    def spectral_bound(self) -> float:
        """Cheap upper bound on |eigenvalues| (maximum absolute row sum)."""
        return float(np.max(np.abs(self.matrix).sum(axis=1)))


def _occupations(config: tuple[int, ...]) -> dict[int, int]:
    occ: dict[int, int] = {}
    for site in config:
        occ[site] = occ.get(site, 0) + 1
    return occ


def _hop_target(config: tuple[int, ...], src: int, dst: int) -> tuple[tuple[int, ...], float]:
    """Move one boson src -> dst; returns (new config, sqrt(n_src*(n_dst+1)))."""
    occ = _occupations(config)
    n_src = occ.get(src, 0)
    if n_src == 0:
        return (), 0.0
    n_dst = occ.get(dst, 0)
    items = list(config)
    items.remove(src)
    items.append(dst)
    items.sort()
    return tuple(items), math.sqrt(n_src * (n_dst + 1))


def _build_hopping(
    basis: Basis, bonds: list[tuple[int, int, float]], diagonal: np.ndarray | None = None
) -> SparseOperator:
    """Assemble H = sum_bonds amp * (a_dst^dag a_src + h.c.) + diagonal."""
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for col, config in enumerate(basis.states):
        for src, dst, amp in bonds:
            for a, b in ((src, dst), (dst, src)):
                target, factor = _hop_target(config, a, b)
                if factor == 0.0:
                    continue
                row = basis.index_of.get(target)
                if row is None:
                    continue  # constrained out (hardcore emitter in the spin model)
                rows.append(row)
                cols.append(col)
                vals.append(amp * factor)
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim)).tocsr()
    if diagonal is not None:
        mat = mat + sp.diags(diagonal)
    return SparseOperator(matrix=mat.tocsr(), basis=basis)


def _chain_bonds(params: ModelParams) -> list[tuple[int, int, float]]:
    m = params.n_sites
    return [(i, i + 1, -params.kappa) for i in range(m - 1)]


def _check_basis(params: ModelParams, basis: Basis, kind: ModelKind, sector: Sector | None = None) -> None:
    if basis.model_kind is not kind:
        raise BasisMismatchError(f"expected {kind.value} basis, got {basis.model_kind.value}")
    if basis.half_length != params.half_length:
        raise BasisMismatchError(
            f"basis half_length {basis.half_length} != params half_length {params.half_length}"
        )
    if sector is not None and basis.sector is not sector:
        raise BasisMismatchError(f"expected {sector} basis, got {basis.sector}")


def build_spin_hamiltonian(params: ModelParams, basis: Basis) -> SparseOperator:
    """Chain hopping plus emitter exchange on a SPIN-kind basis.

    Matrix elements: -kappa between neighbouring photon configurations with
    bosonic sqrt(n) factors, ``coupling`` (times sqrt(2) off a doubly
    occupied centre) between centre-photon and emitter-excited states.
    The diagonal is zero.
    """
    _check_basis(params, basis, ModelKind.SPIN)
    bonds = _chain_bonds(params)
    bonds.append((params.half_length, basis.e_index, params.coupling))
    return _build_hopping(basis, bonds)


def build_hubbard_hamiltonian(params: ModelParams, basis: Basis) -> SparseOperator:
    """Bosonic-equivalent Hamiltonian with a finite on-site U at the auxiliary site.

    The interaction term ``U/2 * n_e * (1 - n_e)`` vanishes for occupation
    0 or 1 and equals -U for the doubly occupied auxiliary site.
    """
    _check_basis(params, basis, ModelKind.HUBBARD)
    if not math.isfinite(params.hubbard_u):
        raise BasisMismatchError("hubbard_u must be finite; use the spin model for hardcore")
    bonds = _chain_bonds(params)
    bonds.append((params.half_length, basis.e_index, params.coupling))
    e = basis.e_index
    diag = np.zeros(basis.dim)
    for i, config in enumerate(basis.states):
        n_e = sum(1 for site in config if site == e)
        diag[i] = 0.5 * params.hubbard_u * n_e * (1 - n_e)
    return _build_hopping(basis, bonds, diagonal=diag)


@dataclass(frozen=True)
class PulseSpec:
    """Rectangular potential pulse on the emitter site.

    area: integrated strength (dimensionless for kappa = 1).
    onset: start time of the window, in 1/kappa units.
    width: window duration; the amplitude is area/width.
    """

    area: float
    onset: float = 0.0
    width: float = 1e-5

    def __post_init__(self) -> None:
        if not self.width > 0:
            raise InvalidPulseError(f"pulse width must be > 0, got {self.width}")
        if self.onset < 0:
            raise InvalidPulseError(f"pulse onset must be >= 0, got {self.onset}")

    @property
    def amplitude(self) -> float:
        return self.area / self.width


def build_kicked_hamiltonian(
    params: ModelParams, pulse: PulseSpec, basis: Basis
) -> tuple[SparseOperator, SparseOperator]:
    """Static part and pulsed potential of the kicked single-particle model.

    Returns (H0, V) where H0 is the chain plus the centre-to-auxiliary link
    and V = (area/width) |e><e| is active on onset < t < onset + width.
    """
    _check_basis(params, basis, ModelKind.HUBBARD, Sector.ONE_EXC)
    bonds = _chain_bonds(params)
    bonds.append((params.half_length, basis.e_index, params.coupling))
    h0 = _build_hopping(basis, bonds)
    diag = np.zeros(basis.dim)
    diag[basis.index_of[(basis.e_index,)]] = pulse.amplitude
    v = SparseOperator(matrix=sp.diags(diag).tocsr(), basis=basis)
    return h0, v


def parity_operator(basis: Basis) -> SparseOperator:
    """Permutation implementing the reflection l -> -l (emitter site fixed)."""
    m = basis.n_sites

    def reflect(site: int) -> int:
        return site if site == basis.e_index else m - 1 - site

    rows, cols = [], []
    for col, config in enumerate(basis.states):
        target = tuple(sorted(reflect(s) for s in config))
        rows.append(basis.index_of[target])
        cols.append(col)
    mat = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(basis.dim, basis.dim))
    return SparseOperator(matrix=mat.tocsr(), basis=basis)


def total_excitation_operator(basis: Basis) -> SparseOperator:
    """Diagonal operator counting photons plus emitter excitation."""
    diag = np.full(basis.dim, float(basis.sector.value))
    return SparseOperator(matrix=sp.diags(diag).tocsr(), basis=basis)


def commutator_norm(a: SparseOperator, b: SparseOperator) -> float:
    """Max-abs entry of [A, B]; zero for compatible symmetries."""
    delta = a.matrix.dot(b.matrix) - b.matrix.dot(a.matrix)
    if delta.nnz == 0:
        return 0.0
    return float(np.max(np.abs(delta.data)))
