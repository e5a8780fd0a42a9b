"""Closed-form single-excitation eigenstates and kick perturbation theory.

For coupling lam and hopping kappa the two localized polariton states decay
as exp(-beta*|l|) with

    exp(2*beta) = sqrt((lam/(sqrt(2)*kappa))**4 + 1) + (lam/(sqrt(2)*kappa))**2,

equivalently lam**2 = kappa**2*(exp(2*beta) - exp(-2*beta)), and carry
energies +-2*kappa*cosh(beta) outside the band [-2*kappa, 2*kappa].

On a finite open chain the exact counterpart has profile
sinh(theta*(N+1-|l|)) with theta solving a one-line quantization condition
that converges to beta exponentially in N; ``bound_state`` builds that
exact eigenstate so residual checks hold at any chain length.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidParamsError, SingularKError, TruncationTooCoarseError
from .model import Basis, ModelParams, Sector

DEFAULT_BOUNDARY_TOL = 1e-10


def solve_beta(coupling: float, kappa: float) -> float:
    """Localization exponent of the bound polaritons (infinite chain)."""
    if kappa <= 0:
        raise InvalidParamsError(f"kappa must be > 0, got {kappa}")
    if coupling < 0:
        raise InvalidParamsError(f"coupling must be >= 0, got {coupling}")
    x = (coupling / (math.sqrt(2.0) * kappa)) ** 2
    return 0.5 * math.log(math.sqrt(x * x + 1.0) + x)


@dataclass(frozen=True)
class BoundStateParams:
    """Closed-form bound-state data: exponent, normalization and energies."""

    beta: float
    omega_norm: float
    energy_plus: float
    energy_minus: float

    @classmethod
    def from_model(cls, params: ModelParams) -> "BoundStateParams":
        beta = solve_beta(params.coupling, params.kappa)
        if beta <= 0:
            raise InvalidParamsError("bound states require coupling > 0")
        omega = (2.0 * params.kappa / params.coupling) ** 2 * math.sinh(beta) ** 2
        omega += math.cosh(beta) / math.sinh(beta)
        e_plus = 2.0 * params.kappa * math.cosh(beta)
        return cls(beta=beta, omega_norm=omega, energy_plus=e_plus, energy_minus=-e_plus)

    def atom_amplitude(self, params: ModelParams, sign: int) -> float:
        """Emitter component of |phi_sign>."""
        return (
            sign
            * 2.0
            * params.kappa
            * math.sinh(self.beta)
            / (params.coupling * math.sqrt(self.omega_norm))
        )

    def photon_amplitude(self, sign: int, l: int) -> float:
        """Photon component at chain site l of |phi_sign>."""
        return (-sign) ** abs(l) * math.exp(-self.beta * abs(l)) / math.sqrt(self.omega_norm)


def bound_energies(params: ModelParams) -> tuple[float, float]:
    """(energy_plus, energy_minus) = +-2*kappa*cosh(beta), infinite chain."""
    bp = BoundStateParams.from_model(params)
    return bp.energy_plus, bp.energy_minus


def solve_beta_open_chain(coupling: float, kappa: float, half_length: int) -> float:
    """Exponent theta of the exact bound state on the open chain -N..N.

    Solves lam^2 = 4 kappa^2 cosh(theta) (cosh(theta) - r(theta)) with
    r = sinh(theta*N)/sinh(theta*(N+1)); theta -> beta as N -> infinity.
    """
    beta = solve_beta(coupling, kappa)
    if beta <= 0:
        raise InvalidParamsError("open-chain bound state requires coupling > 0")
    n = half_length
    lam_sq = coupling * coupling

    def ratio(theta: float) -> float:
        return math.exp(-theta) * math.expm1(-2.0 * theta * n) / math.expm1(
            -2.0 * theta * (n + 1)
        )

    def f(theta: float) -> float:
        c = math.cosh(theta)
        return 4.0 * kappa * kappa * c * (c - ratio(theta)) - lam_sq

    lo = 1e-14
    if f(lo) >= 0.0:
        raise TruncationTooCoarseError(
            f"chain half_length={n} too short to localize a bound state at coupling={coupling}"
        )
    # f(beta) > 0 in exact arithmetic (the finite-chain ratio lies below
    # exp(-beta)), but for beta*n >> 1 the margin underflows; pad the bracket.
    hi = beta + 1e-9
    return float(brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200))


def open_chain_bound_energies(params: ModelParams) -> tuple[float, float]:
    """Exact (energy_plus, energy_minus) of the finite open chain."""
    theta = solve_beta_open_chain(params.coupling, params.kappa, params.half_length)
    e_plus = 2.0 * params.kappa * math.cosh(theta)
    return e_plus, -e_plus


def bound_state(
    params: ModelParams,
    sign: int,
    basis: Basis,
    boundary_tol: float = DEFAULT_BOUNDARY_TOL,
) -> np.ndarray:
    """Bound polariton |phi_sign> (sign = +1 or -1) on a ONE_EXC basis.

    The returned vector is the exact open-chain eigenstate; it matches the
    infinite-chain amplitudes (-sign)^|l| exp(-beta|l|)/sqrt(Omega) up to
    O(exp(-beta*N)).  A chain with exp(-beta*N) >= boundary_tol is rejected
    so callers never rely on formula-level amplitudes beyond their accuracy;
    pass a larger boundary_tol to accept short chains (the vector itself is
    an exact eigenstate at any length).
    """
    if sign not in (+1, -1):
        raise InvalidParamsError(f"sign must be +1 or -1, got {sign}")
    if basis.sector is not Sector.ONE_EXC:
        raise InvalidParamsError("bound_state needs a ONE_EXC basis")
    beta = solve_beta(params.coupling, params.kappa)
    if beta <= 0:
        raise InvalidParamsError("bound states require coupling > 0")
    n = params.half_length
    if math.exp(-beta * n) >= boundary_tol:
        raise TruncationTooCoarseError(
            f"exp(-beta*N) = {math.exp(-beta * n):.3e} >= boundary_tol = {boundary_tol:.3e}"
        )
    return _open_chain_bound_state(params, sign, basis)


def _open_chain_bound_state(params: ModelParams, sign: int, basis: Basis) -> np.ndarray:
    theta = solve_beta_open_chain(params.coupling, params.kappa, params.half_length)
    n = params.half_length
    # profile(x) = sinh(theta*(N+1-x))/sinh(theta*(N+1)), overflow-free form
    denom = math.expm1(-2.0 * theta * (n + 1))
    ls = np.arange(-n, n + 1)
    x = np.abs(ls)
    profile = np.exp(-theta * x) * np.expm1(-2.0 * theta * (n + 1 - x)) / denom
    vec = np.zeros(basis.dim, dtype=complex)
    vec[: basis.n_sites] = np.where(x % 2 == 0, 1.0, -float(sign)) * profile
    energy = sign * 2.0 * params.kappa * math.cosh(theta)
    vec[basis.index_of[(basis.e_index,)]] = params.coupling * profile[n] / energy
    return vec / np.linalg.norm(vec)


class ScatteringStateParams(NamedTuple):
    """Coefficient set of an even-parity extended state at momentum k."""

    k: float
    energy: float
    g: complex
    f: complex
    a: complex
    b: complex


def scattering_coefficients(
    k: float, params: ModelParams, convention: str = "methods"
) -> ScatteringStateParams:
    """Even-parity coefficients (g, f, A, B) at momentum k in (0, pi).

    Two printed coefficient sets circulate for this model; they differ by a
    factor (lam^2 - eps^2) on one term.  The ``methods`` convention solves
    the stationary equations exactly (the residual test in the suite pins
    this) and is the default; ``main_text`` is kept for comparison.
    """
    if params.coupling <= 0:
        raise InvalidParamsError("scattering states require coupling > 0")
    if not 0.0 < k < math.pi:
        raise SingularKError(f"momentum must lie in (0, pi), got {k}")
    sin_k = math.sin(k)
    if abs(sin_k) < 1e-9:
        raise SingularKError(f"sin(k) ~ 0 at k = {k}")
    kappa, lam = params.kappa, params.coupling
    eps = -2.0 * kappa * math.cos(k)
    g = 1.0 + 0.0j
    f = eps * g / lam
    denom = 4.0j * kappa * lam * sin_k
    gap = lam * lam - eps * eps
    if convention == "methods":
        a = -g / denom * (2.0 * kappa * eps * cmath.exp(-1j * k) - gap)
        b = g / denom * (2.0 * kappa * eps * cmath.exp(1j * k) - gap)
    elif convention == "main_text":
        a = (gap * 2.0 * kappa * eps * cmath.exp(-1j * k) - gap) / denom
        b = -(gap * 2.0 * kappa * eps * cmath.exp(1j * k) + gap) / denom
    else:
        raise InvalidParamsError(f"unknown convention {convention!r}")
    return ScatteringStateParams(k=k, energy=eps, g=g, f=f, a=a, b=b)


def scattering_state(
    k: float, params: ModelParams, basis: Basis, convention: str = "methods"
) -> np.ndarray:
    """Normalized even-parity extended state at momentum k on a ONE_EXC basis."""
    if basis.sector is not Sector.ONE_EXC:
        raise InvalidParamsError("scattering_state needs a ONE_EXC basis")
    coeff = scattering_coefficients(k, params, convention)
    n = params.half_length
    ls = np.arange(-n, n + 1)
    x = np.abs(ls)
    vec = np.zeros(basis.dim, dtype=complex)
    vec[: basis.n_sites] = coeff.a * np.exp(1j * k * x) + coeff.b * np.exp(-1j * k * x)
    vec[basis.site_of(0)] = coeff.f
    vec[basis.index_of[(basis.e_index,)]] = coeff.g
    return vec / np.linalg.norm(vec)


def quantized_odd_momenta(half_length: int) -> np.ndarray:
    """Open-chain momenta k_n = n*pi/(N+1) where sin(k l) is an exact mode."""
    n = half_length
    return np.pi * np.arange(1, n + 1) / (n + 1)


def odd_parity_state(k: float, basis: Basis) -> np.ndarray:
    """Normalized odd state with amplitudes sin(k*l), zero at centre and emitter.

    Exact eigenstate of every chain Hamiltonian built here when k is one of
    ``quantized_odd_momenta``; parity eigenvalue -1 for any k.
    """
    if basis.sector is not Sector.ONE_EXC:
        raise InvalidParamsError("odd_parity_state needs a ONE_EXC basis")
    n = basis.half_length
    ls = np.arange(-n, n + 1)
    vec = np.zeros(basis.dim, dtype=complex)
    vec[: basis.n_sites] = np.sin(k * ls)
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise SingularKError(f"sin(k l) vanishes identically at k = {k}")
    return vec / norm


def overlap_p(params: ModelParams, mu: int, nu: int) -> float:
    """Emitter-projected overlap <phi_mu|e><e|phi_nu>.

    Magnitude (4 kappa^2 / (lam^2 Omega)) sinh^2(beta); negative between
    opposite-sign bound states.
    """
    if mu not in (+1, -1) or nu not in (+1, -1):
        raise InvalidParamsError("mu and nu must be +1 or -1")
    bp = BoundStateParams.from_model(params)
    magnitude = (
        4.0
        * params.kappa**2
        * math.sinh(bp.beta) ** 2
        / (params.coupling**2 * bp.omega_norm)
    )
    return magnitude if mu == nu else -magnitude


class KickTransitions(NamedTuple):
    """Second-order transition probabilities for a delta kick on the emitter."""

    cross: float
    stay: float
    escape: float
    perturbative_ok: bool


def perturbative_transitions(area: float, p: float) -> KickTransitions:
    """Second-order closed forms for a kick of integrated strength ``area``.

    cross  = area^2 p^2 (1 + area^2)        (bound state to the other one)
    stay   = (1 - area^2 p)^2 + (area p)^2  (bound state to itself)
    escape = 1 - stay - cross = 2 area^2 p (1 - p - area^2 p)

    ``perturbative_ok`` is False when the escape expression turns negative,
    i.e. the kick is too strong for the expansion to be meaningful.
    """
    u2p = area * area * p
    cross = (area * p) ** 2 * (1.0 + area * area)
    stay = (1.0 - u2p) ** 2 + (area * p) ** 2
    escape = 1.0 - stay - cross
    ok = escape >= 0.0
    if not ok:
        warnings.warn(
            f"perturbative escape negative ({escape:.3e}); expansion out of validity",
            stacklevel=2,
        )
    return KickTransitions(cross=cross, stay=stay, escape=escape, perturbative_ok=ok)


def delta_kick_transitions(area: float, p: float) -> KickTransitions:
    """Exact transition probabilities of the unitary kick exp(-i*area*|e><e|).

    Projected on the two localized eigenstates with emitter weight p each:
    stay = (1 - c p)^2 + s^2 p^2, cross = 2 c p^2, escape = 2 c p (1 - 2 p)
    with c = 1 - cos(area), s = sin(area).  Valid for any kick strength.
    """
    c = 1.0 - math.cos(area)
    s = math.sin(area)
    stay = (1.0 - c * p) ** 2 + (s * p) ** 2
    cross = 2.0 * c * p * p
    escape = 2.0 * c * p * (1.0 - 2.0 * p)
    return KickTransitions(cross=cross, stay=stay, escape=escape, perturbative_ok=True)
