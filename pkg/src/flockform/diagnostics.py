"""Energy bookkeeping and analytical certificates for the controlled swarm.

The total energy E1 + E2 (velocity fluctuation plus accumulated control
potential along the chain) never increases; its decay rate is the dissipation
D.  Inverting the initial energy budget yields a uniform bound d_M on the
chain residuals, from which distance brackets, a kernel floor, and explicit
initial-data conditions for pattern formation follow.  All functions here are
pure; the integrator calls compute_record once per accepted step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .model import (
    FormationSpec,
    ModelParams,
    SwarmState,
    distance_matrix,
    formation_residuals,
    kernel_psi,
    phi_antiderivative,
    phi_antiderivative_inverse,
    phi_antiderivative_sup,
    control_weight_phi,
)

_BETA_ONE = 1e-9


@dataclass
class DiagnosticsRecord:
    """Per-step scalar observables of a swarm state."""

    t: float
    E1: float            # velocity-fluctuation energy, (1/4n) sum_ij |v_i - v_j|^2
    E2: float            # control potential, (M/2) sum_links Phi(|g|^2)
    D: float             # dissipation rate, (K/2n) sum_ij psi(r_ij)|v_i - v_j|^2
    v_diameter: float    # max_ij |v_i - v_j|
    x_diameter: float    # max_ij r_ij
    min_dist: float      # min_{i != j} r_ij
    pattern_error: float  # sum_links |g|^2
    v_c: np.ndarray
    x_c: np.ndarray


class KineticEnergy(NamedTuple):
    fluctuation: float   # (1/4n) sum_ij |v_i - v_j|^2, frame-invariant
    total: float         # 0.5 ||v||^2, frame-dependent


class FlockingHypothesis(NamedTuple):
    """Sufficient flocking conditions: (i) beta <= 1, or (ii) tail budget."""

    holds_i: bool
    holds_ii: Optional[bool]   # None when beta <= 1 (not applicable)
    satisfied: bool


class CorollaryVerdict(NamedTuple):
    """Explicit initial-data condition for a guaranteed minimal distance."""

    pair_holds: dict       # (i, j) zero-based, i < j -> bool
    holds: bool


@dataclass
class DistanceBracket:
    """Per-link and per-pair distance bounds implied by the residual bound d_M."""

    link_lower: np.ndarray   # max(0, |z_i| - d_M)
    link_upper: np.ndarray   # |z_i| + d_M
    pair_lower: np.ndarray   # (n, n): |sum_k z_k| - (j-i) d_M for i < j, 0 on diagonal
    C0: float                # n (max |z_k| + d_M), a-priori diameter bound
    psi_m: float             # kernel floor over [0, C0]


@dataclass
class CertificateReport:
    """Evaluated analytical conditions for one initial configuration."""

    params: ModelParams
    n: int
    E0: float
    v_diameter_bound: float          # 2 sqrt(n E0)
    C0_star: Optional[float]         # velocity-fluctuation budget (None if M = 0)
    d_M: Optional[float]             # residual bound, absent if the budget never closes
    hypothesis: Optional[FlockingHypothesis]
    bracket: Optional[DistanceBracket]
    corollary: Optional[CorollaryVerdict]  # only for beta in (0, 1)


# ---------------------------------------------------------------------------
# energies


def kinetic_energy(state: SwarmState) -> KineticEnergy:
    """Both kinetic forms; they coincide exactly in the zero-mean-velocity frame."""
    v = state.v
    v_c = v.mean(axis=0)
    fluct = 0.5 * float(np.sum((v - v_c) ** 2))
    total = 0.5 * float(np.sum(v ** 2))
    return KineticEnergy(fluct, total)


def control_potential(state: SwarmState, spec: FormationSpec, M: float, beta: float) -> float:
    """E2 = (M/2) sum over links of Phi(|g_i|^2); zero iff the pattern is exact."""
    spec.check_against(state)
    g = formation_residuals(state.x, spec.z)
    s = np.einsum("ij,ij->i", g, g)
    return 0.5 * M * float(np.sum(phi_antiderivative(s, beta)))


def dissipation(state: SwarmState, params: ModelParams) -> float:
    """D = (K/2n) sum_ij psi(r_ij) |v_i - v_j|^2; zero iff velocity consensus."""
    if params.K == 0.0:
        return 0.0
    n = state.n
    iu = np.triu_indices(n, k=1)
    r = distance_matrix(state.x)[iu]
    dv = state.v[iu[0]] - state.v[iu[1]]
    vsq = np.einsum("ij,ij->i", dv, dv)
    return (params.K / n) * float(np.sum(kernel_psi(r, params) * vsq))


class InitialEnergy(NamedTuple):
    E0: float
    v_diameter_bound: float   # 2 sqrt(n E0), uniform in time


def initial_energy(initial: SwarmState, spec: FormationSpec, M: float, beta: float) -> InitialEnergy:
    """Total budget E0 = E1(0) + E2(0) and the velocity-diameter ceiling it buys."""
    E0 = kinetic_energy(initial).fluctuation + control_potential(initial, spec, M, beta)
    return InitialEnergy(E0, 2.0 * np.sqrt(initial.n * E0))


def pattern_residual(state: SwarmState, spec: FormationSpec):
    """Per-link residual vectors g_i = x_i - x_{i+1} - z_i and sum of |g_i|^2."""
    spec.check_against(state)
    g = formation_residuals(state.x, spec.z)
    return g, float(np.einsum("ij,ij->", g, g))


def compute_record(state: SwarmState, params: ModelParams, spec: FormationSpec) -> DiagnosticsRecord:
    """All per-step observables in one pairwise pass."""
    x, v, n = state.x, state.v, state.n
    iu = np.triu_indices(n, k=1)
    r = distance_matrix(x)[iu]
    dv = v[iu[0]] - v[iu[1]]
    vsq = np.einsum("ij,ij->i", dv, dv)
    v_c = v.mean(axis=0)
    g = formation_residuals(x, spec.z)
    gsq = np.einsum("ij,ij->i", g, g)
    if params.K == 0.0:
        D = 0.0
    else:
        D = (params.K / n) * float(np.sum(kernel_psi(r, params) * vsq))
    return DiagnosticsRecord(
        t=state.t,
        E1=0.5 * float(np.sum((v - v_c) ** 2)),
        E2=0.5 * params.M * float(np.sum(phi_antiderivative(gsq, params.beta))),
        D=D,
        v_diameter=float(np.sqrt(vsq.max())),
        x_diameter=float(r.max()),
        min_dist=float(r.min()),
        pattern_error=float(gsq.sum()),
        v_c=v_c,
        x_c=x.mean(axis=0),
    )


# ---------------------------------------------------------------------------
# the residual bound d_M and its consequences


def velocity_budget(initial: SwarmState, M: float) -> float:
    """C0* = (1/2Mn) sum_ij |v_i^0 - v_j^0|^2, the kinetic budget per control gain."""
    if M <= 0:
        raise ValueError("velocity budget needs a positive control gain M")
    return 2.0 * kinetic_energy(initial).fluctuation / M


def initial_link_residuals_sq(initial: SwarmState, spec: FormationSpec) -> np.ndarray:
    """Squared initial chain residuals a_i = |x_i^0 - x_{i+1}^0 - z_i|^2."""
    spec.check_against(initial)
    g = formation_residuals(initial.x, spec.z)
    return np.einsum("ij,ij->i", g, g)


def solve_dM(initial: SwarmState, spec: FormationSpec, M: float, beta: float) -> Optional[float]:
    """Smallest d_M >= max_i |g_i(0)| closing the energy budget.

    Solves sum_i (Phi(d_M^2) - Phi(a_i)) = C0* by bracketed bisection plus a
    Newton polish.  When the budget is already closed at the largest initial
    residual (C0* spent entirely on the slack between links), that residual
    itself is returned.  For beta > 1 the antiderivative is bounded and the
    equation may have no solution; None is returned in that case.
    """
    C0s = velocity_budget(initial, M)
    a = initial_link_residuals_sq(initial, spec)
    n1 = a.size
    phi_a_sum = float(np.sum(phi_antiderivative(a, beta)))
    target = (C0s + phi_a_sum) / n1
    if target >= phi_antiderivative_sup(beta):
        return None

    def G(d):
        return n1 * phi_antiderivative(d * d, beta) - phi_a_sum - C0s

    lo = float(np.sqrt(a.max()))
    if G(lo) >= 0.0:
        return lo
    hi = lo + 10.0 + 10.0 * C0s
    while G(hi) < 0.0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if G(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * (1.0 + hi):
            break
    d = 0.5 * (lo + hi)
    for _ in range(4):  # Newton polish; G'(d) = 2 d n1 phi(d^2)
        slope = 2.0 * d * n1 * control_weight_phi(d * d, beta)
        if slope == 0.0:
            break
        d -= G(d) / slope
    d = max(d, float(np.sqrt(a.max())))  # Newton must not undercut the floor
    if not abs(G(d)) <= 1e-10 * (1.0 + C0s):
        raise ArithmeticError(f"d_M root residual {G(d):.3e} out of tolerance")
    return float(d)


def check_flocking_hypothesis(
    initial: SwarmState, spec: FormationSpec, params: ModelParams
) -> FlockingHypothesis:
    """Sufficient conditions for flocking with bounded relative positions.

    (i) holds whenever beta <= 1.  For beta > 1 the control weight is
    integrable and (ii) requires the tail sum_i integral_{a_i}^inf phi to
    exceed the velocity budget C0*; the tail is (1+a_i)^(1-beta)/(beta-1)
    in closed form.
    """
    holds_i = params.beta <= 1.0 + _BETA_ONE
    if holds_i:
        return FlockingHypothesis(True, None, True)
    if params.M <= 0:
        raise ValueError("hypothesis (ii) needs a positive control gain M")
    a = initial_link_residuals_sq(initial, spec)
    tail = float(np.sum((1.0 + a) ** (1.0 - params.beta))) / (params.beta - 1.0)
    holds_ii = tail > velocity_budget(initial, params.M)
    return FlockingHypothesis(False, holds_ii, holds_ii)


def check_corollary(
    initial: SwarmState, spec: FormationSpec, M: float, beta: float
) -> CorollaryVerdict:
    """Per-pair initial-data condition guaranteeing a global minimal distance.

    For every pair i < j the squared chain offset |sum_{k=i}^{j-1} z_k|^2 must
    exceed a budget term built from C0** = Phi^{-1}(C0*) and the initial
    residuals along the segment.  Only meaningful for beta in (0, 1).
    """
    if not 0.0 < beta < 1.0:
        raise ValueError("corollary condition applies to beta in (0, 1) only")
    a = initial_link_residuals_sq(initial, spec)
    C0ss = phi_antiderivative_inverse(velocity_budget(initial, M), beta)
    z = spec.z
    n = spec.n_agents
    q_exp = 2.0 - 1.0 / (1.0 - beta)
    pair_holds = {}
    for i in range(n - 1):
        seg_z = np.zeros(z.shape[1])
        seg_a = 0.0
        for j in range(i + 1, n):
            seg_z = seg_z + z[j - 1]
            seg_a += a[j - 1]
            m = j - i
            lhs = float(seg_z @ seg_z)
            rhs = (m / (m + 1.0)) ** q_exp * (m + 1.0) * (C0ss + seg_a)
            pair_holds[(i, j)] = lhs > rhs
    return CorollaryVerdict(pair_holds, all(pair_holds.values()))


def chain_young_delta(n: int):
    """Chain constant delta for the sharpened Young inequality on n-1 vectors.

    Returns the largest delta on the grid 1/4, 1/8, ... whose epsilon
    recursion eps_1 = 1 - delta, eps_i = 1 - delta^i - 1/(4 eps_{i-1})
    satisfies (1 + delta^i)/2 < eps_i < 1 - delta^i for i >= 2, together with
    the epsilon sequence.  The i = 1 upper bound is an exact equality by
    construction, so only its lower bound is enforced.
    """
    if n < 2:
        raise ValueError("need at least two agents")
    for k in range(2, 64):
        delta = 2.0 ** -k
        eps = [1.0 - delta]
        ok = (1.0 + delta) / 2.0 < eps[0]
        for i in range(2, n):
            e = 1.0 - delta ** i - 1.0 / (4.0 * eps[-1])
            eps.append(e)
            ok = ok and (1.0 + delta ** i) / 2.0 < e < 1.0 - delta ** i
        if ok:
            return delta, np.array(eps)
    raise ArithmeticError(f"no grid delta admits the chain bounds for n = {n}")


def distance_bracket(spec: FormationSpec, d_M: float, params: ModelParams) -> DistanceBracket:
    """Distance bounds implied by |g_i(t)| <= d_M along every trajectory.

    Each link distance is pinned to [max(0, |z_i| - d_M), |z_i| + d_M]; chains
    of links give the pairwise lower bounds and the a-priori diameter C0,
    whose kernel value is the positive floor psi_m.
    """
    z = spec.z
    n = spec.n_agents
    zn = np.linalg.norm(z, axis=1)
    link_lower = np.maximum(0.0, zn - d_M)
    link_upper = zn + d_M
    pair_lower = np.zeros((n, n))
    cum = np.vstack([np.zeros(z.shape[1]), np.cumsum(z, axis=0)])
    for i in range(n):
        for j in range(i + 1, n):
            seg = float(np.linalg.norm(cum[j] - cum[i]))
            pair_lower[i, j] = pair_lower[j, i] = seg - (j - i) * d_M
    C0 = n * (float(zn.max()) + d_M)
    return DistanceBracket(link_lower, link_upper, pair_lower, C0, kernel_psi(C0, params))


def certify(initial: SwarmState, spec: FormationSpec, params: ModelParams) -> CertificateReport:
    """Evaluate every analytical condition for one initial configuration."""
    spec.check_against(initial, params)
    E0, vbound = initial_energy(initial, spec, params.M, params.beta)
    if params.M <= 0:
        return CertificateReport(params, initial.n, E0, vbound,
                                 None, None, None, None, None)
    C0s = velocity_budget(initial, params.M)
    hypothesis = check_flocking_hypothesis(initial, spec, params)
    d_M = solve_dM(initial, spec, params.M, params.beta)
    bracket = distance_bracket(spec, d_M, params) if d_M is not None else None
    corollary = None
    if 0.0 < params.beta < 1.0:
        corollary = check_corollary(initial, spec, params.M, params.beta)
    return CertificateReport(params, initial.n, E0, vbound,
                             C0s, d_M, hypothesis, bracket, corollary)
