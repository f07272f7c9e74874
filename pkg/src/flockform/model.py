"""Closed-loop dynamics of a velocity-alignment swarm under decentralized chain control.

Each of the n agents carries a position and velocity in R^d.  Velocities relax
toward each other through a distance-weighted averaging force, while a chain of
offset targets z_1..z_{n-1} pulls consecutive agents into a prescribed spatial
pattern.  Everything in this module is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KERNEL_SINGULAR = "singular"
KERNEL_REGULAR = "regular"
KERNEL_SHIFTED = "shifted"
KERNELS = (KERNEL_SINGULAR, KERNEL_REGULAR, KERNEL_SHIFTED)

# Below this distance from beta = 1 the closed-form antiderivative switches to
# its logarithmic branch.
_BETA_LOG_BRANCH = 1e-9


class SingularityError(RuntimeError):
    """An interaction weight was evaluated at or past its singularity.

    Raised when a pairwise distance falls outside the kernel domain (r <= 0
    for the plain singular weight, r <= delta for the shifted one).  Callers
    must treat this as an agent-overlap event; clamping the weight would
    silently destroy the collision-avoidance mechanism the singularity
    provides.
    """

    def __init__(self, message, pair=None, distance=None):
        super().__init__(message)
        self.pair = pair
        self.distance = distance


@dataclass
class SwarmState:
    """Positions and velocities of n agents in d dimensions at one instant.

    x and v are (n, d) arrays; t is dimensionless time.  Treat instances as
    immutable: the integrator and diagnostics share them freely.
    """

    t: float
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.x.ndim == 1:
            self.x = self.x[:, None]
        if self.v.ndim == 1:
            self.v = self.v[:, None]
        if self.x.shape != self.v.shape:
            raise ValueError(f"x and v shapes differ: {self.x.shape} vs {self.v.shape}")
        if self.x.ndim != 2 or self.x.shape[0] < 2 or self.x.shape[1] < 1:
            raise ValueError(f"need an (n >= 2, d >= 1) swarm, got shape {self.x.shape}")
        if not (np.isfinite(self.x).all() and np.isfinite(self.v).all()):
            raise ValueError("non-finite coordinates in swarm state")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


@dataclass
class ModelParams:
    """Coupling gains and interaction-weight shape.

    K      alignment gain (>= 0)
    M      control gain (>= 0)
    alpha  decay exponent of the alignment weight (> 0)
    beta   decay exponent of the control weight (> 0)
    kernel one of "singular"  : psi(r) = r**-alpha          on r > 0
                  "regular"   : psi(r) = (1 + r)**-alpha    on r >= 0
                  "shifted"   : psi(r) = (r - delta)**-alpha on r > delta
    delta  singularity shift, required > 0 for the shifted kernel
    """

    K: float = 10.0
    M: float = 50.0
    alpha: float = 1.1
    beta: float = 0.5
    kernel: str = KERNEL_SINGULAR
    delta: float = 0.0

    def __post_init__(self):
        if self.K < 0 or self.M < 0:
            raise ValueError("gains K, M must be nonnegative")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("exponents alpha, beta must be positive")
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}, expected one of {KERNELS}")
        if self.kernel == KERNEL_SHIFTED and self.delta <= 0:
            raise ValueError("shifted kernel requires delta > 0")


@dataclass
class FormationSpec:
    """Chain offsets z_1..z_{n-1} encoding the target pattern.

    The pattern is attained exactly when x_i - x_{i+1} = z_i for every link,
    which pins the swarm shape up to a rigid translation.
    """

    z: np.ndarray

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        if self.z.ndim == 1:
            self.z = self.z[:, None]
        if self.z.ndim != 2 or self.z.shape[0] < 1:
            raise ValueError(f"need (n-1, d) offsets, got shape {self.z.shape}")
        if not np.isfinite(self.z).all():
            raise ValueError("non-finite formation offsets")

    @property
    def n_agents(self) -> int:
        return self.z.shape[0] + 1

    def check_against(self, state: SwarmState, params: ModelParams | None = None):
        """Validate this spec for a concrete swarm (and kernel, if given)."""
        if self.n_agents != state.n:
            raise ValueError(
                f"formation encodes {self.n_agents} agents, state has {state.n}"
            )
        if self.z.shape[1] != state.d:
            raise ValueError(
                f"formation dimension {self.z.shape[1]} != state dimension {state.d}"
            )
        if params is not None and params.kernel == KERNEL_SHIFTED:
            if np.any(np.linalg.norm(self.z, axis=1) <= params.delta):
                raise ValueError(
                    "shifted kernel needs every |z_i| > delta, otherwise the "
                    "target pattern itself sits inside the forbidden zone"
                )


def distance_matrix(x: np.ndarray) -> np.ndarray:
    """Symmetric (n, n) matrix of Euclidean distances with zero diagonal."""
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def pairwise_distances(state: SwarmState) -> np.ndarray:
    """r_ij = |x_j - x_i| for all agent pairs of a state."""
    return distance_matrix(state.x)


def kernel_psi(r, params: ModelParams):
    """Alignment weight psi evaluated at distance(s) r.

    Strictly decreasing on its domain.  Scalar in, scalar out; array in,
    array out.  Domain violations raise SingularityError (overlap event),
    never clamp.
    """
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    if params.kernel == KERNEL_REGULAR:
        if np.any(r < 0):
            raise ValueError("distances must be nonnegative")
        w = (1.0 + r) ** -params.alpha
    else:
        shift = params.delta if params.kernel == KERNEL_SHIFTED else 0.0
        bad = r <= shift
        if np.any(bad):
            rbad = float(np.min(np.where(bad, r, np.inf)))
            raise SingularityError(
                f"kernel evaluated at r={rbad:g} (domain r > {shift:g})",
                distance=rbad,
            )
        w = (r - shift) ** -params.alpha
    return float(w) if scalar else w


def control_weight_phi(s, beta: float):
    """Control weight phi(s) = (1 + s)**-beta for squared offsets s >= 0."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("phi takes a squared offset, s >= 0")
    w = (1.0 + s) ** -beta
    return float(w) if s.ndim == 0 else w


def phi_antiderivative(s, beta: float):
    """Antiderivative Phi of the control weight with Phi(0) = 0.

    Phi(s) = ((1+s)**(1-beta) - 1) / (1-beta)  for beta != 1, and ln(1+s) at
    beta = 1.  Increasing and concave.  The generic formula degrades near
    beta = 1, so the logarithmic branch takes over for |beta - 1| < 1e-9;
    expm1/log1p keep the generic branch accurate everywhere else.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("Phi takes a squared offset, s >= 0")
    if abs(beta - 1.0) < _BETA_LOG_BRANCH:
        out = np.log1p(s)
    else:
        out = np.expm1((1.0 - beta) * np.log1p(s)) / (1.0 - beta)
    return float(out) if s.ndim == 0 else out


def phi_antiderivative_sup(beta: float) -> float:
    """Supremum of Phi over [0, inf): 1/(beta-1) for beta > 1, else infinity."""
    if beta > 1.0 + _BETA_LOG_BRANCH:
        return 1.0 / (beta - 1.0)
    return np.inf


def phi_antiderivative_inverse(c, beta: float):
    """Solve Phi(s) = c for s >= 0, in closed form.

    For beta > 1 the image of Phi is [0, 1/(beta-1)); values at or past the
    supremum have no preimage and raise ValueError.
    """
    c = np.asarray(c, dtype=float)
    if np.any(c < 0):
        raise ValueError("Phi is nonnegative, need c >= 0")
    if abs(beta - 1.0) < _BETA_LOG_BRANCH:
        out = np.expm1(c)
    else:
        arg = 1.0 + (1.0 - beta) * c
        if np.any(arg <= 0):
            raise ValueError(
                f"no solution: c >= sup Phi = 1/(beta-1) = {1.0 / (beta - 1.0):g}"
            )
        out = np.expm1(np.log(arg) / (1.0 - beta))
    return float(out) if c.ndim == 0 else out


def formation_residuals(x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Per-link residuals g_i = x_i - x_{i+1} - z_i, shape (n-1, d)."""
    return x[:-1] - x[1:] - z


def control_forces(x: np.ndarray, z: np.ndarray, beta: float) -> np.ndarray:
    """Chain control: each link pulls its two endpoints toward its offset.

    With f_i = phi(|g_i|^2) g_i the signal is u_1 = -f_1, u_n = f_{n-1} and
    u_i = f_{i-1} - f_i in between.  Every f_i enters once with each sign, so
    the total control telescopes to zero.
    """
    g = formation_residuals(x, z)
    w = (1.0 + np.einsum("ij,ij->i", g, g)) ** -beta
    f = w[:, None] * g
    u = np.zeros_like(x)
    u[:-1] -= f
    u[1:] += f
    return u


def control_signal(state: SwarmState, spec: FormationSpec, beta: float) -> np.ndarray:
    """Control vectors u_i for a state under a formation spec."""
    spec.check_against(state)
    return control_forces(state.x, spec.z, beta)


def alignment_forces(x: np.ndarray, v: np.ndarray, params: ModelParams) -> np.ndarray:
    """Velocity-averaging accelerations a_i = (K/n) sum_j psi(r_ij)(v_j - v_i).

    The i = j term is excluded before the kernel is evaluated: its velocity
    factor vanishes identically, and psi(0) does not exist for the singular
    weights.
    """
    n = x.shape[0]
    if params.K == 0.0:
        return np.zeros_like(v)
    r = distance_matrix(x)
    off = ~np.eye(n, dtype=bool)
    w = np.zeros((n, n))
    try:
        w[off] = kernel_psi(r[off], params)
    except SingularityError:
        i, j = _closest_pair(r)
        raise SingularityError(
            f"agents {i} and {j} overlap (r = {r[i, j]:g})",
            pair=(i, j),
            distance=float(r[i, j]),
        ) from None
    return (params.K / n) * (w @ v - w.sum(axis=1)[:, None] * v)


def alignment_accel(state: SwarmState, params: ModelParams) -> np.ndarray:
    return alignment_forces(state.x, state.v, params)


def accel(x: np.ndarray, v: np.ndarray, params: ModelParams, z: np.ndarray) -> np.ndarray:
    """dv/dt: alignment plus gain-weighted chain control."""
    dv = alignment_forces(x, v, params)
    if params.M != 0.0:
        dv += params.M * control_forces(x, z, params.beta)
    return dv


def rhs(state: SwarmState, params: ModelParams, spec: FormationSpec):
    """Time derivative (dx, dv) of the closed-loop system at a state.

    dx = v and dv = alignment + M * control.  Both force terms sum to zero
    over agents, so the mean velocity is a conserved quantity of the flow.
    """
    spec.check_against(state, params)
    return state.v.copy(), accel(state.x, state.v, params, spec.z)


def _closest_pair(r: np.ndarray):
    """Indices (i, j), i < j, of the smallest off-diagonal distance."""
    n = r.shape[0]
    iu = np.triu_indices(n, k=1)
    k = int(np.argmin(r[iu]))
    return int(iu[0][k]), int(iu[1][k])
