"""Initial conditions and formation targets for the benchmark experiments.

Five named setups: a bird-like planar pattern, a circle with one agent at the
center, a one-dimensional crossover that forces agents through each other, a
degenerate square whose symmetry drives pairwise near-collision, and a
three-dimensional five-ring display.  Random clouds are seeded and resampled
until no two agents start closer than ``min_separation``, so every scenario
is bit-reproducible from its seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .integrate import IntegratorConfig, Trajectory, simulate
from .model import FormationSpec, ModelParams, SwarmState

DEFAULT_SEED = 7
# Bird ships with a cloud whose largest chain residual is also its all-time
# maximum, so the energy-budget residual bound is demonstrated sharply.
BIRD_SEED = 3
MIN_SEPARATION = 0.1

# Five-ring display geometry: unit circles, three up, two down, interlocking.
RING_RADIUS = 1.0
RING_CENTERS = (
    (-2.2, 0.45),
    (-1.1, -0.45),
    (0.0, 0.45),
    (1.1, -0.45),
    (2.2, 0.45),
)


@dataclass
class ScenarioSpec:
    """A named, fully resolved experiment: initial state, target, gains, stepper."""

    name: str
    initial: SwarmState
    formation: FormationSpec
    params: ModelParams
    cfg: IntegratorConfig
    seed: int | None = None

    def run(self) -> Trajectory:
        return simulate(self.initial, self.params, self.formation, self.cfg)


def formation_from_waypoints(points) -> FormationSpec:
    """Chain offsets z_i = p_i - p_{i+1} steering agent i+1 to follow agent i.

    Reconstructing positions from any anchor recovers the waypoint shape
    exactly, up to translation.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if points.shape[0] < 2:
        raise ValueError("need at least two waypoints")
    return FormationSpec(points[:-1] - points[1:])


def reconstruct_waypoints(spec: FormationSpec, anchor=None) -> np.ndarray:
    """Positions realizing a formation exactly, starting from ``anchor``."""
    if anchor is None:
        anchor = np.zeros(spec.z.shape[1])
    pts = np.vstack([np.zeros_like(spec.z[:1]), np.cumsum(-spec.z, axis=0)])
    return pts + np.asarray(anchor, dtype=float)


def _cloud(rng, n, d, half_width, min_sep=MIN_SEPARATION):
    """Uniform points in a centered cube, resampled to keep a minimum spacing."""
    pts = np.empty((n, d))
    for i in range(n):
        for _ in range(10_000):
            cand = rng.uniform(-half_width, half_width, size=d)
            if i == 0 or float(np.min(np.linalg.norm(pts[:i] - cand, axis=1))) > min_sep:
                pts[i] = cand
                break
        else:
            raise RuntimeError("could not place agents with the requested spacing")
    return pts


def _zero_mean(v):
    v = v - v.mean(axis=0)
    return v - v.mean(axis=0)  # second pass grinds the mean down to rounding


def bird_offsets(n: int, theta: float) -> np.ndarray:
    """Chain offsets for the bird pattern given the travel angle theta.

    z_i = -2 (cos(theta - pi/9), sin(theta - pi/9)) for i <= floor(n/2) and
    +2 (...) beyond, so every offset has length 2 and the sign flips after
    the middle agent.
    """
    e = np.array([math.cos(theta - math.pi / 9.0), math.sin(theta - math.pi / 9.0)])
    z = np.empty((n - 1, 2))
    half = n // 2
    z[:half] = -2.0 * e
    z[half:] = 2.0 * e
    return z


def bird_scenario(n: int = 10, seed: int = BIRD_SEED) -> ScenarioSpec:
    """Planar flock steered into a bird-like chain pattern.

    Gains K=10, M=50 with exponents alpha=1.1, beta=0.5 on the singular
    kernel.  The offsets follow bird_offsets with theta taken from the
    (seeded, nonzero, conserved) mean initial velocity.
    """
    if n < 3:
        raise ValueError("bird pattern needs at least three agents")
    rng = np.random.default_rng(seed)
    x = _cloud(rng, n, 2, half_width=2.0)
    v = np.array([1.0, 1.0]) + rng.uniform(-0.5, 0.5, size=(n, 2))
    v_c = v.mean(axis=0)
    z = bird_offsets(n, math.atan2(v_c[1], v_c[0]))
    return ScenarioSpec(
        name="bird",
        initial=SwarmState(0.0, x=x, v=v),
        formation=FormationSpec(z),
        params=ModelParams(K=10.0, M=50.0, alpha=1.1, beta=0.5),
        cfg=IntegratorConfig(t_end=20.0),
        seed=seed,
    )


def circle_waypoints(n: int, radius: float) -> np.ndarray:
    """n-1 rim points at angles 2 pi j / n plus the center, zero-mean."""
    angles = 2.0 * math.pi * np.arange(1, n) / n
    pts = np.zeros((n, 2))
    pts[:-1, 0] = radius * np.cos(angles)
    pts[:-1, 1] = radius * np.sin(angles)
    return pts - pts.mean(axis=0)


def circle_scenario(n: int = 50, radius: float = 5.0, seed: int = DEFAULT_SEED) -> ScenarioSpec:
    """Circular pattern with a single agent at the center, same gains as bird."""
    if n < 3:
        raise ValueError("circle pattern needs at least three agents")
    rng = np.random.default_rng(seed)
    x = _cloud(rng, n, 2, half_width=radius)
    v = rng.uniform(-1.0, 1.0, size=(n, 2))
    return ScenarioSpec(
        name="circle",
        initial=SwarmState(0.0, x=x, v=v),
        formation=formation_from_waypoints(circle_waypoints(n, radius)),
        params=ModelParams(K=10.0, M=50.0, alpha=1.1, beta=0.5),
        cfg=IntegratorConfig(t_end=20.0),
        seed=seed,
    )


def line_crossover_scenario(kernel: str = "singular", alpha: float = 1.5) -> ScenarioSpec:
    """Four agents on a line whose target ordering forces a crossover.

    The offsets z_i = -2 demand that the trailing agent ends up in front, so
    the pattern cannot form without the agents passing through each other.
    Only the sub-critical kernels permit that; the singular kernel with
    alpha = 1.5 jams instead, with the agents collapsing together but never
    colliding.
    """
    if kernel not in ("singular", "regular"):
        raise ValueError("crossover considers the singular and regular kernels only")
    if alpha not in (0.5, 1.5):
        raise ValueError("crossover uses alpha = 0.5 or 1.5")
    x = np.array([0.5, 1.0, 1.5, -1.0])
    v = np.array([-0.25, 0.5, -0.75, 1.0])
    z = np.full((3, 1), -2.0)
    return ScenarioSpec(
        name="line-crossover",
        initial=SwarmState(0.0, x=x, v=v),
        formation=FormationSpec(z),
        params=ModelParams(K=10.0, M=50.0, alpha=alpha, beta=0.5, kernel=kernel),
        cfg=IntegratorConfig(t_end=4.0),
        seed=None,
    )


def degenerate_square_scenario(swapped: bool = False) -> ScenarioSpec:
    """Four resting agents on a square asked to swap corners diagonally.

    In the plain labeling the initial accelerations are mirror-symmetric, the
    distances r_12 and r_34 stay equal forever, and the agents head into
    pairwise collision at two side midpoints.  Swapping the starting corners
    of agents 3 and 4 breaks the trap and the pattern forms.  The collision
    threshold is set to 5e-4 so the collapsing variant terminates once the
    near-collision is established instead of grinding against the
    singularity.
    """
    x = np.array([(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0), (0.0, -1.0)])
    if swapped:
        x = x[[0, 1, 3, 2]]
    z = np.array([(1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)])
    return ScenarioSpec(
        name="degenerate-square",
        initial=SwarmState(0.0, x=x, v=np.zeros((4, 2))),
        formation=FormationSpec(z),
        params=ModelParams(K=60.0, M=50.0, alpha=1.1, beta=0.5),
        cfg=IntegratorConfig(t_end=200.0, collision_eps=5e-4),
        seed=None,
    )


def ring_waypoints(n: int) -> np.ndarray:
    """n points tracing five interlocking circles in the plane x3 = 0.

    Rings are visited left to right, each sampled counterclockwise from
    angle zero, with the chain jumping to the next ring between samples.
    """
    if n < 5:
        raise ValueError("need at least one point per ring")
    base, extra = divmod(n, 5)
    counts = [base + (1 if k < extra else 0) for k in range(5)]
    order = np.argsort([c[0] for c in RING_CENTERS])
    pts = []
    for k in order:
        cx, cy = RING_CENTERS[k]
        m = counts[k]
        angles = 2.0 * math.pi * np.arange(m) / m
        for a in angles:
            pts.append((cx + RING_RADIUS * math.cos(a), cy + RING_RADIUS * math.sin(a), 0.0))
    pts = np.array(pts)
    mean = pts.mean(axis=0)
    return pts - [mean[0], mean[1], 0.0]  # keep the pattern in the x3 = 0 plane


def rings_scenario(n: int = 50, seed: int = DEFAULT_SEED) -> ScenarioSpec:
    """Spatial swarm steered onto the five-ring display, bird gains, v_c(0) = 0."""
    rng = np.random.default_rng(seed)
    x = _cloud(rng, n, 3, half_width=3.0)
    x = x - x.mean(axis=0)  # conserved centroid pins the final pattern on the rings
    v = _zero_mean(rng.uniform(-1.0, 1.0, size=(n, 3)))
    return ScenarioSpec(
        name="rings",
        initial=SwarmState(0.0, x=x, v=v),
        formation=formation_from_waypoints(ring_waypoints(n)),
        params=ModelParams(K=10.0, M=50.0, alpha=1.1, beta=0.5),
        cfg=IntegratorConfig(t_end=200.0),
        seed=seed,
    )


# scenario name -> (builder, accepted keyword overrides)
SCENARIO_BUILDERS = {
    "bird": (bird_scenario, ("n", "seed")),
    "circle": (circle_scenario, ("n", "radius", "seed")),
    "line-crossover": (line_crossover_scenario, ("kernel", "alpha")),
    "degenerate-square": (degenerate_square_scenario, ("swapped",)),
    "rings": (rings_scenario, ("n", "seed")),
}


def scenario_names():
    return sorted(SCENARIO_BUILDERS)


def build_scenario(name: str, **kwargs) -> ScenarioSpec:
    """Construct a named scenario, validating the keyword overrides."""
    if name not in SCENARIO_BUILDERS:
        raise ValueError(f"unknown scenario {name!r}; choose from {scenario_names()}")
    builder, allowed = SCENARIO_BUILDERS[name]
    bad = set(kwargs) - set(allowed)
    if bad:
        raise ValueError(
            f"scenario {name!r} does not accept {sorted(bad)}; allowed: {sorted(allowed)}"
        )
    return builder(**kwargs)
