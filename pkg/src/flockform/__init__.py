"""Formation-controlled flocking of singularly interacting agent swarms.

A chain of offset targets steers a velocity-alignment swarm into a
prescribed spatial pattern while the singular interaction weight keeps the
agents from colliding.  The package integrates the closed-loop dynamics,
monitors collisions and energy decay, and evaluates the analytical
conditions that certify flocking and pattern formation.
"""

from .diagnostics import (
    CertificateReport,
    DiagnosticsRecord,
    certify,
    chain_young_delta,
    check_corollary,
    check_flocking_hypothesis,
    compute_record,
    control_potential,
    dissipation,
    distance_bracket,
    initial_energy,
    kinetic_energy,
    pattern_residual,
    solve_dM,
    velocity_budget,
)
from .integrate import (
    Event,
    IntegratorConfig,
    NumericalBlowUpError,
    Trajectory,
    min_pairwise_distance,
    simulate,
    step_controller,
)
from .model import (
    FormationSpec,
    ModelParams,
    SingularityError,
    SwarmState,
    alignment_accel,
    control_signal,
    control_weight_phi,
    kernel_psi,
    pairwise_distances,
    phi_antiderivative,
    phi_antiderivative_inverse,
    rhs,
)
from .runio import (
    ConfigError,
    RunConfig,
    parse_config,
    resolve_scenario,
    write_trajectory,
)
from .scenarios import (
    ScenarioSpec,
    bird_scenario,
    build_scenario,
    circle_scenario,
    degenerate_square_scenario,
    formation_from_waypoints,
    line_crossover_scenario,
    rings_scenario,
    scenario_names,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
