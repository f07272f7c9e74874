"""A symmetry trap: four agents on a square told to swap corners diagonally.

Starting from rest, the initial accelerations are mirror-symmetric and the
distances r_12, r_34 stay equal for all time.  The only way toward the
pattern is a pairwise collision at two side midpoints, which the collision
monitor duly reports.  Relabeling the starting corners of agents 3 and 4
breaks the symmetry and the same controller reaches the pattern easily.
"""

import numpy as np

from flockform import degenerate_square_scenario

for swapped in (False, True):
    spec = degenerate_square_scenario(swapped)
    traj = spec.run()
    r12 = np.array([np.linalg.norm(s.x[0] - s.x[1]) for s in traj.states])
    r34 = np.array([np.linalg.norm(s.x[2] - s.x[3]) for s in traj.states])
    rec = traj.final_record
    label = "swapped corners" if swapped else "plain labeling "
    print(f"{label}: {traj.status} at t = {traj.final_state.t:.2f}")
    print(f"  closest approach        : {min(r.min_dist for r in traj.records):.2e}")
    print(f"  max |r12 - r34|         : {np.abs(r12 - r34).max():.2e}")
    print(f"  terminal pattern error  : {rec.pattern_error:.2e}")
    print(f"  terminal velocity spread: {rec.v_diameter:.2e}")
    for e in traj.events:
        print(f"  event: {e.kind} at t = {e.t:.3f}, agents {e.agents}, "
              f"distance {e.min_distance:.2e}")
    print()
