"""The planar axially-symmetric family of the equal-mass problem.

With equal primaries the system gains a reflection symmetry about the xi2
axis, so planar orbits can start perpendicular on that axis and close after
a quarter period on the syzygy axis.  This continues the classical
family-m retrograde orbit from its circular guess.

Run:  python3 demos/planar_family_m.py
"""

import numpy as np

from dsymorb import solve_axial_case, trace_states, write_trace

seed = (0.0, 4.0, 0.0, 4.5, 0.0, 0.0)   # (xi1, xi2, xi3, v1, v2, v3)
t0 = 5.585                               # approximate full period

record = solve_axial_case(0.5, seed, t0)
print(f"continued from y = 4, xdot = 4.5:")
print(f"  y    = {record.x1:.14f}")
print(f"  xdot = {record.x2:.14f}")
print(f"  T    = {4 * record.t_quarter:.13f}")
print(f"  residual {record.residual:.1e} in {record.iters} iterations")

# one full revolution, sampled densely; the last sample closes the loop
times, states = trace_states(record, 721)
gap = np.max(np.abs(states[-1] - states[0]))
print(f"  closure over one period: {gap:.2e}")

write_trace(record, 721, "family_m_trace.txt")
print("trace written to family_m_trace.txt  (t xi1 xi2 xi3 v1 v2 v3)")
