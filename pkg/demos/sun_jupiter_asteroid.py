"""Doubly-symmetric asteroid orbits in the Sun-Jupiter configuration.

The frame is centred on the Sun (the heavy primary), Jupiter orbits at unit
distance.  Seeds close to the Sun continue readily because the perturbing
mass is below 1e-3; the resulting orbits are nearly-circular multi-loop
tours with stability indices a hair above 6.

Run:  python3 demos/sun_jupiter_asteroid.py
"""

from dsymorb import solve_case, spec_from_cos2i

MU_SUN = 1.0 - 0.00095388       # central mass in the m2-centred frame

for (k, j, case) in [(0, 1, "1+--"), (0, 2, "1+--"), (0, 3, "1+--"),
                     (0, 3, "1+++")]:
    spec = spec_from_cos2i("hill", k, j, case, mu=MU_SUN, cos2i=0.5)
    rec = solve_case(spec, t_max_factor=8.0)
    if rec.converged:
        print(f"(k={k}, j={j}) {case}: q1={rec.x1:+.12f} "
              f"T/4={rec.t_quarter:.10f} rho={rec.rho:.5f} "
              f"{rec.classification} (res {rec.residual:.0e})")
    else:
        print(f"(k={k}, j={j}) {case}: {rec.classification}")
