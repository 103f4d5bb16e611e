"""Load of an absorption engine as a random walk, and the same walk used as a clock.

Run: python demos/engine_and_clock.py
"""

import math

from thermal_machines import stochastic as st

if __name__ == "__main__":
    wc, wh, tc, th = 0.5, 1.0, 1.0, 10.0
    p = st.walk_params_from_machine(wc, wh, tc, th, 1.0)
    bvw = st.beta_v_omega_w(wc, wh, tc, th)
    r = st.engine_energy_ratio(wc, wh)
    print(f"engine: up {p.gamma_up:.4f}, down {p.gamma_down:.4f}, beta_v omega_w {bvw:.3f}, R {r:.3f}")
    for n in (30, 300, 3000):
        print(f"  eta_{n} formula {st.n_cycle_efficiency(n, bvw, r):.4f}")
    print(f"  eta_300 Monte Carlo {st.ergotropy_rate_mc(p, 300, seed=1, n_paths=50_000) * r:.4f}")

    print("clock with rates (2, 1):")
    for d in (5, 10, 30, 60):
        q = st.WalkParams(2.0, 1.0, d)
        mean, var = st.first_passage_moments(q)
        rec = st.simulate_clock(q, 10_000, seed=d)
        ds = (d - 1) * q.bias
        print(
            f"  d={d:3d}: t_tick exact {mean:8.3f} MC {rec.t_tick:8.3f} d/(up-down) {d / q.drift:6.1f}; "
            f"N exact {mean**2 / var:6.3f} MC {rec.accuracy:6.3f} formula {st.clock_accuracy_formula(d, ds):6.3f}"
            f" (limit dS/2 = {ds / 2:.2f})"
        )
    print(f"  bias per step ln 2 = {math.log(2):.4f}")
