"""Power against COP for the three-qubit fridge, local and global dissipation.

Run: python demos/fridge_characteristic.py
"""

from thermal_machines import runners
from thermal_machines.config import load_preset


def describe(name):
    _, rows, s = runners.run_fridge_sweep(load_preset(name), threads=2)
    print(f"{name}: {s['n_cooling']} of {s['n_rows']} points cool, Carnot COP {s['carnot_cop']:.4f}")
    print(f"  J_c turns negative at omega_c/omega_w = {s['window_edge']:.4f}")
    print(f"  COP at max power {s['eps_star']:.4f} ({s['eps_star_over_carnot']:.3f} of Carnot, bound {s['bound_ratio']:.3f})")
    print(f"  normalized power at the ends of the cooling branch: {s['power_at_first_cooling']:.3f}, {s['power_at_last_cooling']:.3f}")
    # coarse text rendering of the characteristic
    for r in rows[:: max(1, len(rows) // 12)]:
        if r["cooling"]:
            bar = "#" * int(40 * r["power_norm"])
            print(f"  cop {r['cop']:7.4f} |{bar}")


if __name__ == "__main__":
    describe("fig5-local")
    describe("fig5-global")
