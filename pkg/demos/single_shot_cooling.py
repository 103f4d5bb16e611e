"""Cold-qubit temperature after switching on a weakly coupled fridge.

Run: python demos/single_shot_cooling.py
"""

import copy

from thermal_machines import runners
from thermal_machines.config import load_preset, validate


def transient(coherence):
    data = copy.deepcopy(load_preset("fig7").data)
    data["run"]["coherence"] = coherence
    return runners.run_transient(validate(data))


if __name__ == "__main__":
    for c in (0.0, 0.25, 0.5):
        _, rows, s = transient(c)
        fm = s["first_minimum"]
        print(
            f"coherence {c:4.2f}: steady T_eff {s['T_eff_steady']:.4f}, "
            f"first minimum {fm['T_eff']:.4f} at t = {fm['t']:g}, undershoot {s['undershoot']:.3f}"
        )
