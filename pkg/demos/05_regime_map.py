# Where the three regimes live.
#
# Fix the no-error probability f00 and draw the remaining 15 channel weights
# uniformly at random.  Classify each channel by its asymptotics from a
# Werner-0.85 probe: high-noise (no purification), intermediate (purifies but
# flags stay partially ignorant), security (purifies and the flags learn
# everything).  The security fraction switches on as f00 grows; the
# intermediate sliver is tiny.

import numpy as np

from eppsim import Regime, regime_scan

grid = np.linspace(0.55, 1.0, 19)
samples = 60
print(f"{samples} random channels per grid point\n")
print("  f00    high-noise  intermediate  security")
rows = []
for f00 in grid:
    freq = regime_scan(float(f00), samples=samples, seed=2718)
    rows.append(freq)
    print(
        f"  {f00:.3f}   {freq[Regime.HIGH_NOISE]:>8.2f}  {freq[Regime.INTERMEDIATE]:>11.2f}"
        f"  {freq[Regime.SECURITY]:>9.2f}"
    )

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for regime in Regime:
        ax.plot(grid, [r[regime] for r in rows], marker="o", ms=3, label=regime.value)
    ax.set(xlabel="f00", ylabel="relative frequency", title="regimes of random channels")
    ax.legend()
    fig.tight_layout()
    fig.savefig("regime_map.png", dpi=150)
    print("\nwrote regime_map.png")
except ImportError:
    pass
