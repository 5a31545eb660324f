"""Coherence-time family: per-state rates versus the compound rate.

Each state ``s`` is useless (BSC(1/2)) for blocks no longer than ``s`` and
noiseless afterwards.  With a fixed state set the compound rate recovers
ln 2 once ``n`` exceeds the largest coherence time; when the state set grows
with ``n`` there is always a useless state and the compound rate stays at 0,
although every individual state eventually carries ln 2.

Run with ``python3 demos/coherence_time.py``.
"""

import math

from infospec import InputDistribution, example1, rate_estimate
from infospec.spectrum import per_state_estimates

LADDER = [2, 4, 6, 8, 12]
UNIFORM = InputDistribution.uniform(2)


def show(label, est):
    rungs = ", ".join(f"n={n}: {v:.4f}" for n, v in est.ladder)
    print(f"{label:<28} {rungs}  (trend {est.trend})")


def main():
    print(f"ln 2 = {math.log(2):.4f} nats\n")
    show("bounded S=4, compound", rate_estimate("inf-compound", example1(4), UNIFORM, LADDER))
    growing = example1("n")
    show("growing s<=n, compound", rate_estimate("inf-compound", growing, UNIFORM, LADDER))
    print("\nper-state rates in the growing family (states present at n=2):")
    for sid, est in per_state_estimates(growing, UNIFORM, LADDER).items():
        show(f"  state {sid}", est)


if __name__ == "__main__":
    main()
