"""Additive prefix noise: channel rate equals ln 2 minus a noise entropy rate.

Noise is uniform on the first ``s`` symbols and zero afterwards, so under a
uniform input the information density is ``ln 2`` minus the noise entropy
density.  The compound rate is ln 2 minus the upper quantile of the noise
entropy spectra, which this script checks at every rung.

Run with ``python3 demos/additive_noise.py``.
"""

import math

from infospec import InputDistribution, example2, noise_distribution, rate_estimate
from infospec.spectrum import entropy_spectrum, upper_quantile

UNIFORM = InputDistribution.uniform(2)


def main():
    for label, fam in (("prefixes s in {0, 1, 2}", example2(2)), ("prefixes up to n", example2("n"))):
        est = rate_estimate("inf-compound", fam, UNIFORM, [2, 4, 8, 12])
        print(label)
        for n, v in est.ladder:
            ent = [entropy_spectrum(noise_distribution(s, n), n, 2) for s in fam.states_at(n)]
            h = upper_quantile(ent, 1e-9, "max")
            print(f"  n={n:>2}: rate {v:.4f}   ln2 - H_top {math.log(2) - h:.4f}")


if __name__ == "__main__":
    main()
