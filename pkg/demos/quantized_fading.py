"""Quantized fading states and the uniformity diagnostic.

States are ``y = h x + sigma * noise`` with the output cut into ``L`` bins.
The script prints per-state single-letter informations, the compound rate
next to the weakest state's rate, and the uniform-convergence diagnostic.

Run with ``python3 demos/quantized_fading.py``.
"""

import numpy as np

from infospec import InputDistribution, example3_quantized, rate_estimate
from infospec.bounds import uniformity_diag
from infospec.spectrum import mutual_information

UNIFORM = InputDistribution.uniform(2)


def main():
    fam = example3_quantized(h_set=(0.5, 1.0), sigma_set=(0.5, 1.0), L=8)
    print("single-letter I(X;Y) per state:")
    for st in fam.states:
        print(f"  {st.id:<16} {mutual_information(np.array([0.5, 0.5]), np.array(st.params['matrix'])):.4f}")
    ladder, tol = [2, 4, 6], 0.3
    comp = rate_estimate("inf-compound", fam, UNIFORM, ladder, tol)
    weak = rate_estimate("inf-per-state", fam, UNIFORM, ladder, tol, state_id="h=0.5,sigma=1")
    print(f"\ncompound rate at tol {tol}:     {comp.values()}")
    print(f"weakest state (h=0.5, sigma=1): {weak.values()}")
    rep = uniformity_diag(fam, UNIFORM, ladder, [0.2, 0.4], tol=0.05)
    print(f"\nuniformity diagnostic, reference rate {rep.scalars['reference_rate']:.4f}:")
    for g in (0.2, 0.4):
        sups = [round(v, 4) for _, v in rep.ladder(f"sup_f[gamma={g}]")]
        print(f"  gamma={g}: sup_s f_n = {sups}, consistent: {rep.verdicts[f'uniformity_consistent[gamma={g}]'].holds}")


if __name__ == "__main__":
    main()
