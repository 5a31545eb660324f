import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binom

from infospec import (
    Codebook,
    InputDistribution,
    UsageError,
    build_feinstein,
    error_probabilities,
)
from infospec.bounds import (
    GAMMA_GRID,
    best_gamma,
    feinstein_bound,
    geometric_weights,
    mixed_capacity_estimate,
    mixture_kernel,
    sandwich,
    sandwich_report,
    strong_converse_diag,
    uniformity_diag,
    verdu_han_bound,
    worst_case_vs_compound,
)
from infospec.reports import Verdict
from infospec.scenarios import bsc_family, example1

from conftest import binary_entropy, bsc, family_of
from test_coding import random_family

LN2 = math.log(2)


def bsc_lower_quantile(q, n, tol):
    """Largest density atom with P(Z < atom) <= tol for BSC(q), uniform input.

    Z = ln 2 + ln(1-q) + (K/n) ln(q/(1-q)) with K ~ Bin(n, q), so the atom of
    K = k has P(Z < z_k) = P(K > k).
    """
    for k in range(n + 1):
        if binom.sf(k, n, q) <= tol + 1e-12:
            return LN2 + math.log(1 - q) + k / n * math.log(q / (1 - q))
    raise AssertionError("unreachable")


def recheck(report):
    for name, v in report.verdicts.items():
        again = Verdict(v.relation, v.lhs, v.rhs, v.slack)
        assert again.holds == v.holds, name


class TestFeinstein:
    def test_identity_hand_value(self, uniform2, identity_family):
        assert feinstein_bound(10, 0.3, 0.1, identity_family, uniform2) == pytest.approx(math.exp(-1), abs=1e-15)

    def test_clamps_to_one(self, uniform2, identity_family):
        assert feinstein_bound(2, 0.7, 0.1, identity_family, uniform2) == 1.0

    def test_unbounded_coherence_is_vacuous(self, uniform2):
        for n in (2, 5, 8):
            assert feinstein_bound(n, 0.0, 0.1, example1("n"), uniform2) == 1.0

    def test_gamma_must_be_positive(self, uniform2, identity_family):
        with pytest.raises(UsageError):
            feinstein_bound(2, 0.1, 0.0, identity_family, uniform2)


class TestVerduHan:
    def test_useless_bsc_hand_case(self):
        fam = family_of(bsc(0.5, "h"))
        cb = Codebook(1, [0, 1], {"h": np.array([0, 1])}, 0.1, 2 * math.exp(0.1), 1.0)
        assert verdu_han_bound(cb, 0.1, fam) == pytest.approx(1 - math.exp(-0.1), abs=1e-15)
        assert error_probabilities(cb, fam).compound_avg == 0.5

    def test_good_identity_code_is_zero(self, uniform2, identity_family):
        cb = build_feinstein(4, 4, 0.1, identity_family, uniform2)
        # every code density equals the rate (ln 4)/4, so the lower tail below r - gamma is empty
        assert verdu_han_bound(cb, 0.05, identity_family) == 0.0

    def test_large_gamma_clamps_to_zero(self, uniform2):
        fam = family_of(bsc(0.3, "a"))
        cb = build_feinstein(4, 2, 0.1, fam, uniform2)
        assert verdu_han_bound(cb, 50.0, fam) == 0.0


class TestBestGamma:
    def test_identity_feinstein(self, uniform2, identity_family):
        g, v = best_gamma("feinstein", [0.1, 0.2, 0.3], n=10, r_n=0.3, family=identity_family, input=uniform2)
        assert g == 0.3 and v == pytest.approx(math.exp(-3), abs=1e-15)

    def test_single_point_and_ties(self, uniform2, identity_family):
        ctx = dict(n=2, r_n=0.7, family=identity_family, input=uniform2)
        assert best_gamma("feinstein", [0.2], **ctx)[0] == 0.2
        # every grid point clamps to 1, so the smallest gamma wins
        assert best_gamma("feinstein", [0.3, 0.1, 0.2], **ctx) == (0.1, 1.0)

    def test_verdu_han_maximizes(self):
        fam = family_of(bsc(0.5, "h"))
        cb = Codebook(1, [0, 1], {"h": np.array([0, 1])}, 0.1, 2 * math.exp(0.1), 1.0)
        g, v = best_gamma("verdu-han", [0.1, 0.3, 0.6], codebook=cb, family=fam)
        assert g == 0.6 and v == pytest.approx(1 - math.exp(-0.6), abs=1e-15)

    def test_rejects_bad_input(self, uniform2, identity_family):
        with pytest.raises(UsageError):
            best_gamma("feinstein", [], n=2, r_n=0.1, family=identity_family, input=uniform2)
        with pytest.raises(UsageError):
            best_gamma("other", [0.1])


class TestSandwich:
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 7), n_states=st.integers(1, 3),
           m=st.integers(1, 16), gamma=st.sampled_from(GAMMA_GRID))
    @settings(max_examples=25, deadline=None)
    def test_invariants(self, seed, n, n_states, m, gamma):
        fam = random_family(np.random.default_rng(seed), n_states)
        inp = InputDistribution.uniform(2)
        cb = build_feinstein(n, min(m, 2**n), gamma, fam, inp)
        reports = sandwich(cb, fam, GAMMA_GRID, inp)
        for r in reports:
            assert 0.0 <= r.verdu_han_lower <= 1.0 and 0.0 <= r.feinstein_upper <= 1.0
            assert all(v.holds for v in r.verdicts().values())
            assert ("max_le_lambda" in r.verdicts()) == (r.gamma == gamma and cb.guaranteed)
        # the builder witnesses the existential bound at its own gamma and input
        measured = error_probabilities(cb, fam)
        assert measured.compound_max <= feinstein_bound(n, cb.rate, gamma, fam, inp) + 1e-12

    def test_report_dict(self, uniform2):
        fam = family_of(bsc(0.05, "a"), bsc(0.1, "b"))
        cb = build_feinstein(8, 4, 0.1, fam, uniform2)
        rep = sandwich_report(cb, fam, [0.05, 0.1, 0.2])
        assert rep["all_hold"] and len(rep["reports"]) == 3
        own = [r for r in rep["reports"] if r["lambda_n"] is not None]
        assert [r["gamma"] for r in own] == [0.1]


class TestStrongConverse:
    def test_single_bsc(self, uniform2):
        rep = strong_converse_diag(bsc_family([0.11]), [uniform2], [4, 8, 12], 0.45)
        expect = bsc_lower_quantile(0.11, 12, 0.45)
        assert rep.scalars["max_inf_compound"] == pytest.approx(expect, abs=1e-12)
        assert rep.verdicts["consistent_with_strong_converse"].holds
        recheck(rep)

    def test_two_bsc_worst_state(self, uniform2):
        ref = LN2 - binary_entropy(0.2)
        rep = strong_converse_diag(bsc_family([0.05, 0.2]), [uniform2], [8, 10, 12], 0.45,
                                   reference_rate=ref, delta=0.1)
        assert rep.scalars["max_inf_compound"] == pytest.approx(bsc_lower_quantile(0.2, 12, 0.45), abs=1e-12)
        assert rep.verdicts["consistent_with_strong_converse"].holds
        assert set(rep.labels["worst_state_sequence"].values()) == {"q=0.2"}

    def test_deterministic_atoms(self, uniform2):
        # single-atom states: noiseless (atom ln 2) and useless (atom 0)
        fam = family_of(bsc(0.0, "id"), bsc(0.5, "h"))
        rep = strong_converse_diag(fam, [uniform2], [2, 3], 0.1)
        assert rep.scalars["max_inf_compound"] == rep.scalars["max_check_rate"] == 0.0
        assert rep.verdicts["consistent_with_strong_converse"].holds

    def test_empty_inputs(self):
        with pytest.raises(UsageError):
            strong_converse_diag(bsc_family([0.1]), [], [2, 3])


class TestUniformity:
    def test_finite_family(self, uniform2):
        rep = uniformity_diag(bsc_family([0.05, 0.2]), uniform2, [4, 8, 12], [0.4], tol=0.05)
        sups = [v for _, v in rep.ladder("sup_f[gamma=0.4]")]
        assert sups == sorted(sups, reverse=True) and sups[-1] < sups[0]
        assert rep.verdicts["uniformity_consistent[gamma=0.4]"].holds
        recheck(rep)

    def test_unbounded_coherence(self, uniform2):
        rep = uniformity_diag(example1("n"), uniform2, [4, 6, 8], [0.1, 0.2])
        assert rep.scalars["reference_rate"] == pytest.approx(LN2, abs=1e-12)
        for g in (0.1, 0.2):
            assert [v for _, v in rep.ladder(f"sup_f[gamma={g}]")] == [pytest.approx(1.0, abs=1e-12)] * 3
            assert not rep.verdicts[f"uniformity_consistent[gamma={g}]"].holds

    def test_single_state(self, uniform2, identity_family):
        rep = uniformity_diag(identity_family, uniform2, [2, 4], [0.1])
        assert rep.verdicts["uniformity_consistent[gamma=0.1]"].holds
        assert rep.labels["delta_m[gamma=0.1]"] == [0.0, 0.0]


class TestWorstCase:
    def test_two_bsc(self, uniform2):
        rep = worst_case_vs_compound(bsc_family([0.05, 0.2]), [uniform2], [4, 8, 12], 0.05)
        expect = bsc_lower_quantile(0.2, 12, 0.05)
        assert rep.scalars["C_w"] == pytest.approx(expect, abs=1e-12)
        assert rep.scalars["C_c"] == pytest.approx(expect, abs=1e-12)
        assert rep.scalars["gap"] == 0.0 and rep.labels["saddle_point"]
        recheck(rep)

    def test_single_state(self, uniform2):
        rep = worst_case_vs_compound(bsc_family([0.1]), [uniform2, InputDistribution.iid([0.3, 0.7])], [3, 6])
        assert rep.scalars["C_w"] == rep.scalars["C_c"]

    def test_unbounded_coherence_gap(self, uniform2):
        rep = worst_case_vs_compound(example1("n"), [uniform2], [4, 6, 8], 1e-9)
        assert rep.scalars["C_w"] == pytest.approx(LN2, abs=1e-12)
        assert rep.scalars["C_c"] == 0.0
        assert rep.scalars["gap"] == pytest.approx(LN2, abs=1e-12)
        assert rep.verdicts["C_c_le_C_w"].holds


class TestMixed:
    def test_two_bsc(self, uniform2):
        rep = mixed_capacity_estimate(bsc_family([0.05, 0.2]), [0.5, 0.5], [uniform2], [4, 8, 12], 0.3)
        expect = bsc_lower_quantile(0.2, 12, 0.3)
        assert rep.scalars["C_c"] == pytest.approx(expect, abs=1e-12)
        assert rep.scalars["C_mix_formula"] == rep.scalars["C_c"]
        assert rep.verdicts["C_c_le_C_mix"].holds and rep.verdicts["C_mix_near_C_c"].holds
        recheck(rep)

    def test_single_state_weight_one(self, uniform2):
        rep = mixed_capacity_estimate(bsc_family([0.1]), [1.0], [uniform2], [3, 6], 0.2)
        # enumeration and per-symbol convolution round differently
        assert rep.scalars["C_mix"] == pytest.approx(rep.scalars["C_c"], abs=1e-12)
        assert rep.scalars["C_c"] == rep.scalars["C_mix_formula"]
        assert rep.scalars["weight_offset"] == 0.0

    def test_unbounded_coherence_strict(self, uniform2):
        rep = mixed_capacity_estimate(example1("n"), geometric_weights(0.5), [uniform2], [4, 6, 8], 0.3)
        assert all(v > 0 for _, v in rep.ladder("C_mix[0]"))
        assert all(v == 0.0 for _, v in rep.ladder("C_c[0]"))
        assert rep.scalars["C_mix_formula"] == pytest.approx(LN2, abs=1e-12)

    def test_mixture_kernel_rows(self):
        k = mixture_kernel(bsc_family([0.0, 0.5]), [0.25, 0.75], 2)
        np.testing.assert_allclose(k.sum(axis=1), 1.0, atol=1e-15)
        assert k[0, 0] == pytest.approx(0.25 + 0.75 * 0.25, abs=1e-15)

    def test_weight_mismatch(self, uniform2):
        with pytest.raises(UsageError):
            mixed_capacity_estimate(bsc_family([0.05, 0.2]), [1.0], [uniform2], [2, 3])
        with pytest.raises(UsageError):
            mixed_capacity_estimate(bsc_family([0.05, 0.2]), [0.7, 0.7], [uniform2], [2, 3])

    def test_geometric_weights(self):
        w = geometric_weights(0.5)(3, [None] * 3)
        np.testing.assert_allclose(w, [0.5, 0.25, 0.25])
        with pytest.raises(UsageError):
            geometric_weights(1.0)
