import math

import numpy as np
import pytest

from infospec import (
    ConfigError,
    InputDistribution,
    ResourceCapError,
    avc_demo,
    block_kernel,
    example1,
    example2,
    example3_quantized,
    example4,
    noise_distribution,
    rate_estimate,
    spectrum_exact,
    validate,
)
from infospec.scenarios import build_scenario, list_scenarios
from infospec.spectrum import (
    atom_spacing,
    entropy_spectrum,
    family_spectra,
    lower_quantile,
    mutual_information,
    per_state_estimates,
    upper_quantile,
)

from conftest import binary_entropy
from test_bounds import bsc_lower_quantile

LN2 = math.log(2)
U = InputDistribution.uniform(2)


@pytest.mark.parametrize("name", sorted(list_scenarios()))
def test_every_scenario_validates(name):
    fam = build_scenario(name)
    assert validate(fam, [1, 2, 3]).passed


class TestExample1:
    def test_bounded_ladder(self):
        est = rate_estimate("inf-compound", example1(4), U, [2, 4, 6, 8, 12])
        assert est.values() == [0.0, 0.0, pytest.approx(LN2, abs=1e-12), pytest.approx(LN2, abs=1e-12),
                                pytest.approx(LN2, abs=1e-12)]

    def test_unbounded_ladder(self):
        est = rate_estimate("inf-compound", example1("n"), U, [2, 4, 6, 8, 12])
        assert est.values() == [0.0] * 5

    def test_unbounded_per_state_and_compound(self):
        # at n > s the state is BSC(q2); the state s = n is BSC(q1) at every n
        fam = example1("n", q1=0.25, q2=0.0)
        ladder = [3, 6, 9]
        comp = rate_estimate("inf-compound", fam, U, ladder, 0.2)
        assert comp.value == pytest.approx(bsc_lower_quantile(0.25, 9, 0.2), abs=1e-12)
        for sid, est in per_state_estimates(fam, U, ladder, 0.2).items():
            assert est.value == pytest.approx(LN2, abs=1e-12), sid

    def test_equal_crossovers(self):
        fam = example1(3, q1=0.1, q2=0.1)
        comp = rate_estimate("inf-compound", fam, U, [2, 4], 0.1).value
        per = rate_estimate("inf-per-state", fam, U, [2, 4], 0.1, state_id="s=2").value
        assert comp == per

    def test_bad_crossover(self):
        with pytest.raises(ConfigError):
            example1(4, q1=0.7)


class TestExample2:
    @pytest.mark.parametrize("rule", [3, [0, 2, 5], "n", {"slope": 1, "offset": -2}])
    def test_capacity_is_ln2_minus_noise_entropy_quantile(self, rule):
        fam = example2(rule)
        tol = 1e-9
        for n in (4, 6, 8):
            states = fam.states_at(n)
            info = family_spectra(fam, U, n)
            ent = [entropy_spectrum(noise_distribution(s, n), n, 2) for s in states]
            assert lower_quantile(info, tol) == pytest.approx(LN2 - upper_quantile(ent, tol, "max"), abs=1e-9)

    def test_full_noise_gives_zero(self):
        fam = example2("n")
        est = rate_estimate("inf-compound", fam, U, [2, 4, 6])
        assert est.values() == [pytest.approx(0.0, abs=1e-12)] * 3
        st_ = fam.state("s=6")
        assert entropy_spectrum(noise_distribution(st_, 6), 6, 2).atoms == [
            (pytest.approx(LN2, abs=1e-12), pytest.approx(1.0, abs=1e-12))]

    def test_fixed_prefix(self):
        st_ = example2([2]).state("s=2")
        ent = entropy_spectrum(noise_distribution(st_, 8), 8, 2)
        assert ent.atoms == [(pytest.approx(2 / 8 * LN2, abs=1e-12), pytest.approx(1.0, abs=1e-12))]
        fam = example2([2])
        vals = rate_estimate("inf-per-state", fam, U, [4, 8, 12], state_id="s=2").values()
        assert vals == [pytest.approx(LN2 * (1 - 2 / n), abs=1e-12) for n in (4, 8, 12)]

    def test_zero_noise_is_identity(self):
        k = block_kernel(example2([0]).state("s=0"), 3)
        np.testing.assert_array_equal(k, np.eye(8))


class TestExample3:
    def test_equal_sigmas_differ_only_in_gain(self):
        fam = example3_quantized((0.5, 1.0), (0.7,), 6)
        a, b = (np.array(s.params["matrix"]) for s in fam.states)
        assert not np.allclose(a, b)
        with pytest.raises(ConfigError):
            example3_quantized((1.0, 1.0), (0.7,), 6)

    def test_mutual_information_ordered_in_noise(self):
        fam = example3_quantized((1.0,), (0.5, 1.0), 8)
        px = np.array([0.5, 0.5])
        i_lo, i_hi = (mutual_information(px, np.array(s.params["matrix"])) for s in fam.states)
        assert i_lo > i_hi > 0

    def test_compound_tracks_weakest_state(self):
        fam = example3_quantized((0.5, 1.0), (0.5, 1.0), 8)
        ladder, tol = [2, 4, 6], 0.3
        comp = rate_estimate("inf-compound", fam, U, ladder, tol).value
        weak = rate_estimate("inf-per-state", fam, U, ladder, tol, state_id="h=0.5,sigma=1").value
        slack = 1e-9 + 0.5 * atom_spacing(comp, family_spectra(fam, U, 6))
        assert abs(comp - weak) <= slack

    def test_kernel_rows(self):
        fam = example3_quantized((1.0,), (0.3,), 4)
        k = np.array(fam.states[0].params["matrix"])
        np.testing.assert_allclose(k.sum(axis=1), 1.0, atol=1e-15)
        # mirror symmetry of the grid and the antipodal inputs
        np.testing.assert_allclose(k[0], k[1][::-1], atol=1e-15)

    @pytest.mark.parametrize("kw", [{"L": 1}, {"sigma_set": (0.0,)}, {"h_set": ()}, {"span": 0.0}])
    def test_config_errors(self, kw):
        with pytest.raises(ConfigError):
            example3_quantized(**kw)


class TestExample4:
    def test_single_atom_and_state_invariance(self):
        fam = example4(4)
        spectra = family_spectra(fam, U, 4)
        assert len(spectra) == 16
        for sp in spectra:
            assert sp.atoms == spectra[0].atoms
        assert spectra[0].atoms == [(pytest.approx(LN2, abs=1e-12), pytest.approx(1.0, abs=1e-12))]

    def test_zero_theta_is_identity(self):
        np.testing.assert_array_equal(block_kernel(example4(3).state("theta=000"), 3), np.eye(8))

    def test_short_prefix_cycles(self):
        fam = example4(thetas=[[1, 0]])
        sp = spectrum_exact(5, fam.states[0], U)
        assert sp.atoms == [(pytest.approx(LN2, abs=1e-12), pytest.approx(1.0, abs=1e-12))]


class TestAVC:
    def test_singleton(self):
        fam = avc_demo([0.1], 3)
        assert [s.id for s in fam.states] == ["seq=000"]
        comp = rate_estimate("inf-compound", fam, U, [3], 0.3).value
        assert comp == pytest.approx(bsc_lower_quantile(0.1, 3, 0.3), abs=1e-12)

    def test_two_crossovers(self):
        fam = avc_demo([0.05, 0.2], 4)
        assert len(fam.states) == 16
        ceiling = LN2 - binary_entropy(0.2)
        for tol in (1e-9, 0.05, 0.3):
            comp = rate_estimate("inf-compound", fam, U, [4], tol).value
            slack = 1e-9 + 0.5 * atom_spacing(comp, family_spectra(fam, U, 4))
            assert comp <= ceiling + slack
        for tol in (0.05, 0.3):
            comp = rate_estimate("inf-compound", fam, U, [4], tol).value
            worst = rate_estimate("inf-per-state", fam, U, [4], tol, state_id="seq=1111").value
            assert comp == pytest.approx(worst, abs=1e-12)

    def test_noiseless_pair(self):
        fam = avc_demo([0.0, 0.0], 2)
        for st_ in fam.states:
            np.testing.assert_array_equal(block_kernel(st_, 2), np.eye(4))

    def test_caps(self):
        with pytest.raises(ResourceCapError):
            avc_demo([0.1], 7)
        with pytest.raises(ResourceCapError):
            avc_demo([0.1, 0.2, 0.3, 0.4], 2)


class TestRegistry:
    def test_list_has_schemas(self):
        listing = list_scenarios()
        assert {"example1", "example2", "example3", "example4", "avc", "mixed-bsc"} <= set(listing)
        assert all(isinstance(v, dict) and v for v in listing.values())

    def test_build_with_params(self):
        fam = build_scenario("example1", {"S": 2, "q1": 0.4})
        assert [s.id for s in fam.states] == ["s=1", "s=2"]
        assert build_scenario("mixed-bsc", {"crossovers": [0.1]}).states[0].id == "q=0.1"

    def test_unknown(self):
        with pytest.raises(ConfigError):
            build_scenario("example9")
        with pytest.raises(ConfigError) as exc:
            build_scenario("example1", {"S": 2, "bogus": 1})
        assert exc.value.param == "bogus"

    def test_family_json_round_trip(self, tmp_path):
        from infospec import ChannelFamily

        fam = build_scenario("example1", {"rule": "n"})
        path = tmp_path / "f.json"
        fam.to_json(path)
        assert ChannelFamily.from_json(path).to_dict() == fam.to_dict()
