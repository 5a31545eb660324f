import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infospec import (
    Alphabet,
    ChannelFamily,
    ChannelState,
    ConfigError,
    InputDistribution,
    ResourceCapError,
    TruncationRule,
    UsageError,
    block_kernel,
    output_marginal,
    validate,
)
from infospec.channel import check_enumeration

from conftest import bsc, family_of


class TestAlphabet:
    @given(size=st.integers(2, 4), n=st.integers(1, 6), data=st.data())
    @settings(max_examples=60, deadline=None)
    def test_round_trip(self, size, n, data):
        seq = tuple(data.draw(st.lists(st.integers(0, size - 1), min_size=n, max_size=n)))
        a = Alphabet(size)
        assert a.decode(a.encode(seq), n) == seq

    def test_lexicographic_order(self):
        rows = Alphabet(3).sequences(2)
        assert [tuple(r) for r in rows] == sorted(tuple(r) for r in rows)
        assert Alphabet(2).encode((1, 0, 1)) == 5

    def test_rejects_bad_symbol(self):
        with pytest.raises(UsageError):
            Alphabet(2).encode((0, 2))


class TestBlockKernel:
    def test_noiseless_is_identity(self):
        np.testing.assert_array_equal(block_kernel(bsc(0.0), 2), np.eye(4))

    def test_bsc_single_symbol(self):
        np.testing.assert_array_equal(block_kernel(bsc(0.25), 1), [[0.75, 0.25], [0.25, 0.75]])

    def test_coherence_before_and_after(self):
        st_ = ChannelState("s=3", "coherence", {"s": 3})
        k = block_kernel(st_, 2)
        np.testing.assert_array_equal(k, np.full((4, 4), 0.25))
        np.testing.assert_array_equal(block_kernel(st_, 4), np.eye(16))

    def test_time_varying_cycles(self):
        st_ = ChannelState("tv", "memoryless-time-varying", {"crossovers": [0.0, 0.5]})
        k = block_kernel(st_, 3)
        # position 2 reuses the first kernel
        assert k[0b000, 0b000] == 0.5 and k[0b000, 0b001] == 0.0

    def test_prefix_noise_and_shift(self):
        k = block_kernel(ChannelState("z", "additive-prefix-noise", {"s": 1}), 2)
        np.testing.assert_array_equal(k[0], [0.5, 0.0, 0.5, 0.0])
        k = block_kernel(ChannelState("t", "deterministic-shift", {"theta": [1, 0]}), 2)
        assert k[0b00, 0b10] == 1.0

    def test_explicit_block(self):
        table = [[0.9, 0.1], [0.2, 0.8]]
        st_ = ChannelState("e", "explicit-block", {"input_size": 2, "output_size": 2, "kernels": {"1": table}})
        np.testing.assert_array_equal(block_kernel(st_, 1), table)
        with pytest.raises(ConfigError):
            block_kernel(st_, 2)

    def test_cap(self):
        with pytest.raises(ResourceCapError) as exc:
            block_kernel(bsc(0.1), 14)
        assert exc.value.param == "cap"
        check_enumeration(2, 2, 13)

    @given(q=st.floats(0, 0.5), n=st.integers(1, 4))
    @settings(max_examples=30, deadline=None)
    def test_rows_normalized(self, q, n):
        k = block_kernel(bsc(q), n)
        np.testing.assert_allclose(k.sum(axis=1), 1.0, atol=1e-12)
        assert k.min() >= 0 and k.max() <= 1

    def test_unknown_kind_and_params(self):
        with pytest.raises(ConfigError):
            ChannelState("x", "fading", {})
        with pytest.raises(ConfigError):
            ChannelState("x", "memoryless-stationary", {"crossover": 0.1, "extra": 1})


class TestOutputMarginal:
    def test_uniform_input_bsc(self, uniform2):
        np.testing.assert_allclose(output_marginal(uniform2, bsc(0.3), 1), [0.5, 0.5], atol=1e-15)

    def test_point_input(self):
        inp = InputDistribution.iid([1.0, 0.0])
        np.testing.assert_allclose(output_marginal(inp, bsc(0.25), 1), [0.75, 0.25])

    def test_identity_uniform(self, uniform2):
        np.testing.assert_allclose(output_marginal(uniform2, bsc(0.0), 3), np.full(8, 1 / 8))


class TestValidate:
    def test_two_state_passes(self):
        rep = validate(family_of(bsc(0.1, "a"), bsc(0.2, "b")), [1, 2, 4])
        assert rep.passed
        assert rep.max_deviation == 0.0 or rep.max_deviation < 1e-15
        assert all(e.factorizes for e in rep.entries)

    def test_defective_row_is_reported(self):
        bad = ChannelState("bad", "explicit-block",
                           {"input_size": 2, "output_size": 2, "kernels": {"1": [[0.5, 0.499], [0.5, 0.5]]}})
        rep = validate(ChannelFamily(2, 2, [bad]), [1])
        assert not rep.passed
        (entry,) = rep.failures
        assert entry.state_id == "bad" and entry.worst_row == 0
        assert "row 0" in entry.message

    def test_missing_kernel_does_not_raise(self):
        st_ = ChannelState("e", "explicit-block", {"input_size": 2, "output_size": 2, "kernels": {}})
        assert not validate(ChannelFamily(2, 2, [st_]), [1]).passed


class TestFamily:
    def test_json_round_trip(self, tmp_path):
        rule = TruncationRule("coherence", {"q1": 0.5, "q2": 0.0}, slope=1)
        fam = ChannelFamily(2, 2, [bsc(0.1, "a")], rule)
        path = tmp_path / "f.json"
        fam.to_json(path)
        again = ChannelFamily.from_json(path)
        assert again.to_dict() == fam.to_dict()
        assert [s.id for s in again.states_at(3)] == ["a", "s=1", "s=2", "s=3"]

    def test_unknown_field_rejected(self):
        d = family_of(bsc(0.1)).to_dict()
        d["comment"] = "x"
        with pytest.raises(ConfigError):
            ChannelFamily.from_dict(d)

    def test_duplicate_ids_and_sizes(self):
        with pytest.raises(ConfigError):
            family_of(bsc(0.1, "a"), bsc(0.2, "a"))
        with pytest.raises(ConfigError):
            ChannelFamily(3, 3, [bsc(0.1)])

    def test_state_lookup_through_rule(self):
        fam = ChannelFamily(2, 2, [], TruncationRule("coherence", {}, slope=1))
        assert fam.state("s=40").params["s"] == 40
        with pytest.raises(UsageError):
            fam.state("nope")

    def test_spec_file_shape(self, tmp_path):
        path = tmp_path / "f.json"
        family_of(bsc(0.1, "a")).to_json(path)
        assert set(json.loads(path.read_text())) == {"input_alphabet", "output_alphabet", "states"}


class TestInputDistribution:
    def test_rejects_unnormalized(self):
        with pytest.raises(ConfigError):
            InputDistribution.iid([0.5, 0.4])

    def test_codebook_probs(self):
        p = InputDistribution.codebook(2, [0, 3]).probs(2, 2)
        np.testing.assert_array_equal(p, [0.5, 0, 0, 0.5])
        with pytest.raises(UsageError):
            InputDistribution.codebook(2, [0, 3]).probs(3, 2)

    def test_product_kron_order(self):
        p = InputDistribution.product([[1.0, 0.0], [0.25, 0.75]]).probs(2, 2)
        np.testing.assert_array_equal(p, [0.25, 0.75, 0.0, 0.0])
