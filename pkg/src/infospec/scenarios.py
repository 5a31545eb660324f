"""Built-in channel families.

- ``example1``: binary channel that is useless (BSC(q1)) up to a coherence
  time ``s`` and BSC(q2) afterwards, over a bounded or growing state set
- ``example2``: binary additive noise that is uniform on the first ``s``
  symbols and zero afterwards
- ``example3``: scalar Gaussian channel ``y = h x + noise`` quantized to ``L``
  output bins, one state per ``(h, sigma)``
- ``example4``: deterministic bit flips ``y_k = x_k xor theta_k``
- ``avc``: all per-symbol state sequences of a tiny arbitrarily varying channel
- ``mixed-bsc``: a small finite BSC family for mixture experiments

Every builder returns a :class:`~infospec.channel.ChannelFamily`; the
registry maps scenario ids to builders and parameter schemas.
"""

from __future__ import annotations

import itertools
from typing import Any, Sequence

import numpy as np
from scipy.special import ndtr

from .channel import ChannelFamily, ChannelState, InputDistribution, TruncationRule
from .errors import ConfigError, ResourceCapError

#: Limits for the arbitrarily varying channel expansion.
AVC_MAX_N = 6
AVC_MAX_STATES = 3


def _crossover(q, name):
    q = float(q)
    if not 0.0 <= q <= 0.5:
        raise ConfigError(f"{name}={q} outside [0, 1/2]", name)
    return q


def _rule_from(arg, kind, params, s_min, id_prefix="s=") -> TruncationRule:
    if isinstance(arg, TruncationRule):
        return arg
    if arg == "n":
        arg = {"slope": 1, "offset": 0}
    if isinstance(arg, dict):
        extra = set(arg) - {"slope", "offset"}
        if extra:
            raise ConfigError(f"unknown truncation fields {sorted(extra)}", "rule")
        return TruncationRule(kind, params, s_min=s_min, slope=int(arg.get("slope", 0)),
                              offset=int(arg.get("offset", 0)), id_prefix=id_prefix)
    raise ConfigError(f"cannot interpret {arg!r} as a state bound or truncation rule", "rule")


def example1(S_or_rule: Any = 4, q1: float = 0.5, q2: float = 0.0) -> ChannelFamily:
    """Coherence-time family.

    Parameters
    ----------
    S_or_rule : int, "n", dict or TruncationRule
        An integer ``S`` gives the fixed states ``s = 1..S``.  ``"n"`` or a
        ``{"slope", "offset"}`` mapping gives the growing set
        ``s = 1..slope*n + offset``.
    q1, q2 : float
        Crossover before and after the coherence time, ``0 <= q2, q1 <= 1/2``.
    """
    params = {"q1": _crossover(q1, "q1"), "q2": _crossover(q2, "q2")}
    if isinstance(S_or_rule, (int, np.integer)) and not isinstance(S_or_rule, bool):
        if S_or_rule < 1:
            raise ConfigError("S must be >= 1", "S")
        states = [ChannelState(f"s={s}", "coherence", dict(params, s=s)) for s in range(1, int(S_or_rule) + 1)]
        return ChannelFamily(2, 2, states)
    return ChannelFamily(2, 2, [], _rule_from(S_or_rule, "coherence", params, 1))


def example2(prefix_rule: Any = 2, modulus: int = 2) -> ChannelFamily:
    """Additive prefix-noise family.

    ``prefix_rule`` is an integer ``S`` (states ``s = 0..S``), a list of
    prefix lengths, ``"n"`` or a ``{"slope", "offset"}`` mapping for a set
    ``s = 0..slope*n + offset`` that grows with the blocklength.
    """
    params = {"modulus": int(modulus)}
    if isinstance(prefix_rule, (int, np.integer)) and not isinstance(prefix_rule, bool):
        prefix_rule = list(range(int(prefix_rule) + 1))
    if isinstance(prefix_rule, (list, tuple)):
        if not prefix_rule or any(int(s) < 0 for s in prefix_rule):
            raise ConfigError("prefix lengths must be non-negative", "prefix_rule")
        states = [ChannelState(f"s={int(s)}", "additive-prefix-noise", dict(params, s=int(s)))
                  for s in prefix_rule]
        return ChannelFamily(modulus, modulus, states)
    return ChannelFamily(modulus, modulus, [], _rule_from(prefix_rule, "additive-prefix-noise", params, 0))


def noise_distribution(state: ChannelState, n: int) -> InputDistribution:
    """Law of the noise sequence of an additive-prefix-noise state as a product measure."""
    if state.kind != "additive-prefix-noise":
        raise ConfigError(f"state {state.id!r} is not additive-prefix-noise", "state")
    m = int(state.params.get("modulus", 2))
    s = int(state.params["s"])
    uniform, zero = [1.0 / m] * m, [1.0] + [0.0] * (m - 1)
    return InputDistribution.product([uniform if k < s else zero for k in range(n)])


def quantized_gaussian_kernel(h: float, sigma: float, levels: Sequence[float], edges: np.ndarray) -> np.ndarray:
    """Rows ``P(h x + sigma xi in bin j)`` for each input level ``x``; outer bins are open."""
    inner = np.asarray(edges, dtype=float)[1:-1]
    rows = []
    for x in levels:
        cdf = np.concatenate(([0.0], ndtr((inner - h * x) / sigma), [1.0]))
        row = np.diff(cdf)
        rows.append(row / row.sum())
    return np.array(rows)


def example3_quantized(h_set: Sequence[float] = (1.0,), sigma_set: Sequence[float] = (0.5, 1.0), L: int = 8,
                       input_levels: Sequence[float] = (-1.0, 1.0), span: float = 4.0) -> ChannelFamily:
    """Quantized fading family, one memoryless state per ``(h, sigma)``.

    Output bins split ``[-A, A]`` evenly into ``L`` cells with the two outer
    cells extended to infinity, where
    ``A = span * max(sigma) * max(1, max|h| * max|x|)``.  This is a
    discretization of the continuous model and only approximates it.
    """
    if int(L) < 2:
        raise ConfigError("L must be >= 2", "L")
    if not h_set or not sigma_set or len(input_levels) < 2:
        raise ConfigError("need at least one gain, one sigma and two input levels", "h_set")
    if any(float(s) <= 0 for s in sigma_set):
        raise ConfigError("sigmas must be positive", "sigma_set")
    gain = max(abs(float(h)) for h in h_set) * max(abs(float(x)) for x in input_levels)
    A = span * max(float(s) for s in sigma_set) * max(1.0, gain)
    if not np.isfinite(A) or A <= 0:
        raise ConfigError("degenerate quantization grid", "span")
    edges = np.linspace(-A, A, int(L) + 1)
    states = []
    for h in h_set:
        for sigma in sigma_set:
            k = quantized_gaussian_kernel(float(h), float(sigma), input_levels, edges)
            states.append(ChannelState(f"h={float(h):g},sigma={float(sigma):g}", "memoryless-stationary",
                                       {"matrix": k.tolist()}))
    return ChannelFamily(len(input_levels), int(L), states)


def example4(prefix_bits: int = 3, thetas: Sequence[Sequence[int]] | None = None) -> ChannelFamily:
    """Deterministic bit-flip family over all ``theta`` prefixes of ``prefix_bits`` bits (or ``thetas``)."""
    if thetas is None:
        thetas = list(itertools.product((0, 1), repeat=int(prefix_bits)))
    states = [ChannelState("theta=" + "".join(str(b) for b in th), "deterministic-shift",
                           {"theta": [int(b) for b in th]}) for th in thetas]
    return ChannelFamily(2, 2, states)


def avc_demo(per_symbol_states: Sequence, n: int) -> ChannelFamily:
    """Compound family over every per-symbol state sequence of length ``n``.

    ``per_symbol_states`` holds BSC crossovers or per-symbol kernel matrices.
    Each block state is a time-varying memoryless state meant for
    blocklength ``n``.
    """
    if not 1 <= n <= AVC_MAX_N or not 1 <= len(per_symbol_states) <= AVC_MAX_STATES:
        raise ResourceCapError(f"AVC expansion limited to n <= {AVC_MAX_N} and at most {AVC_MAX_STATES} "
                               f"per-symbol states", "n")
    mats = [np.array([[1 - q, q], [q, 1 - q]]) if np.isscalar(q) else np.asarray(q, dtype=float)
            for q in per_symbol_states]
    nx, ny = mats[0].shape
    states = []
    for seq in itertools.product(range(len(mats)), repeat=n):
        sid = "seq=" + "".join(str(k) for k in seq)
        states.append(ChannelState(sid, "memoryless-time-varying", {"matrices": [mats[k].tolist() for k in seq]}))
    return ChannelFamily(nx, ny, states)


def bsc_family(crossovers: Sequence[float] = (0.05, 0.2)) -> ChannelFamily:
    states = [ChannelState(f"q={float(q):g}", "memoryless-stationary", {"crossover": float(q)})
              for q in crossovers]
    return ChannelFamily(2, 2, states)


SCENARIOS: dict[str, dict] = {
    "example1": {
        "builder": lambda p: example1(p.get("S", 4) if p.get("rule") is None else p["rule"],
                                      p.get("q1", 0.5), p.get("q2", 0.0)),
        "params": {"S": "int, fixed states 1..S (default 4)",
                   "rule": "'n' or {slope, offset}: growing state set, overrides S",
                   "q1": "float in [0, 1/2], crossover up to the coherence time (default 0.5)",
                   "q2": "float in [0, 1/2], crossover afterwards (default 0)"},
    },
    "example2": {
        "builder": lambda p: example2(p.get("prefix_rule", 2), p.get("modulus", 2)),
        "params": {"prefix_rule": "int S (states 0..S), list of prefix lengths, 'n' or {slope, offset}",
                   "modulus": "int >= 2 (default 2)"},
    },
    "example3": {
        "builder": lambda p: example3_quantized(p.get("h_set", (1.0,)), p.get("sigma_set", (0.5, 1.0)),
                                                p.get("L", 8), p.get("input_levels", (-1.0, 1.0)),
                                                p.get("span", 4.0)),
        "params": {"h_set": "list of gains (default [1])", "sigma_set": "list of noise sigmas (default [0.5, 1])",
                   "L": "int >= 2 output bins (default 8)", "input_levels": "list (default [-1, 1])",
                   "span": "grid half-width in units of max sigma (default 4)"},
    },
    "example4": {
        "builder": lambda p: example4(p.get("prefix_bits", 3), p.get("thetas")),
        "params": {"prefix_bits": "int, all theta prefixes of this length (default 3)",
                   "thetas": "explicit list of bit lists, overrides prefix_bits"},
    },
    "avc": {
        "builder": lambda p: avc_demo(p.get("per_symbol_states", (0.05, 0.2)), int(p.get("n", 3))),
        "params": {"per_symbol_states": "list of crossovers or kernels, at most 3 (default [0.05, 0.2])",
                   "n": f"int <= {AVC_MAX_N} (default 3)"},
    },
    "mixed-bsc": {
        "builder": lambda p: bsc_family(p.get("crossovers", (0.05, 0.2))),
        "params": {"crossovers": "list of BSC crossovers (default [0.05, 0.2])"},
    },
}


def list_scenarios() -> dict[str, dict[str, str]]:
    return {k: dict(v["params"]) for k, v in SCENARIOS.items()}


def build_scenario(name: str, params: dict | None = None) -> ChannelFamily:
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}", "scenario")
    params = dict(params or {})
    unknown = set(params) - set(SCENARIOS[name]["params"])
    if unknown:
        raise ConfigError(f"unknown parameters {sorted(unknown)} for scenario {name}", sorted(unknown)[0])
    return SCENARIOS[name]["builder"](params)
