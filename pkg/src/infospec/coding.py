"""Greedy compound Feinstein codebooks, exact decoding and exact error evaluation.

The builder fixes ``alpha = M e^{n gamma}`` and the error budget

    lambda_n = max_s P_s(i <= ln alpha) + M / alpha,

then scans input sequences in lexicographic order.  A candidate ``x`` is
accepted when, for every state, the high-density set
``B_s(x) = {y : i(x; y | s) >= ln alpha}`` minus the state's earlier decision
regions still carries probability at least ``1 - lambda_n`` under ``x``.  The
leftover set becomes the codeword's decision region in that state.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelFamily, InputDistribution, as_index, block_kernel
from .errors import InvariantViolation, UsageError
from .reports import json_number, write_json
from .spectrum import MERGE_TOL, Spectrum, density_table, spectrum_exact

#: Slack on the acceptance test ``mass >= 1 - lambda_n``.
ACCEPT_SLACK = 1e-12


@dataclass
class Codebook:
    """Codewords (sequence indices) and per-state decision regions.

    ``regions[state_id]`` is an integer array over output indices holding the
    decoded message, or ``-1`` for an erasure.
    """

    n: int
    codewords: list[int]
    regions: dict[str, np.ndarray]
    gamma: float
    alpha: float
    lambda_n: float
    input: InputDistribution | None = None
    guaranteed: bool = True
    input_size: int = 2
    output_size: int = 2

    def __post_init__(self):
        if len(set(self.codewords)) != len(self.codewords):
            raise UsageError("codewords must be distinct", "codewords")
        self.regions = {k: np.asarray(v, dtype=np.int64) for k, v in self.regions.items()}

    @property
    def size(self) -> int:
        return len(self.codewords)

    @property
    def rate(self) -> float:
        """``r_n = ln(M) / n`` in nats per symbol."""
        return math.log(self.size) / self.n

    def code_input(self) -> InputDistribution:
        return InputDistribution.codebook(self.n, self.codewords)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "gamma": self.gamma,
            "alpha": json_number(self.alpha),
            "lambda_n": self.lambda_n,
            "rate_nats": self.rate,
            "codewords": list(self.codewords),
            "regions": {
                sid: {str(int(y)): int(m) for y, m in enumerate(reg) if m >= 0}
                for sid, reg in self.regions.items()
            },
            "guaranteed": self.guaranteed,
            "input": self.input.to_dict() if self.input is not None else None,
            "input_size": self.input_size,
            "output_size": self.output_size,
        }

    def write_json(self, path) -> None:
        write_json(path, self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Codebook":
        n, ny = int(d["n"]), int(d.get("output_size", 2))
        regions = {}
        for sid, mapping in d["regions"].items():
            reg = np.full(ny**n, -1, dtype=np.int64)
            for y, m in mapping.items():
                reg[int(y)] = int(m)
            regions[sid] = reg
        alpha = d["alpha"] if d["alpha"] is not None else math.inf
        inp = InputDistribution.from_dict(d["input"]) if d.get("input") else None
        return cls(n, [int(c) for c in d["codewords"]], regions, float(d["gamma"]), float(alpha),
                   float(d["lambda_n"]), inp, bool(d.get("guaranteed", True)),
                   int(d.get("input_size", 2)), ny)

    @classmethod
    def from_json(cls, path) -> "Codebook":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def feinstein_sets(px: np.ndarray, kernel: np.ndarray, alpha: float, n: int) -> tuple[np.ndarray, float]:
    """High-density sets ``B(x) = {y : i(x;y) >= ln alpha}`` and ``P(i <= ln alpha)``.

    Returns a boolean table over ``(x, y)`` and the probability of the
    complementary event under the joint law of ``px`` and ``kernel``.
    Comparisons use a width of ``n * 1e-12`` nats, the per-symbol merge
    tolerance scaled to the unnormalized density.
    """
    dens, _ = density_table(px, kernel)
    slack = n * MERGE_TOL
    thresh = math.log(alpha)
    joint = px[:, None] * kernel
    low = float(joint[dens <= thresh + slack].sum())
    return dens >= thresh - slack, low


def build_feinstein(n: int, M: int, gamma: float, family: ChannelFamily, input: InputDistribution,
                    cap: int | None = None) -> Codebook:
    """Greedy compound codebook of ``M`` codewords at blocklength ``n``.

    Raises
    ------
    UsageError
        If ``gamma <= 0``, ``M < 1`` or ``M`` exceeds the number of input sequences.
    InvariantViolation
        If fewer than ``M`` codewords qualify although ``lambda_n < 1``.
    """
    if not gamma > 0:
        raise UsageError(f"gamma must be positive, got {gamma}", "gamma")
    if M < 1:
        raise UsageError(f"M must be >= 1, got {M}", "M")
    n_inputs = family.nx**n
    if M > n_inputs:
        raise UsageError(f"M={M} exceeds the {n_inputs} input sequences of length {n}", "M")
    alpha = M * math.exp(n * gamma)
    states = family.states_at(n)
    px = input.probs(n, family.nx)

    weighted, low_probs = [], []
    for st in states:
        kernel = block_kernel(st, n, cap)
        sets, low = feinstein_sets(px, kernel, alpha, n)
        weighted.append(np.where(sets, kernel, 0.0))
        low_probs.append(low)
    lambda_n = max(low_probs) + M / alpha
    threshold = 1.0 - lambda_n - ACCEPT_SLACK

    taken = [np.zeros(family.ny**n, dtype=bool) for _ in states]
    regions = [np.full(family.ny**n, -1, dtype=np.int64) for _ in states]
    codewords: list[int] = []
    used = np.zeros(n_inputs, dtype=bool)
    start = 0
    while len(codewords) < M:
        # Leftover mass only shrinks as regions grow, so rejected candidates stay rejected.
        mass = np.min([wb @ (~d).astype(float) for wb, d in zip(weighted, taken)], axis=0)
        ok = np.flatnonzero((mass[start:] >= threshold) & ~used[start:])
        if ok.size == 0:
            break
        x = start + int(ok[0])
        k = len(codewords)
        for wb, d, reg in zip(weighted, taken, regions):
            new = (wb[x] > 0) & ~d
            reg[new] = k
            d |= new
        codewords.append(x)
        used[x] = True
        start = x + 1
    guaranteed = lambda_n < 1.0
    if len(codewords) < M:
        if guaranteed:
            raise InvariantViolation(
                f"only {len(codewords)} of {M} codewords qualified with lambda_n={lambda_n:.6g} < 1", "M")
        raise InvariantViolation(f"only {len(codewords)} of {M} codewords found", "M")
    return Codebook(n, codewords, {st.id: reg for st, reg in zip(states, regions)}, gamma, alpha,
                    lambda_n, input, guaranteed, family.nx, family.ny)


def decode(codebook: Codebook, y_seq, state_id: str) -> int | None:
    """Message decoded from ``y_seq`` in ``state_id``; ``None`` is an erasure."""
    if state_id not in codebook.regions:
        raise UsageError(f"codebook has no regions for state {state_id!r}", "state_id")
    m = int(codebook.regions[state_id][as_index(y_seq, codebook.output_size)])
    return None if m < 0 else m


@dataclass
class ErrorReport:
    """Exact per-state and compound error probabilities (erasures count as errors)."""

    per_message: dict[str, np.ndarray]
    per_state_max: dict[str, float] = field(init=False)
    per_state_avg: dict[str, float] = field(init=False)

    def __post_init__(self):
        self.per_state_max = {k: float(v.max()) for k, v in self.per_message.items()}
        self.per_state_avg = {k: float(v.mean()) for k, v in self.per_message.items()}

    @property
    def compound_max(self) -> float:
        return max(self.per_state_max.values())

    @property
    def compound_avg(self) -> float:
        return max(self.per_state_avg.values())

    def to_dict(self) -> dict:
        return {
            "per_state_max": self.per_state_max,
            "per_state_avg": self.per_state_avg,
            "compound_max": self.compound_max,
            "compound_avg": self.compound_avg,
        }


def error_probabilities(codebook: Codebook, family: ChannelFamily, cap: int | None = None) -> ErrorReport:
    """``P_s(D_ks^c | u_k)`` for every message and state, by exact summation."""
    per = {}
    for st in family.states_at(codebook.n):
        if st.id not in codebook.regions:
            raise UsageError(f"codebook has no regions for state {st.id!r}", "codebook")
        kernel = block_kernel(st, codebook.n, cap)
        reg = codebook.regions[st.id]
        err = np.array([kernel[u, reg != k].sum() for k, u in enumerate(codebook.codewords)])
        # kernel rows may sum to 1 + O(eps); keep probabilities in range
        per[st.id] = np.clip(err, 0.0, 1.0)
    return ErrorReport(per)


@dataclass
class CodeSpectrum:
    """Per-state spectra under the uniform distribution over codewords."""

    rate: float
    spectra: dict[str, Spectrum]

    @property
    def max_atom(self) -> float:
        return max(float(sp.values[-1]) for sp in self.spectra.values())

    def mass_near_rate(self, delta: float) -> dict[str, float]:
        """``P(|Z - r_n| <= delta)`` per state."""
        return {k: 1.0 - sp.prob_outside(self.rate, delta) for k, sp in self.spectra.items()}

    def to_dict(self, delta: float = 0.05) -> dict:
        return {
            "rate_nats": self.rate,
            "max_atom": self.max_atom,
            "delta": delta,
            "mass_near_rate": self.mass_near_rate(delta),
            "spectra": {k: [[float(v), float(p)] for v, p in zip(sp.values, sp.probs)]
                        for k, sp in self.spectra.items()},
        }


def code_spectrum(codebook: Codebook, family: ChannelFamily, cap: int | None = None) -> CodeSpectrum:
    inp = codebook.code_input()
    spectra = {st.id: spectrum_exact(codebook.n, st, inp, cap) for st in family.states_at(codebook.n)}
    return CodeSpectrum(codebook.rate, spectra)
