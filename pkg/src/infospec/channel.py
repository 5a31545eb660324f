"""Finite alphabets, state-indexed channel kernels and input distributions.

Sequences over an alphabet of size ``N`` are identified with integers by the
base-``N`` encoding with the first symbol most significant, so index order is
lexicographic order.  A block kernel for blocklength ``n`` is a dense
``N_x**n x N_y**n`` array whose rows are conditional output distributions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import ConfigError, ResourceCapError, UsageError

#: Default limit on ``N_x**n * N_y**n`` table entries for exact enumeration.
ENUMERATION_CAP = 2**26

#: Row-sum tolerance for kernels and normalization tolerance for distributions.
PROB_TOL = 1e-12

KINDS = (
    "memoryless-stationary",
    "memoryless-time-varying",
    "coherence",
    "additive-prefix-noise",
    "explicit-block",
    "deterministic-shift",
)

MEMORYLESS_KINDS = ("memoryless-stationary", "memoryless-time-varying")

_PARAM_KEYS = {
    "memoryless-stationary": {"matrix", "crossover"},
    "memoryless-time-varying": {"matrices", "crossovers"},
    "coherence": {"s", "q1", "q2"},
    "additive-prefix-noise": {"s", "modulus"},
    "explicit-block": {"input_size", "output_size", "kernels"},
    "deterministic-shift": {"theta"},
}


@dataclass(frozen=True)
class Alphabet:
    """Symbols ``0..size-1``."""

    size: int

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise ConfigError(f"alphabet size must be a positive integer, got {self.size!r}", "size")

    def encode(self, seq: Sequence[int]) -> int:
        index = 0
        for sym in seq:
            if not 0 <= sym < self.size:
                raise UsageError(f"symbol {sym} outside alphabet of size {self.size}", "seq")
            index = index * self.size + int(sym)
        return index

    def decode(self, index: int, n: int) -> tuple[int, ...]:
        if not 0 <= index < self.size**n:
            raise UsageError(f"index {index} outside [0, {self.size}**{n})", "index")
        digits = []
        for _ in range(n):
            index, d = divmod(index, self.size)
            digits.append(d)
        return tuple(reversed(digits))

    def sequences(self, n: int) -> np.ndarray:
        """All sequences of length ``n`` as rows, in index order."""
        idx = np.arange(self.size**n)
        powers = self.size ** np.arange(n - 1, -1, -1)
        return (idx[:, None] // powers[None, :]) % self.size


def as_index(seq, size: int) -> int:
    """Accept either an integer index or a symbol sequence."""
    if isinstance(seq, (int, np.integer)):
        return int(seq)
    return Alphabet(size).encode(seq)


def bsc_matrix(q: float) -> np.ndarray:
    return np.array([[1.0 - q, q], [q, 1.0 - q]])


def check_enumeration(nx: int, ny: int, n: int, cap: int | None = None) -> None:
    cap = ENUMERATION_CAP if cap is None else cap
    entries = (nx**n) * (ny**n)
    if entries > cap:
        raise ResourceCapError(
            f"exact table needs {nx}^{n} x {ny}^{n} = {entries} entries, above the "
            f"enumeration cap {cap}; use Monte Carlo spectra instead",
            "cap",
        )


def _matrix(value, param: str) -> np.ndarray:
    m = np.asarray(value, dtype=float)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ConfigError(f"{param} must be a non-empty 2-D matrix", param)
    return m


def _probability(value, param: str, upper: float = 1.0) -> float:
    q = float(value)
    if not 0.0 <= q <= upper:
        raise ConfigError(f"{param}={q} outside [0, {upper}]", param)
    return q


@dataclass
class ChannelState:
    """One member of the uncertainty set.

    ``params`` by kind:

    - ``memoryless-stationary``: ``matrix`` (per-symbol kernel) or ``crossover`` (BSC)
    - ``memoryless-time-varying``: ``matrices`` or ``crossovers``; symbol ``k``
      uses entry ``k mod len``
    - ``coherence``: ``s``, ``q1`` (default 1/2), ``q2`` (default 0); BSC(q1)
      for ``n <= s`` and BSC(q2) otherwise
    - ``additive-prefix-noise``: ``s``, ``modulus`` (default 2); ``Y = X + Z``
      where the first ``s`` noise symbols are uniform and the rest zero
    - ``explicit-block``: ``input_size``, ``output_size``, ``kernels`` mapping
      blocklength to a full block table
    - ``deterministic-shift``: ``theta`` bit list; ``y_k = x_k xor theta_k``,
      zero beyond the list
    """

    id: str
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.id = str(self.id)
        if self.kind not in KINDS:
            raise ConfigError(f"unknown channel kind {self.kind!r}", "kind")
        unknown = set(self.params) - _PARAM_KEYS[self.kind]
        if unknown:
            raise ConfigError(
                f"state {self.id!r}: unknown params {sorted(unknown)} for kind {self.kind}", "params"
            )
        self._check_params()

    def _check_params(self):
        p, kind = self.params, self.kind
        if kind == "memoryless-stationary":
            if ("matrix" in p) == ("crossover" in p):
                raise ConfigError(f"state {self.id!r}: give exactly one of matrix, crossover", "params")
            if "crossover" in p:
                _probability(p["crossover"], "crossover")
            else:
                _matrix(p["matrix"], "matrix")
        elif kind == "memoryless-time-varying":
            if ("matrices" in p) == ("crossovers" in p):
                raise ConfigError(f"state {self.id!r}: give exactly one of matrices, crossovers", "params")
            seq = p.get("matrices", p.get("crossovers"))
            if not seq:
                raise ConfigError(f"state {self.id!r}: empty per-symbol kernel list", "params")
            if "crossovers" in p:
                for q in p["crossovers"]:
                    _probability(q, "crossovers")
            else:
                shapes = {_matrix(m, "matrices").shape for m in p["matrices"]}
                if len(shapes) != 1:
                    raise ConfigError(f"state {self.id!r}: per-symbol kernels differ in shape", "matrices")
        elif kind == "coherence":
            if "s" not in p or int(p["s"]) < 0:
                raise ConfigError(f"state {self.id!r}: coherence needs integer s >= 0", "s")
            _probability(p.get("q1", 0.5), "q1")
            _probability(p.get("q2", 0.0), "q2")
        elif kind == "additive-prefix-noise":
            if "s" not in p or int(p["s"]) < 0:
                raise ConfigError(f"state {self.id!r}: additive-prefix-noise needs integer s >= 0", "s")
            if int(p.get("modulus", 2)) < 2:
                raise ConfigError(f"state {self.id!r}: modulus must be >= 2", "modulus")
        elif kind == "explicit-block":
            for key in ("input_size", "output_size", "kernels"):
                if key not in p:
                    raise ConfigError(f"state {self.id!r}: explicit-block needs {key}", key)
        elif kind == "deterministic-shift":
            if any(b not in (0, 1) for b in p.get("theta", [])):
                raise ConfigError(f"state {self.id!r}: theta must be a bit list", "theta")

    # -- alphabet sizes -------------------------------------------------
    @property
    def input_size(self) -> int:
        return self._sizes()[0]

    @property
    def output_size(self) -> int:
        return self._sizes()[1]

    def _sizes(self) -> tuple[int, int]:
        p, kind = self.params, self.kind
        if kind == "memoryless-stationary" and "matrix" in p:
            return _matrix(p["matrix"], "matrix").shape
        if kind == "memoryless-time-varying" and "matrices" in p:
            return _matrix(p["matrices"][0], "matrices").shape
        if kind == "additive-prefix-noise":
            m = int(p.get("modulus", 2))
            return m, m
        if kind == "explicit-block":
            return int(p["input_size"]), int(p["output_size"])
        return 2, 2

    # -- kernels --------------------------------------------------------
    def symbol_kernels(self, n: int) -> list[np.ndarray] | None:
        """Per-symbol kernels whose Kronecker product is the block kernel.

        ``None`` for kinds without a product structure (``explicit-block``).
        """
        if n < 1:
            raise UsageError(f"blocklength must be >= 1, got {n}", "n")
        p, kind = self.params, self.kind
        if kind == "memoryless-stationary":
            m = bsc_matrix(float(p["crossover"])) if "crossover" in p else _matrix(p["matrix"], "matrix")
            return [m] * n
        if kind == "memoryless-time-varying":
            if "crossovers" in p:
                mats = [bsc_matrix(float(q)) for q in p["crossovers"]]
            else:
                mats = [_matrix(m, "matrices") for m in p["matrices"]]
            return [mats[k % len(mats)] for k in range(n)]
        if kind == "coherence":
            q = float(p.get("q1", 0.5)) if n <= int(p["s"]) else float(p.get("q2", 0.0))
            return [bsc_matrix(q)] * n
        if kind == "additive-prefix-noise":
            m = int(p.get("modulus", 2))
            uniform = np.full((m, m), 1.0 / m)
            return [uniform if k < int(p["s"]) else np.eye(m) for k in range(n)]
        if kind == "deterministic-shift":
            theta = list(p.get("theta", []))
            swap = np.array([[0.0, 1.0], [1.0, 0.0]])
            return [swap if k < len(theta) and theta[k] else np.eye(2) for k in range(n)]
        return None

    def block_kernel(self, n: int, cap: int | None = None) -> np.ndarray:
        return block_kernel(self, n, cap)

    @property
    def has_sampler(self) -> bool:
        return self.kind != "explicit-block"

    def to_dict(self) -> dict:
        return {"id": self.id, "kind": self.kind, "params": _jsonable(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelState":
        unknown = set(d) - {"id", "kind", "params"}
        if unknown:
            raise ConfigError(f"unknown state fields {sorted(unknown)}", "states")
        for key in ("id", "kind"):
            if key not in d:
                raise ConfigError(f"state entry missing {key!r}", key)
        return cls(d["id"], d["kind"], dict(d.get("params", {})))


def block_kernel(state: ChannelState, n: int, cap: int | None = None) -> np.ndarray:
    """Conditional distribution table ``p_s(y^n | x^n)`` of shape ``(N_x**n, N_y**n)``."""
    if n < 1:
        raise UsageError(f"blocklength must be >= 1, got {n}", "n")
    nx, ny = state.input_size, state.output_size
    check_enumeration(nx, ny, n, cap)
    mats = state.symbol_kernels(n)
    if mats is not None:
        return reduce(np.kron, mats)
    kernels = state.params["kernels"]
    table = kernels.get(str(n), kernels.get(n))
    if table is None:
        raise ConfigError(f"state {state.id!r}: explicit-block has no kernel for n={n}", "kernels")
    table = np.asarray(table, dtype=float)
    if table.shape != (nx**n, ny**n):
        raise ConfigError(
            f"state {state.id!r}: kernel for n={n} has shape {table.shape}, expected {(nx**n, ny**n)}",
            "kernels",
        )
    return table


@dataclass
class TruncationRule:
    """Generates the states ``s_min .. s_max(n)`` from a kind template.

    ``s_max(n)`` is either the constant ``s_max`` or ``slope * n + offset``.
    State ids are ``id_prefix + str(s)`` and the integer ``s`` is written
    into the template params under ``parameter``.
    """

    kind: str
    params: dict = field(default_factory=dict)
    parameter: str = "s"
    s_min: int = 1
    s_max: int | None = None
    slope: int = 0
    offset: int = 0
    id_prefix: str = "s="

    def __post_init__(self):
        if self.s_max is None and self.slope == 0 and self.offset == 0:
            raise ConfigError("truncation rule needs s_max or a slope/offset", "truncation_rule")
        self.state(self.s_min)  # validates the template

    def upper(self, n: int) -> int:
        return int(self.s_max) if self.s_max is not None else int(self.slope * n + self.offset)

    def values(self, n: int) -> range:
        return range(self.s_min, self.upper(n) + 1)

    def state(self, value: int) -> ChannelState:
        params = dict(self.params)
        params[self.parameter] = int(value)
        return ChannelState(f"{self.id_prefix}{value}", self.kind, params)

    def parse_id(self, state_id: str) -> int | None:
        if not state_id.startswith(self.id_prefix):
            return None
        try:
            return int(state_id[len(self.id_prefix):])
        except ValueError:
            return None

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "params": _jsonable(self.params), "parameter": self.parameter,
             "s_min": self.s_min, "id_prefix": self.id_prefix}
        d["s_max"] = self.s_max if self.s_max is not None else {"slope": self.slope, "offset": self.offset}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TruncationRule":
        allowed = {"kind", "params", "parameter", "s_min", "s_max", "id_prefix"}
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"unknown truncation_rule fields {sorted(unknown)}", "truncation_rule")
        if "kind" not in d or "s_max" not in d:
            raise ConfigError("truncation_rule needs kind and s_max", "truncation_rule")
        s_max = d["s_max"]
        kw = {}
        if isinstance(s_max, dict):
            extra = set(s_max) - {"slope", "offset"}
            if extra:
                raise ConfigError(f"unknown s_max fields {sorted(extra)}", "s_max")
            kw = {"slope": int(s_max.get("slope", 0)), "offset": int(s_max.get("offset", 0))}
            s_max = None
        return cls(d["kind"], dict(d.get("params", {})), d.get("parameter", "s"),
                   int(d.get("s_min", 1)), s_max, id_prefix=d.get("id_prefix", "s="), **kw)


@dataclass
class ChannelFamily:
    """Uncertainty set: explicit states plus an optional n-dependent truncation rule."""

    input_alphabet: Alphabet
    output_alphabet: Alphabet
    states: list[ChannelState] = field(default_factory=list)
    truncation_rule: TruncationRule | None = None

    def __post_init__(self):
        if isinstance(self.input_alphabet, int):
            self.input_alphabet = Alphabet(self.input_alphabet)
        if isinstance(self.output_alphabet, int):
            self.output_alphabet = Alphabet(self.output_alphabet)
        if self.input_alphabet.size < 2 or self.output_alphabet.size < 2:
            raise ConfigError("channel alphabets need at least two symbols", "input_alphabet")
        if not self.states and self.truncation_rule is None:
            raise ConfigError("family has no states", "states")
        ids = [s.id for s in self.states]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"duplicate state ids in {ids}", "states")
        probe = list(self.states)
        if self.truncation_rule is not None:
            probe.append(self.truncation_rule.state(self.truncation_rule.s_min))
        for st in probe:
            if (st.input_size, st.output_size) != (self.input_alphabet.size, self.output_alphabet.size):
                raise ConfigError(
                    f"state {st.id!r} uses alphabets {st.input_size}x{st.output_size}, family declares "
                    f"{self.input_alphabet.size}x{self.output_alphabet.size}",
                    "states",
                )

    @property
    def nx(self) -> int:
        return self.input_alphabet.size

    @property
    def ny(self) -> int:
        return self.output_alphabet.size

    def states_at(self, n: int) -> list[ChannelState]:
        out = list(self.states)
        if self.truncation_rule is not None:
            out.extend(self.truncation_rule.state(v) for v in self.truncation_rule.values(n))
        if not out:
            raise UsageError(f"family has no states at n={n}", "n")
        return out

    def probe_states(self, n_ladder: Iterable[int]) -> list[ChannelState]:
        """States present at the bottom rung; each is followed up the whole ladder."""
        return self.states_at(min(n_ladder))

    def state(self, state_id: str) -> ChannelState:
        for st in self.states:
            if st.id == state_id:
                return st
        if self.truncation_rule is not None:
            v = self.truncation_rule.parse_id(state_id)
            if v is not None and v >= self.truncation_rule.s_min:
                return self.truncation_rule.state(v)
        raise UsageError(f"unknown state id {state_id!r}", "state")

    def to_dict(self) -> dict:
        d: dict[str, Any] = {
            "input_alphabet": self.nx,
            "output_alphabet": self.ny,
            "states": [s.to_dict() for s in self.states],
        }
        if self.truncation_rule is not None:
            d["truncation_rule"] = self.truncation_rule.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelFamily":
        allowed = {"input_alphabet", "output_alphabet", "states", "truncation_rule"}
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"unknown family fields {sorted(unknown)}", sorted(unknown)[0])
        for key in ("input_alphabet", "output_alphabet"):
            if key not in d:
                raise ConfigError(f"family missing {key!r}", key)
        rule = d.get("truncation_rule")
        return cls(
            _alphabet_from(d["input_alphabet"], "input_alphabet"),
            _alphabet_from(d["output_alphabet"], "output_alphabet"),
            [ChannelState.from_dict(s) for s in d.get("states", [])],
            TruncationRule.from_dict(rule) if rule is not None else None,
        )

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "ChannelFamily":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _alphabet_from(value, param):
    if isinstance(value, dict):
        if set(value) != {"size"}:
            raise ConfigError(f"{param} must be an integer or {{'size': N}}", param)
        value = value["size"]
    try:
        return Alphabet(int(value))
    except (TypeError, ValueError):
        raise ConfigError(f"{param} must be an integer size", param) from None


INPUT_KINDS = ("iid", "product-of-per-symbol", "uniform-over-codebook", "explicit-vector")


@dataclass
class InputDistribution:
    """Distribution ``p(x^n)`` over input sequences.

    - ``iid``: ``pmf``
    - ``product-of-per-symbol``: ``pmfs``, one per position (at least ``n``)
    - ``uniform-over-codebook``: ``n``, ``codewords`` (sequence indices)
    - ``explicit-vector``: ``n``, ``probs`` over all ``N**n`` sequences
    """

    kind: str
    params: dict

    def __post_init__(self):
        if self.kind not in INPUT_KINDS:
            raise ConfigError(f"unknown input kind {self.kind!r}", "input")
        keys = {
            "iid": {"pmf"},
            "product-of-per-symbol": {"pmfs"},
            "uniform-over-codebook": {"n", "codewords"},
            "explicit-vector": {"n", "probs"},
        }[self.kind]
        if set(self.params) != keys:
            raise ConfigError(f"input kind {self.kind} needs exactly params {sorted(keys)}", "input")
        if self.kind == "iid":
            self._check_pmf(self.params["pmf"])
        elif self.kind == "product-of-per-symbol":
            for pmf in self.params["pmfs"]:
                self._check_pmf(pmf)
        elif self.kind == "uniform-over-codebook":
            cw = list(self.params["codewords"])
            if not cw or len(set(cw)) != len(cw):
                raise ConfigError("codebook input needs distinct, non-empty codewords", "codewords")
        else:
            self._check_pmf(self.params["probs"])

    @staticmethod
    def _check_pmf(pmf):
        v = np.asarray(pmf, dtype=float)
        if v.ndim != 1 or v.size == 0 or np.any(v < 0) or abs(v.sum() - 1.0) > PROB_TOL:
            raise ConfigError(f"not a probability vector: {pmf!r}", "input")

    @classmethod
    def iid(cls, pmf) -> "InputDistribution":
        return cls("iid", {"pmf": [float(v) for v in pmf]})

    @classmethod
    def uniform(cls, size: int = 2) -> "InputDistribution":
        return cls.iid(np.full(size, 1.0 / size))

    @classmethod
    def product(cls, pmfs) -> "InputDistribution":
        return cls("product-of-per-symbol", {"pmfs": [[float(v) for v in p] for p in pmfs]})

    @classmethod
    def codebook(cls, n: int, codewords) -> "InputDistribution":
        return cls("uniform-over-codebook", {"n": int(n), "codewords": [int(c) for c in codewords]})

    @classmethod
    def explicit(cls, n: int, probs) -> "InputDistribution":
        return cls("explicit-vector", {"n": int(n), "probs": [float(v) for v in probs]})

    def symbol_pmfs(self, n: int, size: int) -> list[np.ndarray] | None:
        """Per-position marginals when the input is a product measure, else ``None``."""
        if self.kind == "iid":
            pmf = np.asarray(self.params["pmf"], dtype=float)
            self._check_size(pmf, size)
            return [pmf] * n
        if self.kind == "product-of-per-symbol":
            pmfs = [np.asarray(p, dtype=float) for p in self.params["pmfs"]]
            if len(pmfs) < n:
                raise UsageError(f"product input defines {len(pmfs)} positions, need {n}", "n")
            for p in pmfs[:n]:
                self._check_size(p, size)
            return pmfs[:n]
        return None

    @staticmethod
    def _check_size(pmf, size):
        if pmf.size != size:
            raise UsageError(f"input pmf has {pmf.size} symbols, alphabet has {size}", "input")

    def probs(self, n: int, size: int) -> np.ndarray:
        pmfs = self.symbol_pmfs(n, size)
        if pmfs is not None:
            return reduce(np.kron, pmfs)
        if int(self.params["n"]) != n:
            raise UsageError(f"input defined for n={self.params['n']}, requested n={n}", "n")
        if self.kind == "uniform-over-codebook":
            v = np.zeros(size**n)
            cw = np.asarray(self.params["codewords"], dtype=int)
            if cw.min() < 0 or cw.max() >= size**n:
                raise UsageError("codeword index outside the sequence space", "codewords")
            v[cw] = 1.0 / len(cw)
            return v
        v = np.asarray(self.params["probs"], dtype=float)
        if v.size != size**n:
            raise UsageError(f"explicit input has {v.size} entries, need {size**n}", "input")
        return v

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": _jsonable(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "InputDistribution":
        unknown = set(d) - {"kind", "params"}
        if unknown:
            raise ConfigError(f"unknown input fields {sorted(unknown)}", "input")
        return cls(d["kind"], dict(d.get("params", {})))


def output_marginal(input: InputDistribution, state: ChannelState, n: int, cap: int | None = None) -> np.ndarray:
    """``p_s(y^n) = sum_x p(x^n) p_s(y^n|x^n)``."""
    kernel = block_kernel(state, n, cap)
    px = input.probs(n, state.input_size)
    return (px[:, None] * kernel).sum(axis=0)


@dataclass
class ValidationEntry:
    state_id: str
    n: int
    passed: bool
    max_row_deviation: float = float("nan")
    worst_row: int = -1
    min_entry: float = float("nan")
    max_entry: float = float("nan")
    factorizes: bool | None = None
    message: str = ""


@dataclass
class ValidationReport:
    entries: list[ValidationEntry]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def failures(self) -> list[ValidationEntry]:
        return [e for e in self.entries if not e.passed]

    @property
    def max_deviation(self) -> float:
        devs = [e.max_row_deviation for e in self.entries if np.isfinite(e.max_row_deviation)]
        return max(devs) if devs else float("nan")

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "entries": [
                {k: (None if isinstance(v, float) and not np.isfinite(v) else v)
                 for k, v in e.__dict__.items()}
                for e in self.entries
            ],
        }


def validate(family: ChannelFamily, n_list: Iterable[int], cap: int | None = None) -> ValidationReport:
    """Check every kernel of every state at every requested blocklength.

    Never raises for defective kernels; failures are reported as entries.
    Memoryless kinds are additionally checked entrywise against the product
    of their per-symbol kernels for ``n <= 4``.
    """
    entries = []
    for n in n_list:
        for st in family.states_at(n):
            try:
                k = block_kernel(st, n, cap)
            except (ConfigError, ResourceCapError, UsageError) as exc:
                entries.append(ValidationEntry(st.id, n, False, message=str(exc)))
                continue
            dev = np.abs(k.sum(axis=1) - 1.0)
            worst = int(np.argmax(dev))
            entry = ValidationEntry(
                st.id, n, True, float(dev[worst]), worst, float(k.min()), float(k.max())
            )
            problems = []
            if entry.max_row_deviation > PROB_TOL:
                problems.append(f"row {worst} sums to {k[worst].sum():.15g}")
            if entry.min_entry < 0.0 or entry.max_entry > 1.0:
                problems.append("entries outside [0, 1]")
            if st.kind in MEMORYLESS_KINDS and n <= 4:
                entry.factorizes = _factorizes(st, k, n, family)
                if not entry.factorizes:
                    problems.append("block kernel differs from product of per-symbol kernels")
            if problems:
                entry.passed = False
                entry.message = f"state {st.id!r}, n={n}: " + "; ".join(problems)
            entries.append(entry)
    return ValidationReport(entries)


def _factorizes(state: ChannelState, table: np.ndarray, n: int, family: ChannelFamily) -> bool:
    mats = state.symbol_kernels(n)
    xs = family.input_alphabet.sequences(n)
    ys = family.output_alphabet.sequences(n)
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            prod = 1.0
            for k in range(n):
                prod *= mats[k][x[k], y[k]]
            if prod != table[i, j]:
                return False
    return True


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
