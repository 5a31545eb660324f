"""Information, entropy and divergence densities and their spectra.

A :class:`Spectrum` is the distribution of a normalized density (nats per
symbol) as sorted atoms.  Rates are estimated from spectra at a ladder of
blocklengths by quantile statistics:

- lower quantile: the largest atom ``R`` with ``agg_s P_s(Z < R) <= tol``
- upper quantile: the smallest atom ``R`` with ``agg_s P_s(Z > R) <= tol``

where ``agg`` is a max over states for the compound (double-bar) rates and a
min over states for the check rate.  Both are attained on atoms, so the
results are exact and grid free.
"""

from __future__ import annotations

import csv
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .channel import (
    PROB_TOL,
    ChannelFamily,
    ChannelState,
    InputDistribution,
    as_index,
    block_kernel,
    check_enumeration,
)
from .errors import DomainError, UnsupportedError, UsageError
from .reports import DiagReport, Verdict, format_float, json_number, write_json

#: Atoms closer than this (nats per symbol) are merged; also the closure width of "<= R".
MERGE_TOL = 1e-12
#: Slack on probability comparisons against a tolerance.
PROB_SLACK = 1e-12
#: Default quantile tolerance for exact spectra.
DEFAULT_TOL = 1e-9

RATE_KINDS = ("inf-compound", "inf-per-state", "sup-compound", "sup-per-state", "check-rate", "eps-rate")


@dataclass
class Spectrum:
    """Distribution of a normalized density as ascending ``(value, probability)`` atoms."""

    n: int
    state_id: str
    values: np.ndarray
    probs: np.ndarray
    mode: str = "exact"
    samples: int | None = None
    seed: int | None = None
    _prefix: np.ndarray = field(init=False, repr=False, compare=False)
    _suffix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.probs = np.asarray(self.probs, dtype=float)
        self._prefix = np.concatenate(([0.0], np.cumsum(self.probs)))
        self._suffix = np.concatenate((np.cumsum(self.probs[::-1])[::-1], [0.0]))

    @classmethod
    def from_pairs(cls, values, weights, n, state_id, mode="exact", samples=None, seed=None,
                   merge_tol=MERGE_TOL) -> "Spectrum":
        """Sort, drop zero-weight entries and merge values within ``merge_tol``."""
        v = np.asarray(values, dtype=float).ravel()
        w = np.asarray(weights, dtype=float).ravel()
        keep = w > 0
        v, w = v[keep], w[keep]
        if not np.all(np.isfinite(v)):
            raise DomainError("infinite density value with positive probability", "values")
        if v.size == 0:
            return cls(n, state_id, v, w, mode, samples, seed)
        # sorting values alone is much cheaper than argsort on large tables;
        # weights are then binned in input order, which is fixed per input
        sv = np.sort(v)
        atoms = sv[np.concatenate(([0], np.flatnonzero(np.diff(sv) > merge_tol) + 1))]
        idx = np.searchsorted(atoms, v, side="right") - 1
        return cls(n, state_id, atoms, np.bincount(idx, weights=w, minlength=atoms.size), mode, samples, seed)

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.values.tolist(), self.probs.tolist()))

    @property
    def total(self) -> float:
        return float(self._prefix[-1])

    def prob_below(self, r: float) -> float:
        """``P(Z < r)``; atoms within the merge tolerance of ``r`` count as equal to it."""
        return float(self._prefix[np.searchsorted(self.values, r - MERGE_TOL, side="left")])

    def prob_at_most(self, r: float) -> float:
        return float(self._prefix[np.searchsorted(self.values, r + MERGE_TOL, side="right")])

    def prob_above(self, r: float) -> float:
        return float(self._suffix[np.searchsorted(self.values, r + MERGE_TOL, side="right")])

    def prob_at_least(self, r: float) -> float:
        return float(self._suffix[np.searchsorted(self.values, r - MERGE_TOL, side="left")])

    def prob_outside(self, center: float, delta: float) -> float:
        """``P(|Z - center| > delta)``."""
        return self.prob_below(center - delta) + self.prob_above(center + delta)

    def negated(self) -> "Spectrum":
        return Spectrum(self.n, self.state_id, -self.values[::-1], self.probs[::-1].copy(),
                        self.mode, self.samples, self.seed)

    def to_csv(self, path, bits: bool = False) -> None:
        scale = 1.0 / math.log(2) if bits else 1.0
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["value_nats_per_symbol" if not bits else "value_bits_per_symbol", "probability"])
            for v, p in zip(self.values, self.probs):
                w.writerow([format_float(v * scale), format_float(p)])

    @classmethod
    def from_csv(cls, path, n: int, state_id: str = "") -> "Spectrum":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if rows[0][0] != "value_nats_per_symbol":
            raise UsageError("spectrum CSV must be in nats", "path")
        data = np.array([[float(a), float(b)] for a, b in rows[1:]]).reshape(-1, 2)
        return cls(n, state_id, data[:, 0], data[:, 1])


@dataclass
class SpectrumStats:
    mean: float
    variance: float
    spectrum: Spectrum = field(repr=False)

    def truncated_mean(self, a: float) -> float:
        """``E[Z 1{Z <= a}]``."""
        sp = self.spectrum
        k = np.searchsorted(sp.values, a + MERGE_TOL, side="right")
        return float(np.dot(sp.values[:k], sp.probs[:k]))


def spectrum_stats(sp: Spectrum) -> SpectrumStats:
    mean = float(np.dot(sp.values, sp.probs))
    var = float(np.dot((sp.values - mean) ** 2, sp.probs))
    return SpectrumStats(mean, max(var, 0.0), sp)


# -- densities -------------------------------------------------------------

def _input_size(input: InputDistribution, n: int, size: int | None) -> int:
    if size is not None:
        return size
    if input.kind == "iid":
        return len(input.params["pmf"])
    if input.kind == "product-of-per-symbol":
        return len(input.params["pmfs"][0])
    if input.kind == "explicit-vector":
        return int(round(len(input.params["probs"]) ** (1.0 / n)))
    raise UsageError("alphabet size needed for codebook inputs", "size")


def info_density(x_seq, y_seq, state: ChannelState, input: InputDistribution, n: int) -> float:
    """``(1/n) ln[p_s(y^n|x^n) / p_s(y^n)]``."""
    kernel = block_kernel(state, n)
    px = input.probs(n, state.input_size)
    x, y = as_index(x_seq, state.input_size), as_index(y_seq, state.output_size)
    if px[x] <= 0 or kernel[x, y] <= 0:
        raise DomainError(f"pair (x={x}, y={y}) has zero probability", "x_seq")
    py = float(np.dot(px, kernel[:, y]))
    return math.log(kernel[x, y] / py) / n


def entropy_density(x_seq, input: InputDistribution, n: int, size: int | None = None) -> float:
    """``-(1/n) ln p(x^n)``."""
    size = _input_size(input, n, size)
    p = input.probs(n, size)[as_index(x_seq, size)]
    if p <= 0:
        raise DomainError("sequence has zero probability", "x_seq")
    return -math.log(p) / n


def divergence_density(x_seq, p: InputDistribution, q: InputDistribution, n: int,
                       size: int | None = None) -> float:
    """``(1/n) ln[p(x^n) / q(x^n)]``."""
    size = _input_size(p, n, size)
    x = as_index(x_seq, size)
    a, b = p.probs(n, size)[x], q.probs(n, size)[x]
    if a <= 0 or b <= 0:
        raise DomainError("sequence has zero probability under p or q", "x_seq")
    return math.log(a / b) / n


def entropy_spectrum(input: InputDistribution, n: int, size: int | None = None) -> Spectrum:
    size = _input_size(input, n, size)
    px = input.probs(n, size)
    with np.errstate(divide="ignore"):
        vals = -np.log(px) / n
    return Spectrum.from_pairs(np.where(px > 0, vals, 0.0), px, n, "entropy")


def divergence_spectrum(p: InputDistribution, q: InputDistribution, n: int,
                        size: int | None = None) -> Spectrum:
    """Spectrum of the divergence density under ``X ~ p``."""
    size = _input_size(p, n, size)
    a, b = p.probs(n, size), q.probs(n, size)
    if np.any((a > 0) & (b <= 0)):
        raise DomainError("p is not absolutely continuous with respect to q", "q")
    support = a > 0
    vals = np.log(a[support] / b[support]) / n
    return Spectrum.from_pairs(vals, a[support], n, "divergence")


def density_table(px: np.ndarray, kernel: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized information density ``ln[p(y|x)/p(y)]`` for every pair and ``p(y)``.

    Entries with ``p(y|x) = 0`` are ``-inf``; entries with ``p(y) = 0 < p(y|x)``
    (possible only for ``x`` outside the input support) are ``+inf``.
    """
    py = (px[:, None] * kernel).sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = np.log(kernel / py[None, :])
    dens[kernel <= 0] = -np.inf
    return dens, py


def spectrum_from_kernel(px: np.ndarray, kernel: np.ndarray, n: int, state_id: str) -> Spectrum:
    support = np.flatnonzero(px > 0)
    if support.size < px.size:
        py = (px[support, None] * kernel[support]).sum(axis=0)
        px, kernel = px[support], kernel[support]
    else:
        py = None
    joint = px[:, None] * kernel
    if py is None:
        py = joint.sum(axis=0)
    mask = joint > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = np.log(kernel / py[None, :])
    return Spectrum.from_pairs(dens[mask] / n, joint[mask], n, state_id)


def _merge(values: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sp = Spectrum.from_pairs(values, weights, 0, "")
    return sp.values, sp.probs


def spectrum_product(n: int, state: ChannelState, input: InputDistribution) -> Spectrum:
    """Exact spectrum for a per-symbol channel driven by a product input.

    Then ``p(y^n)`` factorizes, the density is a sum of independent
    per-symbol terms, and its law is the convolution of the per-symbol laws.
    Atoms are merged after every symbol, so the cost grows with the number
    of distinct partial sums rather than with ``N_x^n N_y^n``.
    """
    mats = state.symbol_kernels(n)
    pmfs = input.symbol_pmfs(n, state.input_size)
    if mats is None or pmfs is None:
        raise UnsupportedError("product spectra need per-symbol kernels and a product input", "state")
    vals, wts = np.zeros(1), np.ones(1)
    for w, p in zip(mats, pmfs):
        joint = p[:, None] * w
        py = joint.sum(axis=0)
        mask = joint > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            dens = np.log(w / py[None, :])
        d, q = _merge(dens[mask], joint[mask])
        v, m = (vals[:, None] + d[None, :]).ravel(), (wts[:, None] * q[None, :]).ravel()
        # products that underflow to zero carry no mass; enumeration drops them too
        keep = m > 0
        vals, wts = _merge(v[keep], m[keep])
    return Spectrum.from_pairs(vals / n, wts, n, state.id)


def spectrum_enumerated(n: int, state: ChannelState, input: InputDistribution, cap: int | None = None) -> Spectrum:
    """Spectrum by enumerating every positive-probability ``(x^n, y^n)`` pair."""
    kernel = block_kernel(state, n, cap)
    return spectrum_from_kernel(input.probs(n, state.input_size), kernel, n, state.id)


def spectrum_exact(n: int, state: ChannelState, input: InputDistribution, cap: int | None = None,
                   method: str = "auto") -> Spectrum:
    """Exact spectrum of ``Z = (1/n) i(X^n; Y^n | s)``.

    ``method='enumerate'`` walks the full pair table; ``'product'`` convolves
    per-symbol laws; ``'auto'`` picks the convolution whenever the state has
    per-symbol kernels and the input is a product measure.  The enumeration
    cap applies in every case so that the admissible ``(n, state)`` range
    does not depend on the method.
    """
    if method not in ("auto", "enumerate", "product"):
        raise UsageError(f"unknown method {method!r}", "method")
    check_enumeration(state.input_size, state.output_size, n, cap)
    if method == "enumerate":
        return spectrum_enumerated(n, state, input, cap)
    product = state.symbol_kernels(n) is not None and input.symbol_pmfs(n, state.input_size) is not None
    if method == "product" or product:
        return spectrum_product(n, state, input)
    return spectrum_enumerated(n, state, input, cap)


def derive_rng(seed: int, state_id: str, purpose: str) -> np.random.Generator:
    """Independent stream per ``(seed, state, purpose)``.

    The 64-bit seed and CRC-32 digests of the state id and purpose string form
    the entropy of a :class:`numpy.random.SeedSequence`, so adding a state never
    perturbs another state's samples.
    """
    if seed < 0 or seed >= 2**64:
        raise UsageError("seed must be a 64-bit unsigned integer", "seed")
    key = [int(seed), zlib.crc32(state_id.encode()), zlib.crc32(purpose.encode())]
    return np.random.default_rng(np.random.SeedSequence(key))


def spectrum_mc(n: int, state: ChannelState, input: InputDistribution, samples: int, seed: int = 0) -> Spectrum:
    """Empirical spectrum from ``samples`` independent ``(x^n, y^n)`` draws.

    Needs a per-symbol channel structure and a product input so that
    ``p_s(y^n)`` factorizes into per-symbol output marginals.
    """
    if samples < 1:
        raise UsageError("samples must be >= 1", "samples")
    mats = state.symbol_kernels(n)
    if mats is None or not state.has_sampler:
        raise UnsupportedError(f"kind {state.kind} has no per-symbol sampler", "state")
    pmfs = input.symbol_pmfs(n, state.input_size)
    if pmfs is None:
        raise UnsupportedError(f"input kind {input.kind} cannot be sampled per symbol", "input")
    rng = derive_rng(seed, state.id, "spectrum")
    u = rng.random((2, samples, n))
    total = np.zeros(samples)
    for k in range(n):
        cdf_x = np.cumsum(pmfs[k])
        x = np.minimum(np.searchsorted(cdf_x, u[0, :, k], side="right"), len(cdf_x) - 1)
        w = mats[k]
        cdf_y = np.cumsum(w, axis=1)[x]
        y = np.minimum((u[1, :, k, None] >= cdf_y).sum(axis=1), w.shape[1] - 1)
        py = pmfs[k] @ w
        total += np.log(w[x, y]) - np.log(py[y])
    counts = Spectrum.from_pairs(total / n, np.ones(samples), n, state.id)
    # relative frequencies from integer counts
    return Spectrum(n, state.id, counts.values, counts.probs / samples, "monte-carlo", samples, seed)


# -- mutual information identities ----------------------------------------

def mutual_information(px: np.ndarray, kernel: np.ndarray) -> float:
    """``I(X;Y)`` in nats for input ``px`` and kernel rows ``p(y|x)``."""
    joint = px[:, None] * kernel
    py = joint.sum(axis=0)
    mask = joint > 0
    ratio = kernel / np.where(py > 0, py, 1.0)[None, :]
    return float(np.sum(joint[mask] * np.log(ratio[mask])))


def symbol_marginals(px: np.ndarray, size: int, n: int) -> list[np.ndarray]:
    """Per-position marginals of a distribution over length-``n`` sequences."""
    cube = px.reshape((size,) * n)
    return [cube.sum(axis=tuple(a for a in range(n) if a != k)) for k in range(n)]


def single_letter_informations(state: ChannelState, input: InputDistribution, n: int) -> np.ndarray:
    """``I(X_k; Y_k | s)`` for ``k = 1..n`` under a per-symbol channel."""
    mats = state.symbol_kernels(n)
    if mats is None:
        raise UnsupportedError(f"kind {state.kind} has no per-symbol kernels", "state")
    pmfs = input.symbol_pmfs(n, state.input_size)
    if pmfs is None:
        pmfs = symbol_marginals(input.probs(n, state.input_size), state.input_size, n)
    return np.array([mutual_information(p, w) for p, w in zip(pmfs, mats)])


def cascade_densities(px: np.ndarray, k1: np.ndarray, k2: np.ndarray) -> dict[str, np.ndarray]:
    """Pointwise densities for the Markov chain ``X -> Y -> Z``.

    Returns unnormalized ``i(x;y)``, ``i(x;z)`` and ``i(x;y|z)`` over all
    triples, each computed from its own marginal, plus the mask of
    positive-probability triples.
    """
    joint = px[:, None, None] * k1[:, :, None] * k2[None, :, :]
    pxy = joint.sum(axis=2)
    pxz = joint.sum(axis=1)
    pyz = joint.sum(axis=0)
    py, pz = pxy.sum(axis=0), pxz.sum(axis=0)
    mask = joint > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        i_xy = np.log(pxy / (px[:, None] * py[None, :]))[:, :, None]
        i_xz = np.log(pxz / (px[:, None] * pz[None, :]))[:, None, :]
        i_xy_z = np.log(joint * pz[None, None, :] / (pxz[:, None, :] * pyz[None, :, :]))
    shape = joint.shape
    return {
        "mask": mask,
        "i_xy": np.broadcast_to(i_xy, shape),
        "i_xz": np.broadcast_to(i_xz, shape),
        "i_xy_given_z": i_xy_z,
    }


# -- compound operators ----------------------------------------------------

def _same_n(spectra: Sequence[Spectrum]) -> None:
    if not spectra:
        raise UsageError("no spectra supplied", "spectra")
    ns = {sp.n for sp in spectra}
    if len(ns) > 1:
        raise UsageError(f"spectra mix blocklengths {sorted(ns)}", "spectra")


def compound_cdf(r: float, spectra: Sequence[Spectrum]) -> float:
    """``sup_s P(Z_s <= r)``."""
    _same_n(spectra)
    return max(sp.prob_at_most(r) for sp in spectra)


def check_tail(r: float, spectra: Sequence[Spectrum]) -> float:
    """``inf_s P(Z_s > r)``."""
    _same_n(spectra)
    return min(sp.prob_above(r) for sp in spectra)


def _candidates(spectra: Sequence[Spectrum]) -> np.ndarray:
    return np.unique(np.concatenate([sp.values for sp in spectra]))


def lower_quantile(spectra: Sequence[Spectrum], tol: float) -> float:
    """Largest atom ``R`` with ``max_s P_s(Z < R) <= tol``; ``-inf`` if none."""
    _same_n(spectra)
    cand = _candidates(spectra)
    if cand.size == 0:
        return -math.inf
    below = np.max([sp._prefix[np.searchsorted(sp.values, cand - MERGE_TOL, side="left")]
                    for sp in spectra], axis=0)
    ok = np.flatnonzero(below <= tol + PROB_SLACK)
    return float(cand[ok[-1]]) if ok.size else -math.inf


def upper_quantile(spectra: Sequence[Spectrum], tol: float, aggregate: str = "max") -> float:
    """Smallest atom ``R`` with ``agg_s P_s(Z > R) <= tol``; ``+inf`` if none."""
    _same_n(spectra)
    cand = _candidates(spectra)
    if cand.size == 0:
        return math.inf
    tails = [sp._suffix[np.searchsorted(sp.values, cand + MERGE_TOL, side="right")] for sp in spectra]
    above = np.max(tails, axis=0) if aggregate == "max" else np.min(tails, axis=0)
    ok = np.flatnonzero(above <= tol + PROB_SLACK)
    return float(cand[ok[0]]) if ok.size else math.inf


def atom_spacing(value: float, spectra: Sequence[Spectrum]) -> float:
    """Smallest gap between ``value`` and its neighbouring atoms across ``spectra``."""
    cand = _candidates(spectra)
    gaps = np.abs(cand - value)
    gaps = gaps[gaps > MERGE_TOL]
    return float(gaps.min()) if gaps.size else 0.0


def trend(values: Sequence[float]) -> str:
    """``monotone-up`` (nondecreasing), ``monotone-down`` (nonincreasing) or ``non-monotone``."""
    pairs = list(zip(values, values[1:]))
    if all(b >= a for a, b in pairs):
        return "monotone-up"
    if all(b <= a for a, b in pairs):
        return "monotone-down"
    return "non-monotone"


@dataclass
class RateEstimate:
    """Finite-n ladder of a quantile statistic approximating an asymptotic rate."""

    kind: str
    tol: float
    ladder: list[tuple[int, float]]
    state_id: str | None = None
    mode: str = "exact"

    def __post_init__(self):
        if not self.ladder:
            raise UsageError("empty ladder", "n_ladder")

    @property
    def value(self) -> float:
        return self.ladder[-1][1]

    @property
    def trend(self) -> str:
        return trend([v for _, v in self.ladder])

    def values(self) -> list[float]:
        return [v for _, v in self.ladder]

    def to_dict(self, bits: bool = False) -> dict:
        scale = 1.0 / math.log(2) if bits else 1.0
        d = {
            "kind": self.kind,
            "tol": self.tol,
            "ladder": [{"n": n, "value": json_number(v * scale)} for n, v in self.ladder],
            "value": json_number(self.value * scale),
            "trend": self.trend,
        }
        if self.state_id is not None:
            d["state_id"] = self.state_id
        if bits:
            d["unit"] = "bits"
        return d

    def write_json(self, path, bits: bool = False) -> None:
        write_json(path, self.to_dict(bits))


def _check_ladder(n_ladder: Sequence[int], tol: float) -> list[int]:
    ladder = [int(n) for n in n_ladder]
    if not ladder:
        raise UsageError("n_ladder is empty", "n_ladder")
    if any(b <= a for a, b in zip(ladder, ladder[1:])) or ladder[0] < 1:
        raise UsageError(f"n_ladder must be strictly increasing positive integers, got {ladder}", "n_ladder")
    if not 0.0 < tol < 1.0:
        raise UsageError(f"tol must lie in (0, 1), got {tol}", "tol")
    return ladder


class CompoundSequenceFamily:
    """A compound random sequence given by its per-state distributions at each ``n``.

    ``evaluator(n)`` returns a list of :class:`Spectrum` (one per state) or of
    ``(values, probabilities)`` pairs.
    """

    def __init__(self, evaluator: Callable[[int], Sequence]):
        self.evaluator = evaluator

    def distributions(self, n: int) -> list[Spectrum]:
        out = []
        for k, item in enumerate(self.evaluator(n)):
            sp = item if isinstance(item, Spectrum) else Spectrum.from_pairs(item[0], item[1], n, str(k))
            if abs(sp.total - 1.0) > PROB_TOL:
                raise UsageError(f"distribution {k} at n={n} sums to {sp.total}", "family")
            out.append(sp)
        return out


def compound_op(family: CompoundSequenceFamily, n_ladder: Sequence[int], tol: float = DEFAULT_TOL,
                mode: str = "inf") -> RateEstimate:
    """Finite-n estimate of the compound infimum (``mode='inf'``) or supremum (``'sup'``).

    ``mode='eps'`` gives the epsilon-rate with ``tol`` as epsilon: the
    largest atom ``R`` with ``max_s P(X_ns < R) <= eps``.
    """
    ladder = _check_ladder(n_ladder, tol)
    kinds = {"inf": "inf-compound", "sup": "sup-compound", "eps": "eps-rate"}
    if mode not in kinds:
        raise UsageError(f"mode must be one of {sorted(kinds)}, got {mode!r}", "mode")
    rungs = []
    for n in ladder:
        dists = family.distributions(n)
        rungs.append((n, upper_quantile(dists, tol, "max") if mode == "sup" else lower_quantile(dists, tol)))
    return RateEstimate(kinds[mode], tol, rungs)


# -- family-level estimators ----------------------------------------------

class SpectrumCache:
    """Memo of spectra keyed by ``(state_id, n)`` for one family and one input."""

    def __init__(self):
        self._store: dict[tuple[str, int], Spectrum] = {}

    def get(self, key):
        return self._store.get(key)

    def put(self, key, sp):
        self._store[key] = sp


def family_spectra(family: ChannelFamily, input: InputDistribution, n: int,
                   states: Sequence[ChannelState] | None = None, *, mc_samples: int | None = None,
                   seed: int = 0, workers: int = 1, cap: int | None = None,
                   cache: SpectrumCache | None = None) -> list[Spectrum]:
    """Spectra of every state at ``n`` (exact unless ``mc_samples`` is given).

    ``workers > 1`` evaluates states on a thread pool; results are returned in
    state order and are identical to serial evaluation.
    """
    states = family.states_at(n) if states is None else list(states)

    def one(st):
        if cache is not None:
            hit = cache.get((st.id, n))
            if hit is not None:
                return hit
        if mc_samples is None:
            sp = spectrum_exact(n, st, input, cap)
        else:
            sp = spectrum_mc(n, st, input, mc_samples, seed)
        if cache is not None:
            cache.put((st.id, n), sp)
        return sp

    if workers > 1 and len(states) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, states))
    return [one(st) for st in states]


def rate_estimate(kind: str, family: ChannelFamily, input: InputDistribution, n_ladder: Sequence[int],
                  tol: float = DEFAULT_TOL, *, state_id: str | None = None, mc_samples: int | None = None,
                  seed: int = 0, workers: int = 1, cap: int | None = None,
                  cache: SpectrumCache | None = None) -> RateEstimate:
    """Ladder estimate of one of the asymptotic rates.

    ``kind``:

    - ``inf-compound`` / ``eps-rate``: lower quantile with max over states
      (``tol`` plays the role of epsilon for ``eps-rate``)
    - ``inf-per-state`` / ``sup-per-state``: single state ``state_id``
    - ``sup-compound``: upper quantile with max over states
    - ``check-rate``: upper quantile with min over states
    """
    if kind not in RATE_KINDS:
        raise UsageError(f"unknown rate kind {kind!r}", "kind")
    ladder = _check_ladder(n_ladder, tol)
    mode = "exact"
    if mc_samples is not None:
        if tol <= 4.0 / math.sqrt(mc_samples):
            raise UsageError(f"tol={tol} must exceed 4/sqrt(samples)={4 / math.sqrt(mc_samples):.3g}", "tol")
        mode = "monte-carlo"
    fixed = None
    if kind.endswith("per-state"):
        if state_id is None:
            probe = family.probe_states(ladder)
            if len(probe) != 1:
                raise UsageError("per-state rates need state_id", "state_id")
            state_id = probe[0].id
        fixed = [family.state(state_id)]
    rungs = []
    for n in ladder:
        spectra = family_spectra(family, input, n, fixed, mc_samples=mc_samples, seed=seed,
                                 workers=workers, cap=cap, cache=cache)
        if kind in ("inf-compound", "eps-rate", "inf-per-state"):
            v = lower_quantile(spectra, tol)
        elif kind == "check-rate":
            v = upper_quantile(spectra, tol, "min")
        else:
            v = upper_quantile(spectra, tol, "max")
        rungs.append((n, v))
    return RateEstimate(kind, tol, rungs, state_id if fixed else None, mode)


def per_state_estimates(family: ChannelFamily, input: InputDistribution, n_ladder: Sequence[int],
                        tol: float = DEFAULT_TOL, kind: str = "inf-per-state",
                        states: Iterable[ChannelState] | None = None, **kw) -> dict[str, RateEstimate]:
    """Per-state ladders for every state present at the bottom rung (or ``states``)."""
    states = family.probe_states(n_ladder) if states is None else list(states)
    return {st.id: rate_estimate(kind, family, input, n_ladder, tol, state_id=st.id, **kw) for st in states}


def stability_diag(family: ChannelFamily, input: InputDistribution, n_ladder: Sequence[int], delta: float,
                   reference_rate: float | None = None, *, cap: int | None = None,
                   workers: int = 1) -> DiagReport:
    """Concentration diagnostics of the spectra along a ladder.

    Per rung: the largest variance over states, the largest probability of a
    deviation beyond ``delta`` from the state's own mean and, given a
    reference rate, the smallest and largest probability of deviating from it
    together with the state attaining the smallest (a worst-state sequence).
    """
    ladder = _check_ladder(n_ladder, 0.5)
    rep = DiagReport("stability", labels={"delta": delta, "reference_rate": reference_rate,
                                          "worst_state_sequence": {}})
    sup_vars = []
    for n in ladder:
        spectra = family_spectra(family, input, n, cap=cap, workers=workers)
        stats = [spectrum_stats(sp) for sp in spectra]
        for sp, st in zip(spectra, stats):
            rep.add(n, "variance", st.variance, sp.state_id)
            rep.add(n, "mean", st.mean, sp.state_id)
        sup_var = max(st.variance for st in stats)
        sup_vars.append(sup_var)
        rep.add(n, "sup_variance", sup_var)
        rep.add(n, "sup_prob_deviation_from_mean",
                max(sp.prob_outside(st.mean, delta) for sp, st in zip(spectra, stats)))
        if reference_rate is not None:
            devs = [sp.prob_outside(reference_rate, delta) for sp in spectra]
            k = int(np.argmin(devs))
            rep.add(n, "inf_prob_deviation_from_reference", devs[k])
            rep.add(n, "sup_prob_deviation_from_reference", max(devs))
            rep.labels["worst_state_sequence"][str(n)] = spectra[k].state_id
    steps = [b - a for a, b in zip(sup_vars, sup_vars[1:])]
    rep.scalars["max_sup_variance_increment"] = max(steps) if steps else 0.0
    rep.verdicts["sup_variance_nonincreasing"] = Verdict("<=", rep.scalars["max_sup_variance_increment"], 0.0)
    rep.tag("nats", "mean")
    rep.tag("nats^2", "variance", "sup_variance", "max_sup_variance_increment", "sup_variance_nonincreasing")
    return rep
