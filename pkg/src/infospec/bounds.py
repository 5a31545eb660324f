"""Achievability and converse bounds plus higher-level capacity diagnostics.

All capacity figures produced here are restricted to the supplied input list
and to the finite ladder of blocklengths; they are labelled as such in every
report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .channel import ChannelFamily, InputDistribution, block_kernel
from .coding import Codebook, ErrorReport, code_spectrum, error_probabilities
from .errors import UsageError
from .reports import DiagReport, Verdict, json_number, write_json
from .spectrum import (
    DEFAULT_TOL,
    RateEstimate,
    SpectrumCache,
    _check_ladder,
    atom_spacing,
    family_spectra,
    lower_quantile,
    per_state_estimates,
    rate_estimate,
    spectrum_from_kernel,
    spectrum_stats,
)

#: Slack for sandwich and realizability verdicts.
BOUND_SLACK = 1e-12
#: Fixed part of the equality tolerance for rate verdicts.
RATE_SLACK = 1e-9
#: Default gamma grid for codebook construction and bound evaluation.
GAMMA_GRID = (0.05, 0.1, 0.15, 0.2, 0.3)

INPUT_RESTRICTED = "capacity figures are maxima over the supplied inputs only (lower bounds on the sup over all inputs)"


def _clamp(p: float) -> float:
    return min(1.0, max(0.0, p))


def feinstein_bound(n: int, r_n: float, gamma: float, family: ChannelFamily, input: InputDistribution,
                    cap: int | None = None) -> float:
    """``max_s P(Z_ns <= r_n + gamma) + e^{-gamma n}``, clamped to ``[0, 1]``."""
    if not gamma > 0:
        raise UsageError(f"gamma must be positive, got {gamma}", "gamma")
    spectra = family_spectra(family, input, n, cap=cap)
    return _clamp(max(sp.prob_at_most(r_n + gamma) for sp in spectra) + math.exp(-gamma * n))


def verdu_han_bound(codebook: Codebook, gamma: float, family: ChannelFamily, cap: int | None = None) -> float:
    """``max(0, max_s P(Z_ns <= r_n - gamma) - e^{-gamma n})`` under the uniform codeword input."""
    if not gamma > 0:
        raise UsageError(f"gamma must be positive, got {gamma}", "gamma")
    cs = code_spectrum(codebook, family, cap)
    worst = max(sp.prob_at_most(cs.rate - gamma) for sp in cs.spectra.values())
    return _clamp(worst - math.exp(-gamma * codebook.n))


def best_gamma(bound_kind: str, grid: Sequence[float], **context) -> tuple[float, float]:
    """Grid point minimizing the Feinstein bound or maximizing the Verdu-Han bound.

    ``context`` holds the keyword arguments of the bound other than
    ``gamma``.  Ties go to the smallest gamma.
    """
    if not grid:
        raise UsageError("gamma grid is empty", "grid")
    if bound_kind == "feinstein":
        evaluate, better = (lambda g: feinstein_bound(gamma=g, **context)), (lambda a, b: a < b)
    elif bound_kind == "verdu-han":
        evaluate, better = (lambda g: verdu_han_bound(gamma=g, **context)), (lambda a, b: a > b)
    else:
        raise UsageError(f"unknown bound kind {bound_kind!r}", "bound_kind")
    best = None
    for g in sorted(float(g) for g in grid):
        v = evaluate(g)
        if best is None or better(v, best[1]):
            best = (g, v)
    return best


@dataclass
class BoundReport:
    """Bounds at one gamma next to the measured errors of a codebook."""

    n: int
    rate: float
    gamma: float
    feinstein_upper: float
    verdu_han_lower: float
    measured: ErrorReport | None = None
    lambda_n: float | None = None

    def verdicts(self) -> dict[str, Verdict]:
        out = {}
        if self.measured is not None:
            out["lower_le_avg"] = Verdict("<=", self.verdu_han_lower, self.measured.compound_avg, BOUND_SLACK)
            out["avg_le_max"] = Verdict("<=", self.measured.compound_avg, self.measured.compound_max, BOUND_SLACK)
            if self.lambda_n is not None:
                out["max_le_lambda"] = Verdict("<=", self.measured.compound_max, self.lambda_n, BOUND_SLACK)
        return out

    def to_dict(self) -> dict:
        d = {
            "n": self.n,
            "rate_nats": self.rate,
            "gamma": self.gamma,
            "feinstein_upper": self.feinstein_upper,
            "verdu_han_lower": self.verdu_han_lower,
            "lambda_n": json_number(self.lambda_n),
            "measured": self.measured.to_dict() if self.measured is not None else None,
            "verdicts": {k: {"relation": v.relation, "lhs": v.lhs, "rhs": v.rhs, "slack": v.slack,
                             "holds": v.holds} for k, v in self.verdicts().items()},
        }
        return d


def sandwich(codebook: Codebook, family: ChannelFamily, gammas: Sequence[float],
             input: InputDistribution | None = None, cap: int | None = None) -> list[BoundReport]:
    """Converse and achievability bounds around the codebook's exact errors.

    ``lambda_n`` is attached only at the codebook's own construction gamma;
    at other grid points the Feinstein value is existential and carries no
    claim about this particular code.
    """
    measured = error_probabilities(codebook, family, cap)
    inp = input or codebook.input
    out = []
    for g in gammas:
        upper = feinstein_bound(codebook.n, codebook.rate, g, family, inp, cap) if inp is not None else math.nan
        lower = verdu_han_bound(codebook, g, family, cap)
        own = math.isclose(g, codebook.gamma, rel_tol=0.0, abs_tol=1e-15) and codebook.guaranteed
        out.append(BoundReport(codebook.n, codebook.rate, float(g), upper, lower, measured,
                               codebook.lambda_n if own else None))
    return out


def sandwich_report(codebook: Codebook, family: ChannelFamily, gammas: Sequence[float],
                    input: InputDistribution | None = None, cap: int | None = None) -> dict:
    reports = sandwich(codebook, family, gammas, input, cap)
    holds = all(v.holds for r in reports for v in r.verdicts().values())
    return {"codebook_lambda_n": codebook.lambda_n, "codebook_gamma": codebook.gamma,
            "guaranteed": codebook.guaranteed, "all_hold": holds,
            "reports": [r.to_dict() for r in reports]}


# -- diagnostics ----------------------------------------------------------

def _rate_tolerance(values: Sequence[float], spectra_lists: Sequence[Sequence]) -> float:
    spacing = max((atom_spacing(v, sp) for v, sp in zip(values, spectra_lists) if math.isfinite(v)),
                  default=0.0)
    return RATE_SLACK + 0.5 * spacing


def strong_converse_diag(family: ChannelFamily, inputs: Sequence[InputDistribution], n_ladder: Sequence[int],
                         tol: float = DEFAULT_TOL, *, reference_rate: float | None = None, delta: float = 0.05,
                         cap: int | None = None, workers: int = 1) -> DiagReport:
    """Compare the compound inf-rate with the check rate across the inputs.

    Also records, per rung, the state minimizing ``P(|Z_ns - R*| > delta)``
    for the best input, where ``R*`` is ``reference_rate`` or the best
    inf-compound estimate.
    """
    if not inputs:
        raise UsageError("inputs must be non-empty", "inputs")
    ladder = _check_ladder(n_ladder, tol)
    rep = DiagReport("strong-converse", labels={"inputs": [i.to_dict() for i in inputs], "tol": tol,
                                                 "delta": delta, "scope": INPUT_RESTRICTED})
    infs, checks, caches = [], [], []
    for k, inp in enumerate(inputs):
        cache = SpectrumCache()
        caches.append(cache)
        lo = rate_estimate("inf-compound", family, inp, ladder, tol, cap=cap, workers=workers, cache=cache)
        hi = rate_estimate("check-rate", family, inp, ladder, tol, cap=cap, workers=workers, cache=cache)
        for (n, a), (_, b) in zip(lo.ladder, hi.ladder):
            rep.add(n, f"inf_compound[{k}]", a)
            rep.add(n, f"check_rate[{k}]", b)
        infs.append(lo.value)
        checks.append(hi.value)
    top = ladder[-1]
    bi, bc = int(np.argmax(infs)), int(np.argmax(checks))
    top_spectra = lambda k: family_spectra(family, inputs[k], top, cap=cap, cache=caches[k])
    slack = _rate_tolerance([infs[bi], checks[bc]], [top_spectra(bi), top_spectra(bc)])
    rep.scalars.update({"max_inf_compound": infs[bi], "max_check_rate": checks[bc], "rate_slack": slack})
    rep.verdicts["consistent_with_strong_converse"] = Verdict("==", infs[bi], checks[bc], slack)
    ref = infs[bi] if reference_rate is None else reference_rate
    rep.scalars["reference_rate"] = ref
    worst = {}
    for n in ladder:
        spectra = family_spectra(family, inputs[bi], n, cap=cap, cache=caches[bi])
        devs = [sp.prob_outside(ref, delta) for sp in spectra]
        j = int(np.argmin(devs))
        worst[str(n)] = spectra[j].state_id
        rep.add(n, "min_prob_deviation", devs[j], spectra[j].state_id)
    rep.labels["worst_state_sequence"] = worst
    rep.tag("nats", "inf_compound", "check_rate", "max_inf_compound", "max_check_rate", "rate_slack",
            "reference_rate", "consistent_with_strong_converse")
    return rep


def uniformity_diag(family: ChannelFamily, input: InputDistribution, n_ladder: Sequence[int],
                    gamma_list: Sequence[float], tol: float = 0.05, *, reference_rate: float | None = None,
                    cap: int | None = None, workers: int = 1) -> DiagReport:
    """Uniform-convergence diagnostic for ``f_n(s) = P(Z_ns <= R_ref - gamma)``.

    ``R_ref`` defaults to the smallest top-rung spectrum mean over the probe
    states, a finite-n proxy for the smallest per-state rate.  The verdict
    ``uniformity_consistent[gamma]`` holds when ``max_s f_n(s)`` at the top
    rung is at most ``tol``.  The weakly-decreasing witness
    ``delta_m = max(0, max_{n >= m, s} f_n(s) - f_m(s))`` is computed over the
    probe states.
    """
    ladder = _check_ladder(n_ladder, tol)
    cache = SpectrumCache()
    probe = family.probe_states(ladder)
    if reference_rate is None:
        tops = family_spectra(family, input, ladder[-1], probe, cap=cap, workers=workers, cache=cache)
        reference_rate = min(spectrum_stats(sp).mean for sp in tops)
    rep = DiagReport("uniformity", labels={"tol": tol, "gammas": list(gamma_list),
                                            "probe_states": [s.id for s in probe]})
    rep.scalars["reference_rate"] = reference_rate
    for g in gamma_list:
        probe_f = np.zeros((len(ladder), len(probe)))
        sups = []
        for i, n in enumerate(ladder):
            spectra = family_spectra(family, input, n, cap=cap, workers=workers, cache=cache)
            f = [sp.prob_at_most(reference_rate - g) for sp in spectra]
            sups.append(max(f))
            rep.add(n, f"sup_f[gamma={g}]", max(f))
            pspec = family_spectra(family, input, n, probe, cap=cap, workers=workers, cache=cache)
            probe_f[i] = [sp.prob_at_most(reference_rate - g) for sp in pspec]
        rep.verdicts[f"uniformity_consistent[gamma={g}]"] = Verdict("<=", sups[-1], tol)
        witness = []
        for i in range(len(ladder)):
            d = float(np.max(probe_f[i:] - probe_f[i][None, :]))
            witness.append(max(0.0, d))
            rep.add(ladder[i], f"delta_m[gamma={g}]", witness[-1])
        rep.labels[f"delta_m[gamma={g}]"] = witness
        steps = max((b - a for a, b in zip(witness, witness[1:])), default=0.0)
        rep.verdicts[f"weakly_decreasing_witness[gamma={g}]"] = Verdict("<=", steps, 0.0)
    rep.tag("nats", "reference_rate")
    return rep


def worst_case_vs_compound(family: ChannelFamily, inputs: Sequence[InputDistribution], n_ladder: Sequence[int],
                           tol: float = DEFAULT_TOL, *, cap: int | None = None, workers: int = 1) -> DiagReport:
    """Worst-case capacity estimate ``min_s max_x`` against the compound ``max_x min``.

    Per-state rates are evaluated on the probe states (those present at the
    bottom rung), each followed up the ladder.
    """
    if not inputs:
        raise UsageError("inputs must be non-empty", "inputs")
    ladder = _check_ladder(n_ladder, tol)
    rep = DiagReport("worst-case", labels={"inputs": [i.to_dict() for i in inputs], "tol": tol,
                                            "scope": INPUT_RESTRICTED})
    compound, per_state = [], []
    for k, inp in enumerate(inputs):
        cache = SpectrumCache()
        est = rate_estimate("inf-compound", family, inp, ladder, tol, cap=cap, workers=workers, cache=cache)
        compound.append(est.value)
        for n, v in est.ladder:
            rep.add(n, f"inf_compound[{k}]", v)
        ps = per_state_estimates(family, inp, ladder, tol, cap=cap, cache=cache)
        per_state.append({sid: e.value for sid, e in ps.items()})
    ids = list(per_state[0])
    best_per_state = {sid: max(range(len(inputs)), key=lambda k: (per_state[k][sid], -k)) for sid in ids}
    cw_state = min(ids, key=lambda sid: per_state[best_per_state[sid]][sid])
    c_w = per_state[best_per_state[cw_state]][cw_state]
    kc = max(range(len(inputs)), key=lambda k: (compound[k], -k))
    c_c = compound[kc]
    rep.scalars.update({"C_w": c_w, "C_c": c_c, "gap": c_w - c_c})
    for sid in ids:
        rep.add(ladder[-1], "per_state_best", per_state[best_per_state[sid]][sid], sid)
    rep.labels.update({"worst_state": cw_state, "compound_input": kc, "worst_state_input": best_per_state[cw_state]})
    rep.labels["saddle_point"] = bool(kc == best_per_state[cw_state] or
                                      per_state[kc][cw_state] == c_w)
    rep.verdicts["C_c_le_C_w"] = Verdict("<=", c_c, c_w, RATE_SLACK)
    rep.tag("nats", "inf_compound", "per_state_best", "C_w", "C_c", "gap", "C_c_le_C_w")
    return rep


def geometric_weights(ratio: float = 0.5) -> Callable[[int, Sequence], np.ndarray]:
    """Weights ``(1 - r) r^(k-1)`` over states in order, tail mass on the last state."""
    if not 0.0 < ratio < 1.0:
        raise UsageError(f"ratio must lie in (0, 1), got {ratio}", "ratio")

    def weights(n, states):
        m = len(states)
        w = (1.0 - ratio) * ratio ** np.arange(m)
        w[-1] = ratio ** (m - 1)
        return w

    return weights


def _resolve_weights(weights, n, states) -> np.ndarray:
    w = np.asarray(weights(n, states) if callable(weights) else weights, dtype=float)
    if w.shape != (len(states),):
        raise UsageError(f"{w.size} weights for {len(states)} states at n={n}", "weights")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise UsageError("weights must be nonnegative and sum to 1", "weights")
    return w


def mixture_kernel(family: ChannelFamily, weights, n: int, cap: int | None = None) -> np.ndarray:
    """``sum_s alpha_s p_s(y^n | x^n)`` over the states present at ``n``."""
    states = family.states_at(n)
    w = _resolve_weights(weights, n, states)
    out = None
    for a, st in zip(w, states):
        if a > 0:
            term = a * block_kernel(st, n, cap)
            out = term if out is None else out + term
    return out


def mixed_capacity_estimate(family: ChannelFamily, weights, inputs: Sequence[InputDistribution],
                            n_ladder: Sequence[int], tol: float = DEFAULT_TOL, *, cap: int | None = None,
                            workers: int = 1) -> DiagReport:
    """Mixed-channel rate estimates next to the compound estimate.

    ``weights`` is a list (one per state at every rung) or a callable
    ``weights(n, states)``.  Three figures are reported, each maximized over
    the inputs: the inf-quantile of the single mixture channel's spectrum
    (``C_mix``), the smallest per-state inf rate over probe states with
    positive weight (``C_mix_formula``), and the compound inf-rate (``C_c``).
    """
    if not inputs:
        raise UsageError("inputs must be non-empty", "inputs")
    ladder = _check_ladder(n_ladder, tol)
    rep = DiagReport("mixed", labels={"tol": tol, "scope": INPUT_RESTRICTED})
    mix_vals, formula_vals, comp_vals, comp_spectra, mix_spectra = [], [], [], [], []
    probe = family.probe_states(ladder)
    pw = _resolve_weights(weights, ladder[0], probe)
    positive = [st for st, a in zip(probe, pw) if a > 0]
    for k, inp in enumerate(inputs):
        mix_ladder = []
        for n in ladder:
            kern = mixture_kernel(family, weights, n, cap)
            sp = spectrum_from_kernel(inp.probs(n, family.nx), kern, n, "mixture")
            v = lower_quantile([sp], tol)
            mix_ladder.append((n, v))
            rep.add(n, f"C_mix[{k}]", v)
        mix_spectra.append(sp)
        mix_vals.append(RateEstimate("inf-per-state", tol, mix_ladder, "mixture"))
        cache = SpectrumCache()
        comp = rate_estimate("inf-compound", family, inp, ladder, tol, cap=cap, workers=workers, cache=cache)
        for n, v in comp.ladder:
            rep.add(n, f"C_c[{k}]", v)
        comp_vals.append(comp)
        comp_spectra.append(family_spectra(family, inp, ladder[-1], cap=cap, cache=cache))
        ps = per_state_estimates(family, inp, ladder, tol, states=positive, cap=cap, cache=cache)
        formula_vals.append(min(e.value for e in ps.values()))
    km = int(np.argmax([e.value for e in mix_vals]))
    kc = int(np.argmax([e.value for e in comp_vals]))
    c_mix, c_c = mix_vals[km].value, comp_vals[kc].value
    rep.scalars.update({"C_mix": c_mix, "C_mix_formula": max(formula_vals), "C_c": c_c,
                        "C_mix_minus_C_c": c_mix - c_c})
    rep.labels["C_mix_trend"] = mix_vals[km].trend
    slack = _rate_tolerance([c_c, c_mix], [comp_spectra[kc], [mix_spectra[km]]])
    # ln p_mix(y|x) >= ln a_s + ln p_s(y|x): weights shift mixture densities by up to ln(1/a_s)/n.
    top = ladder[-1]
    wt = _resolve_weights(weights, top, family.states_at(top))
    offset = float(np.max(-np.log(wt[wt > 0]))) / top
    rep.scalars.update({"rate_slack": slack, "weight_offset": offset})
    rep.verdicts["C_c_le_C_mix"] = Verdict("<=", c_c, c_mix, slack)
    rep.verdicts["C_mix_eq_C_c"] = Verdict("==", c_mix, c_c, slack)
    rep.verdicts["C_mix_near_C_c"] = Verdict("==", c_mix, c_c, slack + offset)
    rep.verdicts["C_mix_formula_eq_C_c"] = Verdict("==", max(formula_vals), c_c, slack)
    rep.tag("nats", "C_mix", "C_c", "C_mix_formula", "C_mix_minus_C_c", "rate_slack", "weight_offset",
            "C_c_le_C_mix", "C_mix_eq_C_c", "C_mix_near_C_c", "C_mix_formula_eq_C_c")
    return rep
