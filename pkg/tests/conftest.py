"""Shared fixtures and brute-force reference computations.

The reference helpers loop over explicit symbol tuples with the standard
library only, so they share no code path with the vectorized package.
"""

import itertools
import math
import time

import numpy as np
import pytest

from infospec import ChannelFamily, ChannelState, InputDistribution

SUITE_BUDGET_SECONDS = 300.0
_START = {}
#: criterion number -> (title, list of test outcomes)
_CRITERIA: dict[int, tuple[str, list[bool]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, title): acceptance criterion the test belongs to")


def pytest_sessionstart(session):
    _START["t"] = time.perf_counter()


def pytest_collection_modifyitems(session, config, items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            k, title = mark.args
            _CRITERIA.setdefault(k, (title, []))
            item.user_properties.append(("criterion", k))


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _CRITERIA[crit][1].append(report.outcome == "passed")


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _START.get("t", time.perf_counter())
    session.config._suite_elapsed = elapsed
    if elapsed >= SUITE_BUDGET_SECONDS and session.exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    elapsed = getattr(config, "_suite_elapsed", None)
    if elapsed is None:
        return
    in_budget = elapsed < SUITE_BUDGET_SECONDS
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        title, outcomes = _CRITERIA[k]
        ok = bool(outcomes) and all(outcomes)
        extra = ""
        if k == 10:
            ok = ok and in_budget
            extra = f" (suite wall-clock {elapsed:.1f}s, budget {SUITE_BUDGET_SECONDS:.0f}s)"
        terminalreporter.write_line(f"CRITERION {k}: {'PASS' if ok else 'FAIL'} - {title}{extra}")
    terminalreporter.write_line(
        f"suite wall-clock {elapsed:.1f}s < {SUITE_BUDGET_SECONDS:.0f}s: {'PASS' if in_budget else 'FAIL'}"
    )


def binary_entropy(q):
    """H(q) in nats."""
    if q in (0.0, 1.0):
        return 0.0
    return -q * math.log(q) - (1 - q) * math.log(1 - q)


def bsc(q, sid=None):
    return ChannelState(sid or f"q={q}", "memoryless-stationary", {"crossover": q})


def family_of(*states, nx=2, ny=2):
    return ChannelFamily(nx, ny, list(states))


def seq_prob(pmfs, seq):
    p = 1.0
    for pmf, s in zip(pmfs, seq):
        p *= pmf[s]
    return p


def ref_joint(state, input_pmf, n):
    """Dict ``(x, y) -> (p(x), p(y|x))`` from per-symbol kernels, by explicit loops."""
    mats = state.symbol_kernels(n)
    nx, ny = mats[0].shape
    out = {}
    for x in itertools.product(range(nx), repeat=n):
        px = seq_prob([input_pmf] * n, x)
        for y in itertools.product(range(ny), repeat=n):
            pyx = 1.0
            for k in range(n):
                pyx *= float(mats[k][x[k]][y[k]])
            out[(x, y)] = (px, pyx)
    return out


def ref_mutual_information(state, input_pmf, n):
    """``(1/n) I(X^n; Y^n)`` by direct summation over sequence pairs."""
    joint = ref_joint(state, input_pmf, n)
    py = {}
    for (x, y), (px, pyx) in joint.items():
        py[y] = py.get(y, 0.0) + px * pyx
    total = 0.0
    for (x, y), (px, pyx) in joint.items():
        if px * pyx > 0:
            total += px * pyx * math.log(pyx / py[y])
    return total / n


def ref_spectrum(state, input_pmf, n):
    """Sorted ``(value, prob)`` list from explicit loops, merged at 1e-12."""
    joint = ref_joint(state, input_pmf, n)
    py = {}
    for (x, y), (px, pyx) in joint.items():
        py[y] = py.get(y, 0.0) + px * pyx
    pairs = sorted((math.log(pyx / py[y]) / n, px * pyx) for (x, y), (px, pyx) in joint.items() if px * pyx > 0)
    merged = []
    for v, p in pairs:
        if merged and v - merged[-1][0] <= 1e-12:
            merged[-1][1] += p
        else:
            merged.append([v, p])
    return merged


@pytest.fixture
def uniform2():
    return InputDistribution.uniform(2)


@pytest.fixture
def identity_family():
    return family_of(bsc(0.0, "id"))
