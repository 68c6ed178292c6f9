"""Deletion channel, poissonization, splitting, and the trace testers."""

import itertools
import math
from collections import Counter

import numpy as np
import pytest

from paritylab.core import parity_trace, sample_poissonized
from paritylab.deletion import (
    DeletionChannel,
    TraceTestSpec,
    deletion_trace,
    learn_k_alternating,
    poissonize,
    split_traces,
    uniform_block_string,
)
from paritylab.deletion import test_n_block as nblock_verdict
from paritylab.deletion import test_uniform_n_block as ublock_verdict
from paritylab.deletion import test_uniform_n_block_multitrace as multi_verdict
from paritylab.deletion import trace_spec_distribution
from paritylab.editdist import psi_inv, uniform_density


def test_channel_validation():
    with pytest.raises(ValueError):
        DeletionChannel(0.0)
    assert DeletionChannel(0.7).delta == pytest.approx(0.3)


def test_deletion_trace_extremes():
    x = "1100101"
    assert deletion_trace(x, 1.0, 0) == x
    assert deletion_trace("", 0.5, 0) == ""
    short = deletion_trace(x, 1e-9, 0)
    assert short == ""


def test_deletion_trace_length_binomial():
    x = "10" * 200
    rho = 0.3
    lens = np.array([len(deletion_trace(x, rho, t)) for t in range(4000)])
    mean = rho * len(x)
    sigma = math.sqrt(len(x) * rho * (1 - rho))
    assert abs(lens.mean() - mean) <= 3 * sigma / math.sqrt(len(lens))


def test_poissonize_empty_and_rho_validation():
    assert poissonize("", 0.5, 0) == ""
    with pytest.raises(ValueError):
        poissonize("101", 1.0, 0)


def test_poissonize_expected_length():
    # per surviving symbol the output count averages lambda/rho
    x = "110010" * 40
    rho = 0.5
    lam = math.log(1 / (1 - rho))
    total = sum(
        len(poissonize(deletion_trace(x, rho, (1, t)), rho, (2, t)))
        for t in range(3000)
    )
    expect = 3000 * len(x) * lam
    sd = math.sqrt(3000 * len(x) * (lam + lam**2))
    assert abs(total - expect) <= 4 * sd


def run_histogram(traces):
    hist = Counter()
    for t in traces:
        if not t:
            hist[("empty", 0)] += 1
            continue
        for sym, grp in itertools.groupby(t):
            hist[(sym, len(list(grp)))] += 1
    return hist


def hist_tv(h1, h2):
    keys = set(h1) | set(h2)
    t1 = sum(h1.values())
    t2 = sum(h2.values())
    return sum(abs(h1[k] / t1 - h2[k] / t2) for k in keys) / 2


def test_poissonize_distribution_matches_direct_sampling():
    # pipeline trace -> poissonize equals a Poissonized parity-trace draw
    x = "110010"
    rho = 0.5
    lam = math.log(1 / (1 - rho))
    trials = 30000
    pipeline = [
        poissonize(deletion_trace(x, rho, (3, t)), rho, (4, t)) for t in range(trials)
    ]
    pair = trace_spec_distribution(x)
    direct = [
        parity_trace(sample_poissonized(pair, len(x) * lam, (5, t)))
        for t in range(trials)
    ]
    assert hist_tv(run_histogram(pipeline), run_histogram(direct)) <= 0.02


def test_split_per_symbol_tv_bound():
    # exact closed form: TV(Poisson(lam), Bernoulli(rho)) = 1-e^-lam(1+lam) <= lam^2
    for lam in (0.001, 0.01, 0.05, 0.1):
        tv = 1 - math.exp(-lam) * (1 + lam)
        assert tv <= lam**2


def test_split_traces_shapes_and_precondition():
    pi = uniform_density(4)
    with pytest.raises(ValueError):
        split_traces(pi, 16, 2, rho=0.5, seed=0)
    rho = 1.0 / (20 * math.sqrt(2 * 16)) * 0.9
    traces = split_traces(pi, 16, 2, rho=rho, seed=0)
    assert len(traces) == 2


def test_split_traces_against_independent_traces():
    # two-sample run histogram comparison at a tiny instance
    n_chars, k = 16, 2
    rho = 1.0 / (40 * math.sqrt(k * n_chars))
    pi = psi_inv(uniform_block_string(n_chars, 4))
    x = uniform_block_string(n_chars, 4)
    trials = 20000
    split_out = []
    for t in range(trials):
        split_out.extend(split_traces(pi, n_chars, k, rho, (6, t)))
    direct = [deletion_trace(x, rho, (7, t)) for t in range(trials * k)]
    assert hist_tv(run_histogram(split_out), run_histogram(direct)) <= 0.02


def brute_best_error(bits, k):
    m = len(bits)
    best = m + 1
    for first in (0, 1):
        for ncuts in range(k + 1):
            for cuts in itertools.combinations(range(1, m), ncuts):
                err = 0
                v = first
                prev = 0
                for c in list(cuts) + [m]:
                    err += sum(1 for b in bits[prev:c] if b != v)
                    v = 1 - v
                    prev = c
                best = min(best, err)
    return best


def test_learner_exhaustive_small():
    rng = np.random.default_rng(8)
    for _ in range(150):
        m = int(rng.integers(1, 13))
        k = int(rng.integers(0, 4))
        bits = rng.integers(0, 2, size=m).tolist()
        model = learn_k_alternating(list(enumerate(bits)), k)
        assert model.error == brute_best_error(bits, k)
        assert model.n_alternations <= k
        preds = model.predict(np.arange(m))
        assert int(np.sum(preds != np.asarray(bits))) == model.error


def test_learner_consistent_sample_and_majority():
    model = learn_k_alternating([(0, 1), (3, 1), (7, 0), (9, 0)], 1)
    assert model.error == 0
    maj = learn_k_alternating([(0, 1), (1, 0), (2, 1), (3, 1)], 0)
    assert maj.error == 1  # best constant function
    assert maj.n_alternations == 0


def test_learner_requires_sorted_positions():
    with pytest.raises(ValueError):
        learn_k_alternating([(3, 1), (0, 0)], 1)


DESK = dict(n_chars=4096, n_blocks=16, epsilon=0.4)


def test_nblock_tester_accepts_empty_trace():
    spec = TraceTestSpec(rho=0.03, property_name="n_block", **DESK)
    v = nblock_verdict("", spec, seed=0)
    assert v.accept and v.statistics["warning"] == "empty sample"


def test_nblock_tester_separates():
    spec = TraceTestSpec(rho=0.03, property_name="n_block", **DESK)
    x = uniform_block_string(4096, 16)
    far = "10" * 2048
    acc = sum(
        nblock_verdict(deletion_trace(x, spec.rho, (9, t)), spec, seed=(10, t)).accept
        for t in range(40)
    )
    rej = sum(
        not nblock_verdict(deletion_trace(far, spec.rho, (11, t)), spec, seed=(12, t)).accept
        for t in range(40)
    )
    assert acc >= 2 * 40 // 3
    assert rej >= 2 * 40 // 3


def test_uniform_tester_negation_symmetry():
    spec = TraceTestSpec(rho=0.05, **DESK)
    x = uniform_block_string(4096, 16, first=1)
    xbar = uniform_block_string(4096, 16, first=0)
    for t in range(10):
        tr = deletion_trace(x, spec.rho, (13, t))
        tr_neg = "".join("1" if c == "0" else "0" for c in tr)
        v1 = ublock_verdict(tr, spec, seed=(14, t))
        v2 = ublock_verdict(tr_neg, spec, seed=(14, t))
        assert v1.accept == v2.accept
        # the same channel seed on the complement string yields the
        # complement trace, so verdict distributions coincide
        assert deletion_trace(xbar, spec.rho, (13, t)) == tr_neg


def test_uniform_tester_no_promise_mode():
    # the tolerant bucket check needs the sample to pin the per-piece
    # histogram to TV error eps/8, hence the high retention rate here
    spec = TraceTestSpec(rho=0.75, property_name="uniform_n_block", **DESK)
    x = uniform_block_string(4096, 16)
    acc = sum(
        ublock_verdict(deletion_trace(x, spec.rho, (15, t)), spec, seed=(16, t)).accept
        for t in range(30)
    )
    assert acc >= 20
    skew = ("1" * 480 + "0" * 32) * 8
    rej = sum(
        not ublock_verdict(deletion_trace(skew, spec.rho, (17, t)), spec, seed=(18, t)).accept
        for t in range(30)
    )
    assert rej >= 20


def test_multitrace_single_equals_direct():
    spec = TraceTestSpec(rho=0.05, **DESK)
    x = uniform_block_string(4096, 16)
    tr = deletion_trace(x, spec.rho, 19)
    v1 = multi_verdict([tr], spec, seed=20)
    v2 = ublock_verdict(tr, spec, seed=20)
    assert v1.accept == v2.accept


def test_multitrace_concat_length():
    spec = TraceTestSpec(rho=0.04, **DESK)
    x = uniform_block_string(4096, 16)
    traces = [deletion_trace(x, spec.rho, (21, j)) for j in range(4)]
    v = multi_verdict(traces, spec, seed=22)
    assert v.statistics["total_chars"] == sum(len(t) for t in traces)


def test_spec_validation():
    with pytest.raises(ValueError):
        TraceTestSpec(n_chars=100, n_blocks=16, epsilon=0.4, rho=0.1)
    with pytest.raises(ValueError):
        TraceTestSpec(n_chars=4096, n_blocks=15, epsilon=0.4, rho=0.1)
    TraceTestSpec(n_chars=4096, n_blocks=15, epsilon=0.4, rho=0.1,
                  property_name="n_block")  # odd block count fine here


def test_uniform_block_inverse_distributions():
    # psi_inv of the two uniform block strings: uniform on {1..n} and on
    # {2..n+1} respectively
    n_chars, n = 64, 8
    u1 = psi_inv(uniform_block_string(n_chars, n, 1))
    assert u1.pi.tolist() == [1 / n] * n
    u0 = psi_inv(uniform_block_string(n_chars, n, 0))
    assert u0.pi.tolist() == [0.0] + [1 / n] * n


def test_multitrace_total_characters_concentrate():
    # total characters over k traces average k * rho * N within 5%
    N, k, rho = 4096, 4, 0.02
    x = uniform_block_string(N, 16)
    totals = [
        sum(len(deletion_trace(x, rho, (23, t, j))) for j in range(k))
        for t in range(1000)
    ]
    assert abs(np.mean(totals) - k * rho * N) <= 0.05 * k * rho * N
