import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sedvlf.belief import (BeliefError, BeliefState, NormalizerUnderflow, Partition,
                           bayes_update, expected_drift, expected_drift_all, extrinsic_probs, init_belief, llr,
                           llr_clamped, max_step)
from sedvlf.channel import ChannelSpec, binary_entropy, channel_stats, kl_divergence, regularize
from sedvlf.sed_encoder import EncoderConfig, encode_step, exclusive_partition

from conftest import random_regularized, random_state


def test_init_belief():
    assert init_belief(4).rho.tolist() == [0.25] * 4
    assert init_belief(1).rho.tolist() == [1.0]
    b = init_belief(2 ** 20)
    assert np.all(b.rho == 2.0 ** -20)
    assert abs(math.fsum(b.rho) - 1) < 1e-9
    with pytest.raises(BeliefError):
        init_belief(0)


def test_belief_is_immutable():
    b = init_belief(3)
    with pytest.raises(ValueError):
        b.rho[0] = 1.0


def test_two_message_update(bsc):
    spec, _ = bsc
    b = bayes_update(init_belief(2), Partition.from_sets([1], [0.5, 0.5]), 0, spec)
    assert b.rho == pytest.approx([0.89, 0.11], abs=1e-15)
    assert b.t == 1


def test_ratio_after_update():
    p = 0.2
    spec = regularize(p, p)
    b = init_belief(4)
    b = bayes_update(b, Partition.from_sets([2, 3], b.rho), 0, spec)
    assert b.rho[0] == b.rho[1]
    assert b.rho[0] / b.rho[2] == pytest.approx((1 - p) / p, rel=1e-14)


def test_near_noiseless_annihilates():
    spec = ChannelSpec(1e-300, 1e-300)
    b = bayes_update(init_belief(4), Partition.from_sets([2, 3], [0.25] * 4), 0, spec)
    assert b.rho[2] < 1e-290 and b.rho[0] == pytest.approx(0.5)


def test_bad_output_and_underflow():
    spec = regularize(0.1, 0.1)
    b = init_belief(2)
    with pytest.raises(BeliefError):
        bayes_update(b, Partition.from_sets([1], b.rho), 2, spec)
    tiny = BeliefState(np.array([5e-324, 5e-324]))
    with pytest.raises(NormalizerUnderflow):
        bayes_update(tiny, Partition.from_member([0, 0], tiny.rho), 1, ChannelSpec(0.4, 0.4))


@given(st.integers(1, 200), st.integers(0, 2 ** 32 - 1), st.integers(0, 1))
def test_update_conserves_mass(M, seed, y):
    rng = np.random.default_rng(seed)
    rho = rng.dirichlet(np.ones(M))
    spec = regularize(*random_regularized(rng))
    part = Partition.from_member(rng.integers(0, 2, M), rho)
    assert part.pi0 + part.pi1 == pytest.approx(1, abs=1e-9)
    b = bayes_update(BeliefState(rho), part, y, spec)
    assert abs(math.fsum(b.rho) - 1) < 1e-9
    assert np.all(b.rho > 0)


def test_llr_points():
    assert llr(0.5) == 0.0
    assert llr(0.5) == llr(1 / 2)
    assert llr(1 / 8) == pytest.approx(math.log2(1 / 7), abs=1e-15)
    assert llr(0.999) == pytest.approx(9.9643, abs=1e-4)
    assert llr(0.0) == -math.inf and llr(1.0) == math.inf
    with pytest.raises(BeliefError):
        llr(-0.1)
    assert llr_clamped(0.3) == (llr(0.3), False)
    v, sat = llr_clamped(1.0)
    assert sat and math.isfinite(v)
    v, sat = llr_clamped(0.0)
    assert sat and math.isfinite(v)


def test_extrinsic_points():
    b = init_belief(4)
    own, other = extrinsic_probs(b, Partition.from_sets([2, 3], b.rho), 0)
    assert own == pytest.approx(1 / 3) and other == pytest.approx(2 / 3)
    rho = np.array([0.6, 0.3, 0.1])
    own, other = extrinsic_probs(BeliefState(rho), Partition.from_sets([0], rho), 0)
    assert own == 0.0 and other == pytest.approx(1.0)
    with pytest.raises(BeliefError):
        extrinsic_probs(BeliefState(np.array([1.0, 0.0])), Partition.from_sets([0], [1, 0]), 0)


def test_two_message_drift():
    # with two messages the extrinsic mixture is the other input's output law,
    # so the exact drift is C1; the uniform-input mixture gives C instead
    for p in (0.05, 0.11, 0.3):
        spec = regularize(p, p)
        s = channel_stats(spec)
        b = init_belief(2)
        part = Partition.from_sets([1], b.rho)
        assert expected_drift(b, part, 0, spec) == pytest.approx(s.C1, abs=1e-12)
        assert _llr_change_by_enumeration(b, part, 0, spec) == pytest.approx(s.C1, abs=1e-12)
        mix = 0.5 * spec.output_dist(0) + 0.5 * spec.output_dist(1)
        assert kl_divergence(spec.output_dist(0), mix) == pytest.approx(
            1 - binary_entropy(p), abs=1e-12)


def _llr_change_by_enumeration(b, part, i, spec):
    # E[U_i(t+1) - U_i(t) | theta = i] by summing over both outputs
    x = part.symbol(i)
    total = 0.0
    for y in (0, 1):
        nb = bayes_update(b, part, y, spec)
        total += spec.likelihood(y, x) * (llr(nb.rho[i]) - llr(b.rho[i]))
    return total


@given(st.integers(0, 2 ** 32 - 1))
def test_drift_equals_enumeration(seed):
    rng = np.random.default_rng(seed)
    spec = regularize(*random_regularized(rng))
    M = int(rng.integers(2, 16))
    b = BeliefState(rng.dirichlet(np.ones(M)))
    part = Partition.from_member(rng.integers(0, 2, M), b.rho)
    i = int(rng.integers(M))
    assert expected_drift(b, part, i, spec) == pytest.approx(
        _llr_change_by_enumeration(b, part, i, spec), abs=1e-9)


def test_max_step_values():
    assert abs(max_step(regularize(0.11, 0.11)) - 3.0163) < 5e-4
    assert abs(max_step(regularize(0.03, 0.22)) - 4.7) < 5e-4
    assert max_step(regularize(0.4999, 0.4999)) < 1e-3


def _drift_checks(rng, n_states):
    """Drift, step-size and extrinsic-dominance checks on random states."""
    for _ in range(n_states):
        spec = regularize(*random_regularized(rng))
        s = channel_stats(spec)
        enc = EncoderConfig.from_stats(s, rng.choice(["greedy", "original"]))
        M = int(rng.integers(2, 65))
        if s.pi1_star * M <= 1:
            M = 3
        b = BeliefState(random_state(rng, M, s.pi1_star))
        part = encode_step(b, enc)
        star = (s.pi0_star, s.pi1_star)
        for i in range(M):
            assert expected_drift(b, part, i, spec) >= s.C - 1e-12
            own, _ = extrinsic_probs(b, part, i)
            assert own <= star[part.symbol(i)] + 1e-12
            for y in (0, 1):
                nb = bayes_update(b, part, y, spec)
                assert abs(llr(nb.rho[i]) - llr(b.rho[i])) <= s.C2 + 1e-9
        # confirmation: push one message above pi1*
        top = int(rng.integers(M))
        rho = rng.dirichlet(np.ones(M)) * (1 - s.pi1_star) * rng.uniform(0.01, 1)
        rho[top] = 0
        rho[top] = 1 - rho.sum()
        cb = BeliefState(rho)
        cpart = exclusive_partition(cb)
        assert expected_drift(cb, cpart, top, spec) == pytest.approx(s.C1, abs=1e-12)


def test_drift_invariants_sample():
    _drift_checks(np.random.default_rng(11), 200)


@given(st.integers(0, 2 ** 32 - 1))
def test_vectorized_drift_matches(seed):
    rng = np.random.default_rng(seed)
    spec = regularize(*random_regularized(rng))
    M = int(rng.integers(2, 40))
    b = BeliefState(rng.dirichlet(np.ones(M)))
    part = Partition.from_member(rng.integers(0, 2, M), b.rho)
    got = expected_drift_all(b, part, spec)
    for i in range(M):
        assert got[i] == pytest.approx(expected_drift(b, part, i, spec), abs=1e-12)
