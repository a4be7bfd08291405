import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from bcerasure import codec
from bcerasure.codec import (
    Codebook,
    Stage,
    decide,
    decode_y,
    decode_y_batch,
    decode_z,
    message_count,
    sample_codebook,
    sample_from_shell,
    sample_from_type_class,
    satisfiers_exhaustive,
    satisfiers_fast,
)
from bcerasure.exponents import RateConfig
from bcerasure.types_core import JointType, empirical_mutual_info, joint_type_of, pair_index


def test_message_count():
    assert message_count(4, 0.0) == 1
    assert message_count(4, 0.5) == 4
    assert message_count(6, np.log2(5) / 6) == 5
    assert message_count(8, 0.1) == 2


# --- sampling


def test_type_class_singleton():
    rng = np.random.default_rng(0)
    assert sample_from_type_class(JointType(np.array([5, 0])), rng).tolist() == [0] * 5


def test_type_class_two_elements():
    rng = np.random.default_rng(1)
    c = Counter(tuple(sample_from_type_class(JointType(np.array([1, 1])), rng)) for _ in range(4000))
    assert set(c) == {(0, 1), (1, 0)}
    assert stats.binomtest(c[(0, 1)], 4000).pvalue > 1e-3


def test_type_class_uniform_chi_square():
    rng = np.random.default_rng(2)
    t = JointType(np.array([2, 2]))
    c = Counter(tuple(sample_from_type_class(t, rng)) for _ in range(100_000))
    assert len(c) == 6
    assert stats.chisquare(list(c.values())).pvalue > 1e-3


def test_shell_deterministic():
    rng = np.random.default_rng(3)
    p = JointType(np.array([[2, 0], [0, 2]]))
    assert sample_from_shell([0, 1, 1, 0], p, rng).tolist() == [0, 1, 1, 0]


def test_shell_uniform_chi_square():
    rng = np.random.default_rng(4)
    p = JointType(np.array([[1, 1], [1, 1]]))
    u = [0, 0, 1, 1]
    c = Counter(tuple(sample_from_shell(u, p, rng)) for _ in range(40_000))
    assert len(c) == 4
    assert all(joint_type_of(u, x, sizes=(2, 2)) == p for x in c)
    assert stats.chisquare(list(c.values())).pvalue > 1e-3


def test_shell_mismatched_type_rejected():
    with pytest.raises(ValueError):
        sample_from_shell([0, 0, 0, 1], JointType(np.array([[1, 1], [1, 1]])), np.random.default_rng(0))


def test_codebook_sizes_and_compositions():
    p = JointType(np.array([[1, 1], [1, 1]]))
    cb = sample_codebook(p, 0.0, 0.0, seed=1)
    assert (cb.M1, cb.M2) == (1, 1)
    cb = sample_codebook(p, 0.25, 0.25, seed=1)
    assert (cb.M1, cb.M2) == (2, 2) and cb.n == 4
    assert sample_codebook(p, 0.5, 0.5, seed=1).M1 == 4
    assert cb.check_compositions()
    assert sample_codebook(p, 0.5, 0.5, seed=9) == sample_codebook(p, 0.5, 0.5, seed=9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.integers(3, 8))
def test_codebook_compositions_property(seed, n):
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(n, [0.3, 0.2, 0.1, 0.4]).reshape(2, 2)
    cb = sample_codebook(JointType(counts), 0.3, 0.2, rng=rng)
    assert cb.check_compositions()


def test_codebook_validates():
    p = JointType(np.array([[1, 1], [1, 1]]))
    with pytest.raises(ValueError):
        sample_codebook(p, 0.5, 0.5, n=5)
    with pytest.raises(ValueError):
        sample_codebook(p, 3.0, 3.0, max_messages=100)
    cb = sample_codebook(p, 0.5, 0.5, seed=0)
    with pytest.raises(ValueError):
        cb.u[0, 0] = 1


# --- decision rules


def _independent_rule(scores, r_tilde, lam, r):
    """Both rules written out directly: index a satisfies iff it clears every other index."""
    out = []
    for a, s in enumerate(scores):
        thr = [r_tilde] + [r_tilde + lam * max(t - r, 0.0) for b, t in enumerate(scores) if b != a]
        if all(s >= x - codec.GUARD for x in thr):
            out.append(a)
    return out


scores = st.lists(st.sampled_from([0.0, 0.1, 0.25, 0.3, 0.5, 0.75, 1.0]), min_size=1, max_size=6)


@given(scores, st.sampled_from([0.0, 0.1, 0.3]), st.sampled_from([0.0, 0.05, 0.2]), st.sampled_from([1.0, 1.5, 3.0]))
def test_fast_and_exhaustive_agree(mi, r, delta, lam):
    mi = np.array(mi)
    ex_ = satisfiers_exhaustive(mi, r + delta, lam, r)
    assert ex_ == satisfiers_fast(mi, r + delta, lam, r)
    assert ex_ == _independent_rule(mi, r + delta, lam, r)


def test_exhaustive_rule_single_candidate():
    assert satisfiers_exhaustive(np.array([0.4]), 0.3, 1.0, 0.3) == [0]
    assert satisfiers_exhaustive(np.array([0.2]), 0.3, 1.0, 0.3) == []


def test_tie_never_decodes():
    assert satisfiers_exhaustive(np.array([0.9, 0.9]), 0.2, 1.0, 0.1) == []
    rc = RateConfig(0.05, 0.05)
    out = decide(np.array([0.9, 0.9, 0.1, 0.1]), np.array([0.2, 0.2]), 2, rc)
    assert out.stage is Stage.DOUBLE_ERASURE


def test_invalid_thresholds_force_exhaustive(monkeypatch):
    rc = RateConfig(0.1, 0.1, lambda12=0.5, lambda2=0.5, strict=False)

    def boom(*a, **k):
        raise AssertionError("fast path used")

    monkeypatch.setattr(codec, "satisfiers_fast", boom)
    decide(np.array([0.5, 0.4]), np.array([0.3]), 2, rc)


# --- end-to-end decoding


def test_single_pair_noiseless():
    p = JointType(np.array([[2, 1], [1, 2]]))
    cb = sample_codebook(p, 0.0, 0.0, seed=3)
    y = cb.x[0, 0].copy()
    clean = empirical_mutual_info(pair_index(cb.u[0], y, 2), y, 4, 2)
    rc = RateConfig(clean / 4, clean / 4)
    out = decode_y(y, cb, rc, y_size=2)
    assert (out.msg1, out.msg2, out.stage) == (0, 0, Stage.STEP1)
    # Threshold above the clean MI: nothing decodes.
    out = decode_y(y, cb, RateConfig(clean, clean), y_size=2)
    assert out.stage is Stage.DOUBLE_ERASURE


def test_duplicated_codebook_double_erasure():
    p = JointType(np.array([[2, 1], [1, 2]]))
    u = np.array([[0, 0, 0, 1, 1, 1]] * 2)
    x = np.array([[[0, 0, 1, 0, 1, 1]] * 2] * 2)
    cb = Codebook(u, x, p)
    assert cb.check_compositions()
    out = decode_y(x[0, 0], cb, RateConfig(0.01, 0.01), y_size=2)
    assert out.stage is Stage.DOUBLE_ERASURE and out.msg1 is None and out.msg2 is None


CLOUDS = np.array([[0, 0, 0, 0, 1, 1, 1, 1], [0, 0, 1, 1, 0, 0, 1, 1]])
SATELLITES = np.array([
    [[0, 0, 0, 1, 1, 1, 1, 0], [0, 0, 1, 0, 1, 1, 1, 0]],
    [[0, 0, 1, 1, 0, 1, 1, 0], [1, 0, 1, 1, 0, 0, 0, 1]],
])
NEAR_TIE_TYPE = JointType(np.array([[3, 1], [1, 3]]))


def test_step2_recovers_cloud_on_near_tie():
    # The two satellites of cloud 0 differ in two positions only.
    u, x = CLOUDS, SATELLITES
    cb = Codebook(u, x, NEAR_TIE_TYPE)
    assert cb.check_compositions()
    rc = RateConfig(0.05, 0.05, 0.1, 0.1, lambda12=8.0, lambda2=1.0)
    found = 0
    for y in itertools.product(range(2), repeat=8):
        y = np.array(y)
        pairs = [empirical_mutual_info(pair_index(u[m2], x[m2, m1], 2), y, 4, 2) for m2 in range(2) for m1 in range(2)]
        clouds = [empirical_mutual_info(u[m2], y, 2, 2) for m2 in range(2)]
        s1 = _independent_rule(pairs, rc.R12_tilde, rc.lambda12, rc.R12)
        s2 = _independent_rule(clouds, rc.R2_tilde, rc.lambda2, rc.R2)
        out = decode_y(y, cb, rc, y_size=2)
        if len(s1) == 1:
            assert out.stage is Stage.STEP1 and divmod(s1[0], 2) == (out.msg2, out.msg1)
        elif len(s2) == 1:
            assert out.stage is Stage.STEP2 and out.msg2 == s2[0] and out.msg1 is None
            found += 1
        else:
            assert out.stage is Stage.DOUBLE_ERASURE
    assert found > 0
    out = decode_y(np.array([0, 0, 0, 0, 1, 1, 1, 0]), cb, rc, y_size=2)
    assert (out.stage, out.msg1, out.msg2) == (Stage.STEP2, None, 0)


def test_decode_deterministic_and_batched():
    p = JointType(np.array([[2, 1], [1, 2]]))
    cb = sample_codebook(p, 0.34, 0.34, seed=5)
    rc = RateConfig(0.34, 0.34, 0.4, 0.4, 1.5, 1.5)
    ys = np.array(list(itertools.product(range(2), repeat=6)))
    batch = decode_y_batch(ys, cb, rc, 2)
    assert batch == decode_y_batch(ys, cb, rc, 2)
    assert batch == [decode_y(y, cb, rc, 2) for y in ys]
    assert batch == decode_y_batch(ys, cb, rc, 2, exhaustive=True)


def test_decode_z_cloud_only():
    cb = Codebook(CLOUDS, SATELLITES[:, :1], NEAR_TIE_TYPE)
    rc = RateConfig(0.0, 0.1, 0.0, 0.2)
    assert decode_z(CLOUDS[1], cb, rc, 2) == 1
    assert decode_z(CLOUDS[0], cb, rc, 2) == 0
    assert decode_z(np.array([0, 1] * 4), cb, rc, 2) is None
    with pytest.raises(ValueError):
        decode_z([0, 1], cb, rc, 2)
