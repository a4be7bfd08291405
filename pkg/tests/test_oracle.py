import numpy as np
import pytest

from bcerasure import oracle as orc
from bcerasure.codec import Codebook, sample_codebook
from bcerasure.exponents import RateConfig
from bcerasure.types_core import JointType, mutual_information

from helpers import random_channel, random_pux

W = np.array([[0.85, 0.15], [0.2, 0.8]])
TYPE6 = JointType(np.array([[2, 1], [1, 2]]))


def test_all_outputs_mixed_radix():
    ys = orc.all_outputs(3, 2)
    assert ys.tolist()[:4] == [[0, 0], [0, 1], [0, 2], [1, 0]]
    assert len(ys) == 9
    with pytest.raises(orc.BudgetExceeded):
        orc.all_outputs(2, 10, orc.OracleBudget(max_outputs=1000))


def test_budget_validation():
    with pytest.raises(ValueError):
        orc.OracleBudget(max_outputs=0)


@pytest.mark.parametrize("seed", range(3))
def test_partition_and_containment(seed):
    cb = sample_codebook(TYPE6, 0.34, 0.34, seed=seed)
    rc = RateConfig(0.34, 0.34, 0.4, 0.4, 1.5, 1.5)
    for sent in [(0, 0), None]:
        ex = orc.exact_error_probs(cb, W, rc, transmitted=sent)
        assert abs(ex.total_mass - 1.0) <= 1e-10
        assert ex.e1hat <= ex.e1 + 1e-15 and ex.e2hat <= ex.e2 + 1e-15
        assert ex.e1 == pytest.approx(1 - sum(v for k, v in ex.cells.items() if k[0] == "correct"), abs=1e-12)


def test_noiseless_injective_codebook_no_errors():
    u = np.array([[0, 1, 0, 1, 1, 0], [1, 0, 1, 0, 0, 1]])
    x = np.array([[[1, 1, 0, 0, 1, 0], [0, 1, 0, 0, 1, 1]], [[1, 1, 0, 0, 0, 1], [0, 1, 1, 0, 0, 1]]])
    cb = Codebook(u, x, TYPE6)
    assert cb.check_compositions()
    rc = RateConfig(0.1, 0.1)
    ex = orc.exact_error_probs(cb, np.eye(2), rc, transmitted=None)
    assert ex.as_dict() == {"e1": 0.0, "e1hat": 0.0, "e2": 0.0, "e2hat": 0.0}
    assert ex.correct == pytest.approx(1.0)


def test_unreachable_threshold_erases_message_one():
    cb = sample_codebook(TYPE6, 0.0, 0.0, seed=1)
    # Empirical MI never exceeds log2 min(|U x X|, |Y|) = 1 bit.
    rc = RateConfig(0.0, 0.0, 0.6, 0.6)
    ex = orc.exact_error_probs(cb, W, rc)
    assert ex.e1 == pytest.approx(1.0) and ex.e1hat == 0.0
    assert sum(v for k, v in ex.cells.items() if k[0] == "erased") == pytest.approx(1.0)


# --- grid exponent


def test_grid_zero_above_capacity():
    p = np.full((2, 2), 0.25)
    w = np.array([[0.75, 0.25], [0.25, 0.75]])
    i = mutual_information(p.sum(axis=0), w)
    for obj, kw in [
        ("marginal", dict(R2=1.0)),
        ("joint", dict(R1=i + 1e-9, R2=0.0)),
        ("penalized", dict(R1=i + 1e-9, R2=0.0, R2_pen=1.0)),
        ("sphere_packing", dict(R=i + 1e-9)),
    ]:
        assert orc.grid_exponent(obj, 4, p, w, lam=2.0, **kw).value == 0.0


@pytest.mark.parametrize("obj", ["marginal", "joint", "penalized", "sphere_packing"])
def test_grid_refinement_monotone(obj):
    rng = np.random.default_rng(7)
    p, w = random_pux(rng), random_channel(rng)
    kw = dict(lam=2.0, R1=0.05, R2=0.05, R2_pen=0.02, R=0.1)
    vals = [orc.grid_exponent(obj, k, p, w, **kw).value for k in (5, 10, 20)]
    assert vals[1] <= vals[0] + 1e-12 and vals[2] <= vals[1] + 1e-12


def test_grid_budget_and_unknown_objective():
    p, w = np.full((2, 2), 0.25), np.array([[0.75, 0.25], [0.25, 0.75]])
    with pytest.raises(orc.BudgetExceeded):
        orc.grid_exponent("joint", 60, p, w, budget=orc.OracleBudget(max_grid_points=1000))
    with pytest.raises(ValueError):
        orc.grid_exponent("nope", 4, p, w)


def test_grid_argmin_reproduces_value():
    from bcerasure import exponents as ex

    rng = np.random.default_rng(9)
    p, w = random_pux(rng), random_channel(rng)
    g = orc.grid_exponent("penalized", 12, p, w, lam=1.5, R1=0.1, R2=0.05, R2_pen=0.05)
    assert g.value == pytest.approx(ex.penalized_objective(g.argmin, 1.5, 0.1, 0.05, 0.05, p, w), abs=1e-12)


# --- unambiguity audit


@pytest.mark.parametrize("seed", range(5))
def test_audit_passes_for_valid_thresholds(seed):
    cb = sample_codebook(TYPE6, 0.34, 0.34, seed=seed)
    res = orc.unambiguity_audit(cb, RateConfig(0.34, 0.34, 0.4, 0.4), 2)
    assert res.passed and res.fast_path_mismatches == 0 and res.outputs_checked == 64


def test_audit_single_message_vacuous():
    cb = sample_codebook(TYPE6, 0.0, 0.0, seed=0)
    assert orc.unambiguity_audit(cb, RateConfig(0.0, 0.0), 2).passed


def test_audit_catches_weakened_threshold():
    # Two distinct pairs with equal scores on the witness clear a threshold halved by lambda < 1.
    u = np.array([[0, 0, 0, 1, 1, 1]])
    x = np.array([[[0, 0, 1, 0, 1, 1], [0, 1, 0, 1, 0, 1]]])
    cb = Codebook(u, x, TYPE6)
    rc = RateConfig(0.05, 0.0, lambda12=0.5, lambda2=0.5, strict=False)
    res = orc.unambiguity_audit(cb, rc, 2)
    assert not res.passed
    assert len(res.step1_satisfiers) > 1
    s = orc.exact_scores(cb, res.witness[None], 2)[0][0]
    for a in res.step1_satisfiers:
        others = [t for b, t in enumerate(s) if b != a]
        assert all(s[a] >= rc.R12_tilde + rc.lambda12 * max(t - rc.R12, 0) - 1e-12 for t in others)
