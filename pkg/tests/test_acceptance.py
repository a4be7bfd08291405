"""Acceptance criteria, one test per criterion.

Each test prints ``criterion N: PASS|FAIL <detail>``; the lines are repeated
in the pytest terminal summary. Run this file directly to print them without
pytest.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest
import yaml

from bcerasure import cli
from bcerasure import exponents as ex
from bcerasure import montecarlo as mc
from bcerasure import oracle as orc
from bcerasure.codec import sample_codebook
from bcerasure.types_core import mutual_information

import conftest
from helpers import random_channel, random_instance, random_pux

P_REF = np.array([[0.4, 0.1], [0.1, 0.4]])
AUDITED = []  # (codebook, channel, rates) seen by the audits, reused for the partition check


def _same(a, b):
    return a == b or (math.isinf(a) and math.isinf(b) and (a > 0) == (b > 0))


def _report(num, ok, detail):
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    conftest.ACCEPTANCE_LINES.append(line)
    assert ok, line


def criterion_1():
    """Solver vs lattice oracle at k=60 on 20 random instances."""
    rng = np.random.default_rng(20240601)
    t0, worst, where = time.perf_counter(), 0.0, ""
    for i in range(20):
        p, w, lam, r1, r2 = random_instance(rng)
        cases = {
            "marginal": (ex.exponent_marginal(lam, r2, p, w), dict(lam=lam, R2=r2)),
            "joint": (ex.exponent_joint(lam, r1, r2, p, w), dict(lam=lam, R1=r1, R2=r2)),
            "penalized": (ex.exponent_penalized(lam, r1, r2, r2, p, w), dict(lam=lam, R1=r1, R2=r2, R2_pen=r2)),
            "sphere_packing": (ex.sphere_packing(r1, p, w), dict(R=r1)),
        }
        for name, (val, kw) in cases.items():
            g = orc.grid_exponent(name, 60, p, w, **kw).value
            gap = 0.0 if _same(val, g) else abs(val - g)
            if gap > worst:
                worst, where = gap, f"{name}@{i}"
    dt = time.perf_counter() - t0
    return worst <= 1e-2 and dt < 300, f"max_gap={worst:.3g} bits ({where or '-'}) tol=1e-2 time={dt:.0f}s"


def criterion_2():
    """Unit lambda with untilted thresholds; rates above I(P_UX, W)."""
    rng = np.random.default_rng(7)
    bad = 0
    for _ in range(10):
        p, w = random_pux(rng), random_channel(rng)
        r1, r2 = rng.uniform(0, 0.4, 2)
        rep = ex.theorem_bounds(ex.RateConfig(r1, r2), p, w)
        bad += not (_same(rep.e1_bound, rep.e1hat_bound) and _same(rep.e2_bound, rep.e2hat_bound))
        cap = mutual_information(p.sum(axis=0), w)
        # Untilted thresholds: a positive rate gap would add itself to the undetected bounds.
        r = cap + rng.uniform(0.01, 0.5)
        hi = ex.RateConfig(r, r, lambda12=2.0, lambda2=2.0)
        rep = ex.theorem_bounds(hi, p, w)
        bad += any(v != 0.0 for v in rep.as_dict().values())
    return bad == 0, f"violations={bad} of 20 identity checks"


def _valid_config(rng):
    p, w = random_pux(rng), random_channel(rng)
    r1, r2 = rng.uniform(0, 0.6, 2)
    d1, d2 = rng.uniform(0, 0.3, 2)
    l12, l2 = rng.uniform(1, 4, 2)
    return p, w, ex.RateConfig(r1, r2, r1 + d1, r2 + d2, l12, l2)


def criterion_3():
    """Orderings on 100 valid rate configurations."""
    rng = np.random.default_rng(3)
    slack, counts = 1e-9, {"pen<=joint": 0, "joint_tilde<=sphere": 0, "e1hat>=e1": 0}
    for _ in range(100):
        p, w, rc = _valid_config(rng)
        rep = ex.theorem_bounds(rc, p, w)
        b = rep.breakdown
        counts["pen<=joint"] += b["pen_plain"] > b["joint_plain"] + slack
        jt = ex.exponent_joint(1.0 / rc.lambda12, rc.R1_tilde, rc.R2_tilde, p, w)
        counts["joint_tilde<=sphere"] += jt > ex.sphere_packing(rc.R12_tilde, p, w) + slack
        counts["e1hat>=e1"] += rep.e1hat_bound < rep.e1_bound - slack
    return sum(counts.values()) == 0, "violations " + " ".join(f"{k}={v}" for k, v in counts.items())


AUDIT_RATES = {4: 0.25, 6: 0.34}


def _audit_runs():
    for n, r in AUDIT_RATES.items():
        pt = mc.quantize_joint_type(P_REF, n)
        for lam in (1.0, 1.5, 3.0):
            rc = ex.RateConfig(r, r, r + 0.05, r + 0.05, lam, lam)
            for s in range(50):
                cb = sample_codebook(pt, r, r, rng=mc.derive_rng(s, f"audit/{n}/{lam}"))
                yield n, lam, rc, cb, orc.unambiguity_audit(cb, rc, 2)


_AUDIT_CACHE = []


def _audits():
    if not _AUDIT_CACHE:
        t0 = time.perf_counter()
        _AUDIT_CACHE.extend(_audit_runs())
        _AUDIT_CACHE.append(time.perf_counter() - t0)
    return _AUDIT_CACHE[:-1], _AUDIT_CACHE[-1]


def criterion_4():
    """At most one satisfier per decoding step, exhaustively."""
    runs, dt = _audits()
    bad = sum(not res.passed for *_, res in runs)
    outputs = sum(res.outputs_checked for *_, res in runs)
    return bad == 0 and dt < 120, f"codebooks={len(runs)} outputs={outputs} ambiguous={bad} time={dt:.0f}s"


def criterion_5():
    """Fast-path and exhaustive decoders agree on the criterion-4 outputs."""
    runs, _ = _audits()
    mism = sum(res.fast_path_mismatches for *_, res in runs)
    outputs = sum(res.outputs_checked * 2 for *_, res in runs)
    return mism == 0, f"mismatches={mism} of {outputs} decode steps"


C6_W = np.array([[0.85, 0.15], [0.2, 0.8]])
C6_RC = ex.RateConfig(0.25, 0.25, 0.3, 0.3, 1.5, 1.5)


def criterion_6():
    """Monte Carlo vs exact probabilities on a fixed n=6 codebook, 30 seedings."""
    pt = mc.quantize_joint_type(P_REF, 6)
    cb = sample_codebook(pt, C6_RC.R1, C6_RC.R2, rng=mc.derive_rng(7, "codebook/6"))
    exact = orc.exact_error_probs(cb, C6_W, C6_RC, transmitted=None)
    AUDITED.append((cb, C6_W, C6_RC))
    t0, good = time.perf_counter(), 0
    for seed in range(30):
        t = mc.run_trials(pt, C6_W, C6_RC, 6, 100_000, seed, "fixed", cb)
        good += all(mc.within_wilson(getattr(exact, e), cli._event_count(t, e), t.trials) for e in cli.EVENTS)
    dt = time.perf_counter() - t0
    return good >= math.ceil(0.99 * 30) and dt < 180, f"seedings within 3 sigma={good}/30 time={dt:.0f}s"


C7_W = np.array([[0.95, 0.05], [0.05, 0.95]])
C7_RC = ex.RateConfig(0.1, 0.1, 0.12, 0.12)


def criterion_7():
    """Exact message-1 error falls with n on an instance with positive finite bounds."""
    w_z = np.array([[0.9, 0.1], [0.1, 0.9]])
    inside = ex.rate_region_check(P_REF, C7_W, w_z, C7_RC.R1, C7_RC.R2).inside
    bounds = ex.theorem_bounds(C7_RC, P_REF, C7_W).as_dict()
    positive = all(0 < v < math.inf for v in bounds.values())
    ns, probs = (4, 6, 8), []
    for n in ns:
        pt = mc.quantize_joint_type(P_REF, n)
        vals = []
        for s in range(40):
            cb = sample_codebook(pt, C7_RC.R1, C7_RC.R2, rng=mc.derive_rng(s, f"ensemble/{n}"))
            vals.append(orc.exact_error_probs(cb, C7_W, C7_RC, transmitted=None).e1)
        AUDITED.append((cb, C7_W, C7_RC))
        probs.append(float(np.mean(vals)))
    slope = mc.fit_exponent(ns, probs)[0]
    mono = all(b <= a for a, b in zip(probs, probs[1:]))
    ok = inside and positive and mono and slope > 0
    return ok, f"e1={[round(v, 4) for v in probs]} slope={slope:.3f} bits inside={inside} bounds_positive={positive}"


def criterion_8(tmp_path):
    """Byte-identical simulate output across thread counts."""
    raw = yaml.safe_load(open(Path(__file__).resolve().parents[1] / "configs" / "reference.yaml"))
    cfgs = []
    for policy in ("fixed", "fresh"):
        raw["simulation"].update(codebook_policy=policy, trials=5000)
        path = tmp_path / f"{policy}.yaml"
        path.write_text(yaml.safe_dump(raw))
        cfgs.append((policy, path))
    same = True
    for policy, path in cfgs:
        outs = []
        for k in (1, 2, 8):
            out = tmp_path / f"{policy}_{k}"
            assert cli.main(["simulate", "--config", str(path), "--out", str(out), "--threads", str(k)]) == 0
            outs.append((out / "simulate.csv").read_bytes())
        same &= outs[0] == outs[1] == outs[2]
    return same, "policies=fixed,fresh threads=1,2,8"


def criterion_9():
    """Event masses plus correct mass sum to 1 on every audited instance."""
    runs, _ = _audits()
    instances = [(cb, np.array([[0.85, 0.15], [0.2, 0.8]]), rc) for _, _, rc, cb, _ in runs] + AUDITED
    worst = 0.0
    for cb, w, rc in instances:
        for sent in [(0, 0), None]:
            worst = max(worst, abs(orc.exact_error_probs(cb, w, rc, transmitted=sent).total_mass - 1.0))
    return worst <= 1e-10, f"instances={len(instances)} max|mass-1|={worst:.3g}"


@pytest.mark.slow
def test_criterion_1_oracle_solver_agreement():
    _report(1, *criterion_1())


def test_criterion_2_bound_identities():
    _report(2, *criterion_2())


@pytest.mark.slow
def test_criterion_3_orderings():
    _report(3, *criterion_3())


def test_criterion_4_unambiguity():
    _report(4, *criterion_4())


def test_criterion_5_fast_path():
    _report(5, *criterion_5())


def test_criterion_6_mc_vs_exact():
    _report(6, *criterion_6())


def test_criterion_7_exponent_direction():
    _report(7, *criterion_7())


def test_criterion_8_determinism(tmp_path):
    _report(8, *criterion_8(tmp_path))


def test_criterion_9_partition():
    _report(9, *criterion_9())


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as d:
        fns = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
               lambda: criterion_8(Path(d)), criterion_9]
        for i, fn in enumerate(fns, 1):
            ok, detail = fn()
            print(f"criterion {i}: {'PASS' if ok else 'FAIL'} {detail}", flush=True)
