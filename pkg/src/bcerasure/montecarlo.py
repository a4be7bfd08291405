"""Monte Carlo estimation of the four error probabilities at the main receiver.

Trials are grouped into fixed-size blocks; block ``b`` draws from a stream
seeded by ``(seed, label, b)``, so a run is reproducible whatever the number
of worker threads.
"""

from __future__ import annotations

import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .codec import Codebook, DecodeOutcome, Stage, decode_y_batch, sample_codebook
from .exponents import RateConfig
from .types_core import Channel, Distribution, JointType

BLOCK_SIZE = 1024
POLICIES = ("fresh", "fixed")


def derive_rng(seed: int, label: str, index: int = 0) -> np.random.Generator:
    """Independent generator for a named component; ``label`` is hashed with CRC-32."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(zlib.crc32(label.encode()), int(index))))


def quantize_joint_type(target, n: int) -> JointType:
    """Nearest joint type with denominator ``n`` (largest-remainder rounding).

    Leftover units go to the largest fractional parts; ties prefer cells
    that would otherwise be empty, then lower flat index.
    """
    p = target.probs if isinstance(target, Distribution) else np.asarray(target, dtype=float)
    flat = p.reshape(-1) * n
    base = np.floor(flat + 1e-12).astype(np.int64)
    left = n - int(base.sum())
    frac = flat - base
    order = sorted(range(flat.size), key=lambda i: (-round(frac[i], 12), base[i] != 0, i))
    for i in order[:left]:
        base[i] += 1
    return JointType(base.reshape(p.shape))


@dataclass
class TrialTally:
    trials: int = 0
    msg1_undetected: int = 0
    msg1_erased: int = 0
    msg2_undetected: int = 0
    msg2_erased: int = 0
    step1: int = 0
    step2: int = 0
    double_erasure: int = 0
    seed: int | None = None
    n: int | None = None

    _COUNTS = (
        "trials",
        "msg1_undetected",
        "msg1_erased",
        "msg2_undetected",
        "msg2_erased",
        "step1",
        "step2",
        "double_erasure",
    )

    def record(self, out: DecodeOutcome, sent=(0, 0)) -> None:
        m1, m2 = sent
        self.trials += 1
        if out.msg1 is None:
            self.msg1_erased += 1
        elif out.msg1 != m1:
            self.msg1_undetected += 1
        if out.msg2 is None:
            self.msg2_erased += 1
        elif out.msg2 != m2:
            self.msg2_undetected += 1
        if out.stage is Stage.STEP1:
            self.step1 += 1
        elif out.stage is Stage.STEP2:
            self.step2 += 1
        else:
            self.double_erasure += 1

    def __add__(self, other: "TrialTally") -> "TrialTally":
        merged = TrialTally(**{k: getattr(self, k) + getattr(other, k) for k in self._COUNTS})
        merged.seed = self.seed if self.seed is not None else other.seed
        merged.n = self.n if self.n is not None else other.n
        return merged

    @property
    def msg1_total(self) -> int:
        return self.msg1_undetected + self.msg1_erased

    @property
    def msg2_total(self) -> int:
        return self.msg2_undetected + self.msg2_erased

    def counts(self) -> dict:
        return {k: getattr(self, k) for k in self._COUNTS}


def _sample_outputs(x: np.ndarray, cdf: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Memoryless channel outputs for inputs ``x`` of shape ``(B, n)``."""
    r = rng.random(x.shape)
    y = (r[..., None] >= cdf[x]).sum(axis=-1)
    return np.minimum(y, cdf.shape[1] - 1)


class _DecodeCache:
    """Decoded outcomes keyed by output sequence, for a fixed codebook."""

    def __init__(self, cb: Codebook, rc: RateConfig, y_size: int):
        self.cb, self.rc, self.y_size = cb, rc, y_size
        self.table: dict[bytes, DecodeOutcome] = {}

    def decode(self, ys: np.ndarray) -> list[DecodeOutcome]:
        uniq, inv = np.unique(ys, axis=0, return_inverse=True)
        keys = [row.tobytes() for row in uniq]
        missing = [i for i, k in enumerate(keys) if k not in self.table]
        if missing:
            outs = decode_y_batch(uniq[missing], self.cb, self.rc, self.y_size)
            for i, o in zip(missing, outs):
                self.table[keys[i]] = o
        per_unique = [self.table[k] for k in keys]
        return [per_unique[i] for i in np.asarray(inv).reshape(-1)]


def run_trials(
    p_ux,
    w_y,
    rc: RateConfig,
    n: int,
    trials: int,
    seed: int,
    codebook_policy: str = "fresh",
    codebook: Codebook | None = None,
    threads: int = 1,
    block_size: int = BLOCK_SIZE,
) -> TrialTally:
    """Simulate ``trials`` transmissions and tally the error events.

    ``p_ux`` is a joint type with denominator ``n`` or a target distribution
    that is quantized to one.  With ``codebook_policy="fresh"`` every trial
    draws a new codebook and sends ``(0, 0)``; with ``"fixed"`` one codebook
    (``codebook`` or a seeded draw) is reused and the message pair is drawn
    uniformly per trial.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if codebook_policy not in POLICIES:
        raise ValueError(f"codebook_policy must be one of {POLICIES}")
    if isinstance(p_ux, JointType):
        if p_ux.n != n:
            raise ValueError(f"joint type has denominator {p_ux.n}, blocklength is {n}")
        ptype = p_ux
    else:
        ptype = quantize_joint_type(p_ux, n)
    w = w_y.matrix if isinstance(w_y, Channel) else np.asarray(w_y, dtype=float)
    if w.shape[0] != ptype.counts.shape[1]:
        raise ValueError("channel input alphabet does not match |X| of P_UX")
    cdf = np.cumsum(w, axis=1)
    y_size = w.shape[1]

    if codebook_policy == "fixed":
        if codebook is None:
            codebook = sample_codebook(ptype, rc.R1, rc.R2, rng=derive_rng(seed, f"codebook/{n}"))
        elif codebook.n != n:
            raise ValueError("codebook blocklength differs from n")
        cache = _DecodeCache(codebook, rc, y_size)

    n_blocks = math.ceil(trials / block_size)

    def run_block(b: int) -> TrialTally:
        size = min(block_size, trials - b * block_size)
        rng = derive_rng(seed, f"trials/{n}/{codebook_policy}", b)
        tally = TrialTally(seed=seed, n=n)
        if codebook_policy == "fixed":
            m1 = rng.integers(0, codebook.M1, size)
            m2 = rng.integers(0, codebook.M2, size)
            ys = _sample_outputs(codebook.x[m2, m1], cdf, rng)
            for out, a, c in zip(cache.decode(ys), m1, m2):
                tally.record(out, (int(a), int(c)))
        else:
            for _ in range(size):
                cb = sample_codebook(ptype, rc.R1, rc.R2, rng=rng)
                y = _sample_outputs(cb.x[0, 0][None], cdf, rng)
                tally.record(decode_y_batch(y, cb, rc, y_size)[0])
        return tally

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run_block, range(n_blocks)))
    else:
        parts = [run_block(b) for b in range(n_blocks)]
    total = TrialTally(seed=seed, n=n)
    for part in parts:
        total = total + part
    return total


# ---------------------------------------------------------------------------
# estimates and exponent fits


@dataclass(frozen=True)
class ProbEstimate:
    value: float
    low: float
    high: float
    count: int
    trials: int


def wilson_interval(count: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval at ``z`` standard deviations."""
    conf = 2 * stats.norm.cdf(z) - 1
    ci = stats.binomtest(int(count), int(trials)).proportion_ci(confidence_level=conf, method="wilson")
    return float(ci.low), float(ci.high)


def within_wilson(p_true: float, count: int, trials: int, z: float = 3.0) -> bool:
    """True iff ``p_true`` lies in the Wilson interval, i.e. ``|p_hat - p| <= z sigma(p)``."""
    lo, hi = wilson_interval(count, trials, z)
    eps = 1e-12
    return lo - eps <= p_true <= hi + eps


def estimate(count: int, trials: int) -> ProbEstimate:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if count == 0:
        return ProbEstimate(0.0, 0.0, min(1.0, 3.0 / trials), 0, trials)
    lo, hi = wilson_interval(count, trials)
    return ProbEstimate(count / trials, lo, hi, count, trials)


def estimate_error_probs(tally: TrialTally) -> dict[str, ProbEstimate]:
    """Total (``e1``, ``e2``) and undetected (``e1hat``, ``e2hat``) error estimates."""
    N = tally.trials
    return {
        "e1": estimate(tally.msg1_total, N),
        "e1hat": estimate(tally.msg1_undetected, N),
        "e2": estimate(tally.msg2_total, N),
        "e2hat": estimate(tally.msg2_undetected, N),
    }


class InsufficientData(ValueError):
    pass


@dataclass(frozen=True)
class ExponentFit:
    ns: tuple
    estimates: tuple
    slope: float
    intercept: float
    residuals: tuple


def fit_exponent(ns, probs) -> tuple[float, float, np.ndarray]:
    """Least-squares line through ``(n, -log2 p)``; returns slope, intercept, residuals."""
    ns = np.asarray(ns, dtype=float)
    y = -np.log2(np.asarray(probs, dtype=float))
    slope, intercept = np.polyfit(ns, y, 1)
    return float(slope), float(intercept), y - (slope * ns + intercept)


def empirical_exponent(series, event: str = "e1") -> ExponentFit:
    """Fit the decay rate of one error probability across blocklengths.

    ``series`` is a list of ``(n, TrialTally)`` pairs with strictly increasing
    ``n``; zero-count points are excluded from the fit.
    """
    ns = [int(n) for n, _ in series]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise InsufficientData("blocklengths must be strictly increasing")
    ests = [estimate_error_probs(t)[event] for _, t in series]
    usable = [(n, e.value) for n, e in zip(ns, ests) if e.value > 0]
    if len(usable) < 3:
        raise InsufficientData(f"need >= 3 blocklengths with nonzero counts, have {len(usable)}")
    slope, intercept, res = fit_exponent([u[0] for u in usable], [u[1] for u in usable])
    return ExponentFit(tuple(ns), tuple(ests), slope, intercept, tuple(res))
