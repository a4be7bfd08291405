"""Constant-composition superposition codebooks and the two-step erasure decoder.

Messages are 0-based: the transmitted pair written ``(1, 1)`` in the usual
1-based convention is ``(0, 0)`` here.  Pairs are flattened as
``m2 * M1 + m1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .exponents import RateConfig
from .types_core import JointType, joint_type_of

# Slack on every threshold comparison; empirical MI is a sum of logs and
# mathematically equal values can differ in the last bits.
GUARD = 1e-12
DEFAULT_MAX_MESSAGES = 1 << 16


def message_count(n: int, rate: float) -> int:
    """``ceil(2^(n R))``, robust to rates computed as ``log2(M) / n``."""
    return max(1, math.ceil(2.0 ** (n * rate) - 1e-9))


def sample_from_type_class(jtype: JointType, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw from the type class of a one-dimensional type."""
    counts = np.asarray(jtype.counts).reshape(-1)
    canonical = np.repeat(np.arange(counts.size), counts)
    return rng.permutation(canonical)


def sample_from_shell(u, p_ux: JointType, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw of ``x`` with ``joint_type_of(u, x) == p_ux``."""
    u = np.asarray(u, dtype=np.int64)
    counts = np.asarray(p_ux.counts)
    nu, nx = counts.shape
    if u.size != p_ux.n or u.min() < 0 or u.max() >= nu:
        raise ValueError("u does not match the joint type")
    if not np.array_equal(np.bincount(u, minlength=nu), counts.sum(axis=1)):
        raise ValueError("shell is empty: the type of u differs from the U-marginal of P_UX")
    x = np.empty_like(u)
    for a in range(nu):
        pos = np.flatnonzero(u == a)
        x[pos] = rng.permutation(np.repeat(np.arange(nx), counts[a]))
    return x


@dataclass(frozen=True, eq=False)
class Codebook:
    """Cloud centers ``u[m2]`` and satellites ``x[m2, m1]``."""

    u: np.ndarray  # (M2, n)
    x: np.ndarray  # (M2, M1, n)
    p_ux: JointType
    seed: int | None = None

    def __post_init__(self):
        u = np.array(self.u, dtype=np.int64)
        x = np.array(self.x, dtype=np.int64)
        if u.ndim != 2 or x.ndim != 3 or x.shape[0] != u.shape[0] or x.shape[2] != u.shape[1]:
            raise ValueError("inconsistent codebook shapes")
        u.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.u.shape[1]

    @property
    def M1(self) -> int:
        return self.x.shape[1]

    @property
    def M2(self) -> int:
        return self.u.shape[0]

    @property
    def u_size(self) -> int:
        return self.p_ux.counts.shape[0]

    @property
    def x_size(self) -> int:
        return self.p_ux.counts.shape[1]

    def pair_codes(self) -> np.ndarray:
        """``(M2 * M1, n)`` product-alphabet sequences ``u * |X| + x``."""
        z = self.u[:, None, :] * self.x_size + self.x
        return z.reshape(-1, self.n)

    def codeword(self, m1: int, m2: int) -> np.ndarray:
        return self.x[m2, m1]

    def check_compositions(self) -> bool:
        sizes = (self.u_size, self.x_size)
        for m2 in range(self.M2):
            for m1 in range(self.M1):
                if joint_type_of(self.u[m2], self.x[m2, m1], sizes=sizes) != self.p_ux:
                    return False
        return True

    def __eq__(self, other):
        return (
            isinstance(other, Codebook)
            and np.array_equal(self.u, other.u)
            and np.array_equal(self.x, other.x)
            and self.p_ux == other.p_ux
        )

    __hash__ = None  # type: ignore[assignment]


def sample_codebook(
    p_ux: JointType,
    R1: float,
    R2: float,
    n: int | None = None,
    seed: int | None = None,
    rng: np.random.Generator | None = None,
    max_messages: int = DEFAULT_MAX_MESSAGES,
) -> Codebook:
    """Random constant-composition superposition codebook with ``ceil(2^{nR_j})`` messages."""
    if n is None:
        n = p_ux.n
    if n != p_ux.n:
        raise ValueError(f"P_UX has denominator {p_ux.n}, blocklength is {n}")
    if R1 < 0 or R2 < 0:
        raise ValueError("rates must be non-negative")
    M1, M2 = message_count(n, R1), message_count(n, R2)
    if M1 * M2 > max_messages:
        raise ValueError(f"{M1} x {M2} messages exceed the cap of {max_messages}")
    if rng is None:
        rng = np.random.default_rng(seed)
    pu_type = p_ux.marginal(0)
    u = np.empty((M2, n), dtype=np.int64)
    x = np.empty((M2, M1, n), dtype=np.int64)
    for m2 in range(M2):
        u[m2] = sample_from_type_class(pu_type, rng)
        for m1 in range(M1):
            x[m2, m1] = sample_from_shell(u[m2], p_ux, rng)
    return Codebook(u, x, p_ux, seed)


class Stage(enum.Enum):
    STEP1 = "step1"
    STEP2 = "step2"
    DOUBLE_ERASURE = "double_erasure"


@dataclass(frozen=True)
class DecodeOutcome:
    """``msg1`` / ``msg2`` are decoded indices or ``None`` for an erasure."""

    msg1: int | None
    msg2: int | None
    stage: Stage


ERASED = None


def _clears(i_hat: float, i_other: float, r_tilde: float, lam: float, r: float) -> bool:
    return i_hat >= r_tilde + lam * max(i_other - r, 0.0) - GUARD


def satisfiers_exhaustive(mi: np.ndarray, r_tilde: float, lam: float, r: float) -> list[int]:
    """Every index whose score clears the threshold against every other index.

    The threshold never drops below ``r_tilde``, which also settles the
    single-candidate case.
    """
    out = []
    M = mi.size
    for a in range(M):
        if not _clears(mi[a], -np.inf, r_tilde, lam, r):
            continue
        if all(_clears(mi[a], mi[b], r_tilde, lam, r) for b in range(M) if b != a):
            out.append(a)
    return out


def satisfiers_fast(mi: np.ndarray, r_tilde: float, lam: float, r: float) -> list[int]:
    """Same set as :func:`satisfiers_exhaustive`, testing only near-maximal scores.

    With ``lam >= 1`` and ``r_tilde >= r`` any satisfier attains the maximum
    score, and the threshold is monotone in the competitor's score, so each
    candidate only needs comparing against the best competitor.
    """
    M = mi.size
    if M == 1:
        return [0] if _clears(mi[0], -np.inf, r_tilde, lam, r) else []
    top = int(np.argmax(mi))
    top_val = mi[top]
    rest = np.delete(mi, top)
    second = rest.max()
    out = []
    for a in np.flatnonzero(mi >= top_val - 2 * GUARD):
        other = second if a == top else top_val
        if _clears(mi[a], other, r_tilde, lam, r):
            out.append(int(a))
    return out


def decide(mi_pairs: np.ndarray, mi_clouds: np.ndarray, M1: int, rc: RateConfig, exhaustive: bool = False) -> DecodeOutcome:
    """Apply the two-step rule to precomputed empirical mutual informations."""
    # The fast path relies on lambda >= 1 and R_tilde >= R.
    valid = rc.lambda12 >= 1 and rc.lambda2 >= 1 and rc.Delta12 >= 0 and rc.Delta2 >= 0
    find = satisfiers_exhaustive if exhaustive or not valid else satisfiers_fast
    s1 = find(mi_pairs, rc.R12_tilde, rc.lambda12, rc.R12)
    if len(s1) == 1:
        m2, m1 = divmod(s1[0], M1)
        return DecodeOutcome(m1, m2, Stage.STEP1)
    s2 = find(mi_clouds, rc.R2_tilde, rc.lambda2, rc.R2)
    if len(s2) == 1:
        return DecodeOutcome(ERASED, s2[0], Stage.STEP2)
    return DecodeOutcome(ERASED, ERASED, Stage.DOUBLE_ERASURE)


def _check_outputs(ys, cb: Codebook) -> np.ndarray:
    ys = np.asarray(ys, dtype=np.int64)
    if ys.ndim == 1:
        ys = ys[None]
    if ys.shape[1] != cb.n:
        raise ValueError(f"output length {ys.shape[1]} differs from blocklength {cb.n}")
    return ys


def empirical_scores(ys, cb: Codebook, y_size: int):
    """``(pair scores (T, M1*M2), cloud scores (T, M2))`` for a batch of outputs."""
    ys = _check_outputs(ys, cb)
    pairs = kernels.batch_empirical_mi(cb.pair_codes(), ys, cb.u_size * cb.x_size, y_size)
    clouds = kernels.batch_empirical_mi(cb.u, ys, cb.u_size, y_size)
    return pairs, clouds


def _y_size(ys, y_size):
    return int(np.max(ys)) + 1 if y_size is None else int(y_size)


def decode_y(y, cb: Codebook, rc: RateConfig, y_size: int | None = None, exhaustive: bool = False) -> DecodeOutcome:
    """Two-step decoding at the receiver that wants both messages."""
    y = np.asarray(y, dtype=np.int64)
    pairs, clouds = empirical_scores(y, cb, max(_y_size(y, y_size), 1))
    return decide(pairs[0], clouds[0], cb.M1, rc, exhaustive)


def decode_y_batch(ys, cb: Codebook, rc: RateConfig, y_size: int, exhaustive: bool = False) -> list[DecodeOutcome]:
    pairs, clouds = empirical_scores(ys, cb, y_size)
    return [decide(p, c, cb.M1, rc, exhaustive) for p, c in zip(pairs, clouds)]


def decode_z(z, cb: Codebook, rc: RateConfig, z_size: int | None = None, exhaustive: bool = False) -> int | None:
    """Cloud-only erasure decoding at the receiver that wants ``M2``."""
    z = _check_outputs(z, cb)
    scores = kernels.batch_empirical_mi(cb.u, z, cb.u_size, max(_y_size(z, z_size), 1))[0]
    valid = rc.lambda2 >= 1 and rc.Delta2 >= 0
    find = satisfiers_exhaustive if exhaustive or not valid else satisfiers_fast
    s = find(scores, rc.R2_tilde, rc.lambda2, rc.R2)
    return s[0] if len(s) == 1 else ERASED
