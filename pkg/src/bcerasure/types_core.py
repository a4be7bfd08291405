"""Finite-alphabet probability primitives, joint types and information measures.

Everything is measured in bits.  ``0 log 0`` is taken to be 0 and
``q log(q/0)`` is ``+inf`` for ``q > 0``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

INF = float("inf")
PROB_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def xlog2x(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log2(p[pos])
    return out


def entropy(probs) -> float:
    """Shannon entropy in bits of a probability array of any shape."""
    return float(-xlog2x(probs).sum())


def kl_divergence(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pos = p > 0
    if np.any(q[pos] <= 0):
        return INF
    return float(np.sum(p[pos] * np.log2(p[pos] / q[pos])))


@dataclass(frozen=True)
class Alphabet:
    size: int

    def __post_init__(self):
        if int(self.size) < 1:
            raise ValueError(f"alphabet size must be >= 1, got {self.size}")
        object.__setattr__(self, "size", int(self.size))


def _check_probs(probs: np.ndarray, what: str) -> np.ndarray:
    if probs.size == 0:
        raise ValueError(f"{what}: empty probability vector")
    if not np.all(np.isfinite(probs)):
        raise ValueError(f"{what}: non-finite entries")
    if np.any(probs < -PROB_TOL) or np.any(probs > 1 + PROB_TOL):
        raise ValueError(f"{what}: entries outside [0, 1]")
    total = probs.sum()
    if abs(total - 1.0) > PROB_TOL * max(1, probs.size):
        raise ValueError(f"{what}: entries sum to {total!r}, not 1")
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability vector over a (possibly product) finite alphabet.

    ``probs`` may be multi-dimensional; a joint distribution of ``(U, X)`` is
    stored with shape ``(|U|, |X|)``.
    """

    probs: np.ndarray

    def __post_init__(self):
        p = _check_probs(np.array(self.probs, dtype=float), "Distribution")
        object.__setattr__(self, "probs", _frozen(p))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.probs.shape

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.probs.size)

    @property
    def flat(self) -> np.ndarray:
        return self.probs.reshape(-1)

    def marginal(self, axis: int) -> "Distribution":
        """Marginal on dimension ``axis`` (all other dimensions summed out)."""
        others = tuple(i for i in range(self.probs.ndim) if i != axis)
        return Distribution(self.probs.sum(axis=others))

    def entropy(self) -> float:
        return entropy(self.probs)

    def __eq__(self, other):
        return isinstance(other, Distribution) and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash((self.probs.shape, self.probs.tobytes()))

    def __repr__(self):
        return f"Distribution({self.probs.tolist()})"


@dataclass(frozen=True, eq=False)
class Channel:
    """Stochastic matrix; row ``a`` is the output distribution given input ``a``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2:
            raise ValueError("Channel matrix must be two-dimensional")
        rows = [_check_probs(row, f"Channel row {i}") for i, row in enumerate(m)]
        object.__setattr__(self, "matrix", _frozen(np.array(rows)))

    @property
    def input_alphabet(self) -> Alphabet:
        return Alphabet(self.matrix.shape[0])

    @property
    def output_alphabet(self) -> Alphabet:
        return Alphabet(self.matrix.shape[1])

    @property
    def rows(self) -> list[Distribution]:
        return [Distribution(r) for r in self.matrix]

    def __eq__(self, other):
        return isinstance(other, Channel) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.matrix.shape, self.matrix.tobytes()))

    def __repr__(self):
        return f"Channel({self.matrix.tolist()})"


def _as_probs(dist) -> np.ndarray:
    if isinstance(dist, Distribution):
        return dist.flat
    return np.asarray(dist, dtype=float).reshape(-1)


def _as_matrix(ch) -> np.ndarray:
    if isinstance(ch, Channel):
        return ch.matrix
    return np.asarray(ch, dtype=float)


@dataclass(frozen=True, eq=False)
class JointType:
    """Empirical joint distribution of one or more sequences of length ``n``."""

    counts: np.ndarray
    alphabets: tuple[Alphabet, ...] = field(default=())

    def __post_init__(self):
        c = np.array(self.counts)
        if not np.issubdtype(c.dtype, np.integer):
            if not np.all(c == np.round(c)):
                raise ValueError("JointType counts must be integers")
            c = c.astype(np.int64)
        c = c.astype(np.int64)
        if np.any(c < 0):
            raise ValueError("JointType counts must be non-negative")
        if c.sum() < 1:
            raise ValueError("JointType must have denominator n >= 1")
        object.__setattr__(self, "counts", _frozen(c))
        if not self.alphabets:
            object.__setattr__(self, "alphabets", tuple(Alphabet(s) for s in c.shape))
        elif tuple(a.size for a in self.alphabets) != c.shape:
            raise ValueError("alphabets do not match the counts shape")

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def distribution(self) -> Distribution:
        return Distribution(self.counts / self.n)

    def marginal(self, axes: Sequence[int] | int) -> "JointType":
        """Keep the listed coordinates, summing out the rest."""
        if isinstance(axes, int):
            axes = (axes,)
        drop = tuple(i for i in range(self.counts.ndim) if i not in axes)
        c = self.counts.sum(axis=drop) if drop else self.counts
        kept = sorted(axes)
        return JointType(np.transpose(c, [kept.index(a) for a in axes]))

    def __eq__(self, other):
        return isinstance(other, JointType) and np.array_equal(self.counts, other.counts)

    def __hash__(self):
        return hash((self.counts.shape, self.counts.tobytes()))

    def __repr__(self):
        return f"JointType(n={self.n}, counts={self.counts.tolist()})"


def joint_type_of(*seqs, sizes: Sequence[int] | None = None) -> JointType:
    """Joint type of equal-length integer sequences.

    ``sizes`` gives the alphabet size of every sequence; by default it is
    ``max(symbol) + 1`` per sequence.
    """
    if not seqs:
        raise ValueError("need at least one sequence")
    arrs = [np.asarray(s, dtype=np.int64).reshape(-1) for s in seqs]
    n = arrs[0].size
    if n < 1:
        raise ValueError("sequences must have length >= 1")
    if any(a.size != n for a in arrs):
        raise ValueError("sequence length mismatch")
    if sizes is None:
        sizes = [int(a.max()) + 1 for a in arrs]
    sizes = [int(s) for s in sizes]
    if len(sizes) != len(arrs):
        raise ValueError("one alphabet size per sequence required")
    for a, s in zip(arrs, sizes):
        if a.min() < 0 or a.max() >= s:
            raise ValueError(f"symbol out of range for alphabet of size {s}")
    flat = np.ravel_multi_index(arrs, sizes)
    counts = np.bincount(flat, minlength=int(np.prod(sizes))).reshape(sizes)
    return JointType(counts)


def _mi_from_joint(joint: np.ndarray) -> float:
    joint = joint / joint.sum()
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    return float(max(xlog2x(joint).sum() - xlog2x(pa).sum() - xlog2x(pb).sum(), 0.0))


def empirical_mutual_info(seq_a, seq_b, size_a: int | None = None, size_b: int | None = None) -> float:
    """Mutual information in bits of the joint type of two sequences.

    Multi-symbol arguments (e.g. pairs ``(u, x)``) should be encoded as a
    single product-alphabet index beforehand, see :func:`pair_index`.
    """
    sizes = None if size_a is None or size_b is None else (size_a, size_b)
    jt = joint_type_of(seq_a, seq_b, sizes=sizes)
    return _mi_from_joint(jt.counts.astype(float))


def pair_index(u, x, x_size: int) -> np.ndarray:
    """Encode a pair sequence ``(u_i, x_i)`` as ``u_i * |X| + x_i``."""
    return np.asarray(u, dtype=np.int64) * x_size + np.asarray(x, dtype=np.int64)


def mutual_information(input_dist, channel) -> float:
    """I(P, V) in bits."""
    p = _as_probs(input_dist)
    v = _as_matrix(channel)
    if v.shape[0] != p.size:
        raise ValueError(f"input distribution has {p.size} symbols, channel expects {v.shape[0]}")
    return _mi_from_joint(p[:, None] * v)


def conditional_mutual_information(p_ux, channel) -> float:
    """I(X ^ Y | U) under ``P_UX x V`` for a channel ``V: U x X -> Y``."""
    p = p_ux.probs if isinstance(p_ux, Distribution) else np.asarray(p_ux, dtype=float)
    if p.ndim != 2:
        raise ValueError("P_UX must be a two-dimensional joint distribution")
    v = _as_matrix(channel)
    nu, nx = p.shape
    if v.shape[0] != nu * nx:
        raise ValueError(f"channel must have {nu * nx} input rows, got {v.shape[0]}")
    joint = p[:, :, None] * v.reshape(nu, nx, -1)
    # I(X;Y|U) = H(UX) + H(UY) - H(U) - H(UXY)
    h = -xlog2x(p).sum() - xlog2x(joint.sum(axis=1)).sum() + xlog2x(p.sum(axis=1)).sum() + xlog2x(joint).sum()
    return float(max(h, 0.0))


def conditional_kl(v, w, input_dist) -> float:
    """D(V || W | P) in bits; ``+inf`` on absolute-continuity failure."""
    vm = _as_matrix(v)
    wm = _as_matrix(w)
    p = _as_probs(input_dist)
    if vm.shape != wm.shape:
        raise ValueError(f"channel shapes differ: {vm.shape} vs {wm.shape}")
    if vm.shape[0] != p.size:
        raise ValueError("input distribution does not match channel inputs")
    total = 0.0
    for pa, vr, wr in zip(p, vm, wm):
        if pa <= 0:
            continue
        d = kl_divergence(vr, wr)
        if d == INF:
            return INF
        total += pa * d
    return float(max(total, 0.0))


def simplex_lattice(denominator: int, size: int) -> np.ndarray:
    """All probability vectors of length ``size`` with entries in ``(1/denominator) Z``.

    Rows are returned in lexicographic order of their integer numerators.
    """
    if denominator < 1:
        raise ValueError("denominator must be >= 1")
    if size == 1:
        return np.ones((1, 1))
    rows = [
        (*c, denominator - sum(c))
        for c in itertools.product(range(denominator + 1), repeat=size - 1)
        if sum(c) <= denominator
    ]
    return np.array(rows, dtype=float) / denominator


def enumerate_conditional_types(
    input_alphabet: Alphabet, output_alphabet: Alphabet, input_type: JointType | None, k: int
) -> Iterator[Channel]:
    """Stream every conditional type ``V`` on the lattice of denominator ``k``.

    Row ``a`` takes entries in multiples of ``1 / (k * weight(a))`` where
    ``weight(a)`` is the count of ``a`` in ``input_type``; rows of symbols
    that never occur are fixed to uniform.  Order is lexicographic over rows.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    na, ny = input_alphabet.size, output_alphabet.size
    if input_type is None:
        weights = np.zeros(na, dtype=np.int64)
    else:
        weights = np.asarray(input_type.counts).reshape(-1)
        if weights.size != na:
            raise ValueError("input type does not match the input alphabet")
    uniform = np.full((1, ny), 1.0 / ny)
    per_row = [simplex_lattice(k * int(w), ny) if w > 0 else uniform for w in weights]
    for choice in itertools.product(*(range(len(r)) for r in per_row)):
        yield Channel(np.array([per_row[a][c] for a, c in enumerate(choice)]))
