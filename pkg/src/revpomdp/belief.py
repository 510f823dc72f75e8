"""Beliefs, Bayes updates, and the k-uniform simplex grid.

Grid points are stored as integer count vectors ``n`` with ``sum(n) == k``;
the belief they stand for is ``n / k``. Projection onto the grid is done in
exact integer arithmetic, so it is deterministic regardless of float noise.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .model import Pomdp


class BeliefError(ValueError):
    pass


class ZeroProbabilitySignal(BeliefError):
    """The requested signal cannot be observed from this belief and action."""


class ResolutionTooSmall(BeliefError):
    """No grid point shares the belief's support; use a larger k."""


@dataclass(frozen=True)
class Belief:
    """Probability vector over the model's states (declaration order).

    Exact mode holds Fractions; float mode holds floats and tolerates a sum
    error up to 1e-12.
    """

    probs: tuple

    def __post_init__(self):
        probs = tuple(self.probs)
        object.__setattr__(self, "probs", probs)
        if not probs:
            raise BeliefError("empty belief")
        if any(p < 0 for p in probs):
            raise BeliefError("negative entry in belief")
        total = sum(probs)
        if self.exact:
            if total != 1:
                raise BeliefError(f"belief sums to {total}")
        elif abs(total - 1) > 1e-12:
            raise BeliefError(f"belief sums to {total!r}")

    @property
    def exact(self) -> bool:
        return all(isinstance(p, (Fraction, int)) for p in self.probs)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.probs) if p > 0)

    @property
    def dim(self) -> int:
        return len(self.probs)

    def is_dirac(self) -> bool:
        return len(self.support) == 1

    def as_array(self) -> np.ndarray:
        return np.array([float(p) for p in self.probs])

    @classmethod
    def dirac(cls, n: int, i: int) -> "Belief":
        return cls(tuple(Fraction(int(j == i)) for j in range(n)))

    @classmethod
    def of(cls, model: Pomdp, mapping) -> "Belief":
        """From a ``{state: prob}`` mapping or a single state name."""
        from .model import to_fraction

        if isinstance(mapping, str):
            return cls.dirac(model.n_states, model.state_index[mapping])
        probs = [Fraction(0)] * model.n_states
        for s, p in mapping.items():
            probs[model.state_index[s]] = to_fraction(p)
        return cls(tuple(probs))

    @classmethod
    def initial(cls, model: Pomdp) -> "Belief":
        return cls(model.initial_vector)

    def __str__(self):
        return "(" + ", ".join(str(p) for p in self.probs) + ")"


class Outcome(NamedTuple):
    signal: str
    probability: object
    posterior: Belief


def _unnormalized(model: Pomdp, b: Belief, a: str) -> dict[str, list]:
    """Joint weights b(s) * delta(s,a)(s',z), grouped by signal."""
    zero = Fraction(0) if b.exact else 0.0
    out: dict[str, list] = {}
    for i in b.support:
        p = b.probs[i]
        for (t, z), q in model.kernel[(model.states[i], a)].items():
            row = out.get(z)
            if row is None:
                row = out[z] = [zero] * model.n_states
            row[model.state_index[t]] += p * (q if b.exact else float(q))
    return out


def _normalize(row, exact: bool) -> Belief:
    total = sum(row)
    if exact:
        return Belief(tuple(x / total for x in row))
    post = [x / total for x in row]
    # renormalise once more so float beliefs satisfy the 1e-12 sum contract
    s = math.fsum(post)
    return Belief(tuple(x / s for x in post))


def update(model: Pomdp, b: Belief, a: str, z: str) -> Belief:
    """Bayes posterior after playing ``a`` and observing ``z``."""
    row = _unnormalized(model, b, a).get(z)
    if row is None or sum(row) <= 0:
        raise ZeroProbabilitySignal(f"signal {z!r} has probability 0 after action {a!r}")
    return _normalize(row, b.exact)


def one_step_outcomes(model: Pomdp, b: Belief, a: str) -> list[Outcome]:
    """All positive-probability signals with their probability and posterior,
    in signal declaration order."""
    joint = _unnormalized(model, b, a)
    out = []
    for z in model.signals:
        row = joint.get(z)
        if row is None:
            continue
        total = sum(row)
        if total > 0:
            out.append(Outcome(z, total, _normalize(row, b.exact)))
    return out


def l1_distance(b, c) -> float | Fraction:
    p = b.probs if isinstance(b, Belief) else tuple(b)
    q = c.probs if isinstance(c, Belief) else tuple(c)
    if len(p) != len(q):
        raise BeliefError(f"dimension mismatch {len(p)} vs {len(q)}")
    return sum(abs(x - y) for x, y in zip(p, q))


# ---------------------------------------------------------------------------
# grid


def _comb(n: int, r: int) -> int:
    return math.comb(n, r) if n >= 0 and r >= 0 else 0


@dataclass(frozen=True)
class Grid:
    """The k-uniform grid over the (n_states - 1)-simplex.

    Points are enumerated in lexicographic order of their count vectors.
    """

    k: int
    n_states: int

    def __post_init__(self):
        if self.k < 1:
            raise BeliefError("grid resolution k must be at least 1")
        if self.n_states < 1:
            raise BeliefError("grid needs at least one state")

    @property
    def size(self) -> int:
        return math.comb(self.k + self.n_states - 1, self.n_states - 1)

    def __len__(self) -> int:
        return self.size

    def counts(self) -> np.ndarray:
        """All points as an (size, n_states) int64 array, in index order."""
        S, k = self.n_states, self.k
        if S == 1:
            return np.array([[k]], dtype=np.int64)
        bars = np.fromiter(
            itertools.chain.from_iterable(itertools.combinations(range(k + S - 1), S - 1)),
            dtype=np.int64,
            count=self.size * (S - 1),
        ).reshape(-1, S - 1)
        edges = np.concatenate(
            [np.full((len(bars), 1), -1, dtype=np.int64), bars, np.full((len(bars), 1), k + S - 1, dtype=np.int64)],
            axis=1,
        )
        return np.diff(edges, axis=1) - 1

    def beliefs(self):
        for row in self.counts():
            yield Belief(tuple(Fraction(int(n), self.k) for n in row))

    def index(self, counts) -> int:
        """Lexicographic rank of a count vector."""
        counts = [int(x) for x in counts]
        if len(counts) != self.n_states or sum(counts) != self.k or min(counts) < 0:
            raise BeliefError(f"{counts} is not a point of the grid")
        rank, remaining = 0, self.k
        for i, n in enumerate(counts[:-1]):
            parts = self.n_states - i - 1
            # points whose i-th coordinate is smaller than n
            rank += _comb(remaining + parts, parts) - _comb(remaining - n + parts, parts)
            remaining -= n
        return rank

    def index_array(self, counts: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`index` (int64; requires size < 2**62)."""
        counts = np.asarray(counts, dtype=np.int64)
        rank = np.zeros(len(counts), dtype=np.int64)
        remaining = np.full(len(counts), self.k, dtype=np.int64)
        for i in range(self.n_states - 1):
            parts = self.n_states - i - 1
            n = counts[:, i]
            rank += _comb_array(remaining + parts, parts) - _comb_array(remaining - n + parts, parts)
            remaining -= n
        return rank

    def point(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.size:
            raise IndexError(index)
        out, remaining = [], self.k
        for i in range(self.n_states - 1):
            parts = self.n_states - i - 1
            n = 0
            while True:
                block = _comb(remaining - n + parts - 1, parts - 1)
                if index < block:
                    break
                index -= block
                n += 1
            out.append(n)
            remaining -= n
        out.append(remaining)
        return tuple(out)

    def belief(self, counts) -> Belief:
        return Belief(tuple(Fraction(int(n), self.k) for n in counts))


def _comb_array(n: np.ndarray, r: int) -> np.ndarray:
    """C(n, r) elementwise for a fixed small r, exact in int64."""
    out = np.ones_like(n)
    for j in range(1, r + 1):
        out = out * (n - j + 1) // j
    return np.where(n >= r, out, 0)


def grid_points(k: int, n_states: int) -> Grid:
    return Grid(k, n_states)


def apportion(weights: Sequence[int], k: int) -> tuple[int, ...]:
    """Counts of the same-support grid point nearest (in L1) to ``weights``.

    ``weights`` are non-negative integers proportional to the belief. Each
    support coordinate first gets ``max(1, floor)``, then the leftover units go
    to the largest fractional remainders among coordinates that were not
    raised to 1; ties go to the earlier state. When the floor-of-one rule
    overshoots ``k``, units are taken back from coordinates above 1 with the
    smallest remainder first, each removal costing exactly one unit of L1.
    """
    weights = [int(w) for w in weights]
    total = sum(weights)
    if total <= 0:
        raise BeliefError("weights must have positive mass")
    support = [i for i, w in enumerate(weights) if w > 0]
    if len(support) > k:
        raise ResolutionTooSmall(f"support of size {len(support)} needs k >= {len(support)}, got k={k}")
    counts = [0] * len(weights)
    rems = [0] * len(weights)
    raised = set()
    for i in support:
        q, r = divmod(weights[i] * k, total)
        if q == 0:
            counts[i] = 1
            raised.add(i)
        else:
            counts[i] = q
            rems[i] = r
    left = k - sum(counts)
    if left >= 0:
        eligible = sorted((i for i in support if i not in raised and rems[i] > 0), key=lambda i: (-rems[i], i))
        for i in eligible[:left]:
            counts[i] += 1
    else:
        while left < 0:
            i = min((i for i in support if counts[i] > 1), key=lambda i: (rems[i], i))
            counts[i] -= 1
            left += 1
    return tuple(counts)


def project(b: Belief, k) -> Belief:
    """Nearest grid belief with the same support (L1 distance)."""
    if isinstance(k, Grid):
        k = k.k
    probs = [Fraction(p) for p in b.probs]
    den = math.lcm(*(p.denominator for p in probs))
    counts = apportion([int(p * den) for p in probs], k)
    return Belief(tuple(Fraction(n, k) for n in counts))


def project_counts(weights: np.ndarray, k: int) -> np.ndarray:
    """Row-wise :func:`apportion` for an (M, S) array of non-negative integer weights.

    Rows are reduced by their gcd first; when ``k * weight`` could overflow
    int64 the arithmetic runs on Python integers (object arrays) instead.
    """
    W = np.asarray(weights)
    if W.dtype != object:
        W = W.astype(np.int64)
    M, S = W.shape
    if M == 0:
        return np.zeros((M, S), dtype=np.int64)
    if W.dtype == object:
        g = np.array([math.gcd(*(int(x) for x in row)) or 1 for row in W], dtype=object)
        W = W // g[:, None]
        if max(int(x) for x in W.max(axis=1)) * k * 4 < 2**62:
            W = W.astype(np.int64)
    else:
        g = np.gcd.reduce(W, axis=1)
        g[g == 0] = 1
        W = W // g[:, None]
        if (W.max(axis=1).astype(float) * float(k) * 4.0 >= 2.0**62).any():
            W = W.astype(object)
    return _apportion_rows(W, k)


def _apportion_rows(W: np.ndarray, k: int) -> np.ndarray:
    M, S = W.shape
    out = np.zeros((M, S), dtype=np.int64)
    supp = (W > 0).astype(bool)
    if (np.count_nonzero(supp, axis=1) > k).any():
        raise ResolutionTooSmall(f"support larger than k={k}")
    total = W.sum(axis=1)
    scaled = W * k
    q = scaled // total[:, None]
    rem = scaled - q * total[:, None]
    raised = supp & (q == 0).astype(bool)
    counts = np.where(raised, 1, q)
    left = (k - counts.sum(axis=1)).astype(np.int64)
    neg = left < 0
    for r in np.flatnonzero(neg):
        out[r] = apportion([int(x) for x in W[r]], k)
    pos = ~neg
    if pos.any():
        key = np.where(supp & ~raised & (rem > 0).astype(bool), rem, -1)[pos]
        order = np.argsort(-key, axis=1, kind="stable")
        rank = np.empty_like(order)
        rows = np.arange(order.shape[0])[:, None]
        rank[rows, order] = np.arange(S)[None, :]
        bump = rank < left[pos][:, None]
        out[pos] = (counts[pos] + bump).astype(np.int64)
    return out


def project_array(probs: np.ndarray, k: int) -> np.ndarray:
    """Project float beliefs (rows) exactly, via their binary-exact values."""
    rows = []
    for row in np.atleast_2d(probs):
        fr = [Fraction(float(x)) for x in row]
        den = math.lcm(*(f.denominator for f in fr))
        rows.append(apportion([int(f * den) for f in fr], k))
    return np.array(rows, dtype=np.int64)


def grid_step(model: Pomdp, counts: np.ndarray, k: int):
    """Projected one-step successors of grid points.

    Returns ``(succ, prob)`` with ``succ`` of shape (M, A, Z, S) holding the
    projected posterior counts (zeros where the signal is impossible) and
    ``prob`` of shape (M, A, Z) holding signal probabilities as floats.
    """
    counts = np.asarray(counts, dtype=np.int64)
    K = model.kernel_int
    A, Z, S, _ = K.shape
    if K.dtype == object or float(k) * model.denominator * S >= 2.0**62:
        counts = counts.astype(object)
        K = K.astype(object)
    M = len(counts)
    succ = np.zeros((M, A, Z, S), dtype=np.int64)
    prob = np.zeros((M, A, Z))
    scale = float(k) * model.denominator
    for a in range(A):
        for z in range(Z):
            if not K[a, z].any():
                continue
            U = counts @ K[a, z]
            w = U.sum(axis=1)
            ok = w > 0
            if not ok.any():
                continue
            prob[ok, a, z] = [float(Fraction(int(x)) / Fraction(k * model.denominator)) for x in w[ok]] \
                if counts.dtype == object else w[ok] / scale
            succ[ok, a, z] = project_counts(U[ok], k)
    return succ, prob
