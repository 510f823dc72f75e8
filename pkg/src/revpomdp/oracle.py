"""Ground truth for small instances: exact rational values over the belief
tree, reliable actions, and a seeded Monte Carlo simulator."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .belief import Belief, one_step_outcomes
from .mdp import FiniteMdp, quantitative_reach
from .model import Pomdp, require_revealing, validate, to_raw
from .policies import HALT, IMPOSSIBLE, Policy, scripted_policy, support_witness_policy, uniform_random_policy
from .qualitative import terminal_states

__all__ = [
    "OracleLimitExceeded", "exact_tstep_value", "BeliefGraph", "belief_graph", "ExactValues", "exact_value",
    "absorbing_targets", "exact_reach_value", "reliable_actions", "uniform_reliable_policy", "SimStats",
    "simulate", "Policy", "scripted_policy", "support_witness_policy", "uniform_random_policy",
]

DEFAULT_MAX_NODES = 1_000_000


class OracleLimitExceeded(RuntimeError):
    pass


def _exact(model: Pomdp, b) -> Belief:
    if b is None:
        return Belief.initial(model)
    if not isinstance(b, Belief):
        b = Belief.of(model, b)
    if not b.exact:
        raise ValueError("the exact oracle needs a rational belief")
    return Belief(tuple(Fraction(p) for p in b.probs))


def _dirac_on(b: Belief, idx: frozenset) -> bool:
    supp = b.support
    return len(supp) == 1 and supp[0] in idx


def _target_idx(model: Pomdp, targets) -> frozenset:
    X = model.require_targets() if targets is None else targets
    return frozenset(model.state_index[s] for s in X)


def exact_tstep_value(model: Pomdp, targets: Iterable[str] | None, horizon: int, query=None,
                      max_nodes: int = DEFAULT_MAX_NODES) -> Fraction:
    """Exact T-step belief-reachability value by enumerating the belief tree.

    Beliefs are merged per depth, so the work is bounded by the number of
    distinct (belief, remaining steps) pairs; that count is what
    ``max_nodes`` limits.
    """
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    X = _target_idx(model, targets)
    root = _exact(model, query)
    levels = [{root.probs: root}]
    outcomes: dict[tuple, dict] = {}
    nodes = 1
    for _ in range(horizon):
        nxt: dict[tuple, Belief] = {}
        for key, b in levels[-1].items():
            if _dirac_on(b, X):
                continue
            if key not in outcomes:
                outcomes[key] = {a: one_step_outcomes(model, b, a) for a in model.actions}
            for outs in outcomes[key].values():
                for o in outs:
                    nxt.setdefault(o.posterior.probs, o.posterior)
        nodes += len(nxt)
        if nodes > max_nodes:
            raise OracleLimitExceeded(f"belief tree exceeds {max_nodes} nodes")
        levels.append(nxt)
    values = {key: Fraction(int(_dirac_on(b, X))) for key, b in levels[-1].items()}
    for depth in range(horizon - 1, -1, -1):
        cur = {}
        for key, b in levels[depth].items():
            if _dirac_on(b, X):
                cur[key] = Fraction(1)
                continue
            cur[key] = max(sum((o.probability * values[o.posterior.probs] for o in outs), Fraction(0))
                           for outs in outcomes[key].values())
        values = cur
    return values[root.probs]


@dataclass(eq=False)
class BeliefGraph:
    """Exact beliefs reachable from some roots, with their one-step outcomes."""

    model: Pomdp
    beliefs: list
    index: dict
    edges: dict  # (node, action) -> [(signal, prob, node')]

    def node(self, b: Belief) -> int | None:
        return self.index.get(tuple(Fraction(p) for p in b.probs))


def belief_graph(model: Pomdp, roots: Sequence[Belief], max_nodes: int = 100_000) -> BeliefGraph:
    beliefs, index, edges = [], {}, {}
    frontier = []
    for r in roots:
        r = _exact(model, r)
        if r.probs not in index:
            index[r.probs] = len(beliefs)
            beliefs.append(r)
            frontier.append(index[r.probs])
    while frontier:
        i = frontier.pop()
        b = beliefs[i]
        for a in model.actions:
            row = []
            for o in one_step_outcomes(model, b, a):
                j = index.get(o.posterior.probs)
                if j is None:
                    if len(beliefs) >= max_nodes:
                        raise OracleLimitExceeded(f"reachable exact beliefs exceed {max_nodes}")
                    j = index[o.posterior.probs] = len(beliefs)
                    beliefs.append(o.posterior)
                    frontier.append(j)
                row.append((o.signal, o.probability, j))
            edges[(i, a)] = row
    return BeliefGraph(model, beliefs, index, edges)


class ExactValues:
    """Exact infinite-horizon belief-reachability values on a finite belief
    closure, obtained by solving the belief MDP with rational arithmetic.

    Calling the handle on a belief outside the closure extends it.
    """

    def __init__(self, model: Pomdp, targets: Iterable[str] | None = None, roots: Sequence = (),
                 max_nodes: int = 2_000):
        require_revealing(model)
        self.model = model
        self.targets = frozenset(model.require_targets() if targets is None else targets)
        self._X = frozenset(model.state_index[s] for s in self.targets)
        self.max_nodes = max_nodes
        self._roots = [_exact(model, r) for r in (roots or [None])]
        self._solve()

    def _solve(self):
        g = belief_graph(self.model, self._roots, self.max_nodes)
        transitions = {}
        for (i, a), row in g.edges.items():
            dist: dict[int, Fraction] = {}
            for _z, p, j in row:
                dist[j] = dist.get(j, Fraction(0)) + p
            transitions[(i, a)] = dist
        mdp = FiniteMdp(tuple(range(len(g.beliefs))), self.model.actions, transitions)
        goal = [i for i, b in enumerate(g.beliefs) if _dirac_on(b, self._X)]
        vals = quantitative_reach(mdp, goal, exact=True)
        self.graph = g
        self.values = [vals[i] for i in range(len(g.beliefs))]

    def node(self, b: Belief) -> int:
        i = self.graph.node(b)
        if i is None:
            self._roots.append(_exact(self.model, b))
            self._solve()
            i = self.graph.node(b)
        return i

    def __call__(self, b) -> Fraction:
        return self.values[self.node(_exact(self.model, b))]

    def is_target_dirac(self, b: Belief) -> bool:
        return _dirac_on(b, self._X)


def exact_value(model: Pomdp, targets: Iterable[str] | None, query=None, max_nodes: int = 2_000) -> Fraction:
    return ExactValues(model, targets, [_exact(model, query)], max_nodes)(_exact(model, query))


def absorbing_targets(model: Pomdp, targets: Iterable[str] | None = None) -> Pomdp:
    """Copy of a revealing model whose targets are absorbing and announce themselves."""
    require_revealing(model)
    X = frozenset(model.require_targets() if targets is None else targets)
    raw = to_raw(model)
    raw["transitions"] = [t for t in raw["transitions"] if t["from"] not in X]
    for s in model.states:
        if s in X:
            raw["transitions"] += [{"from": s, "action": a, "to": s, "signal": s, "prob": 1} for a in model.actions]
    raw["targets"] = sorted(X, key=model.state_index.get)
    return validate(raw)


def exact_reach_value(model: Pomdp, targets: Iterable[str] | None, query=None, max_nodes: int = 2_000) -> Fraction:
    """Exact optimal probability of reaching a target state (not a belief)."""
    X = frozenset(model.require_targets() if targets is None else targets)
    return exact_value(absorbing_targets(model, X), X, query, max_nodes)


# ---------------------------------------------------------------------------
# reliable actions


def reliable_actions(model: Pomdp, b, values, tol=0) -> tuple[str, ...]:
    """Actions whose one-step expected value is within ``tol`` of the best.

    ``values`` maps beliefs to values (an :class:`ExactValues` handle or any
    callable). At a Dirac on a target the objective is already met, so every
    action is returned.
    """
    if values is None:
        raise ValueError("a value handle is required")
    b = b if isinstance(b, Belief) else Belief.of(model, b)
    if isinstance(values, ExactValues) and values.is_target_dirac(b):
        return tuple(model.actions)
    expected = {}
    for a in model.actions:
        expected[a] = sum((o.probability * values(o.posterior) for o in one_step_outcomes(model, b, a)),
                          Fraction(0) if b.exact else 0.0)
    best = max(expected.values())
    return tuple(a for a in model.actions if best - expected[a] <= tol)


def uniform_reliable_policy(model: Pomdp, targets: Iterable[str] | None, values: ExactValues | None = None,
                            start=None) -> Policy:
    """Plays uniformly over the exactly reliable actions at every reachable belief."""
    start_b = _exact(model, start)
    if values is None:
        values = ExactValues(model, targets, [start_b])
    root = values.node(start_b)
    g = values.graph
    A, Z = model.n_actions, model.n_signals
    N = len(g.beliefs)
    nxt = np.full((N, A, Z), IMPOSSIBLE, dtype=np.int64)
    dist = np.zeros((N, A))
    for i, b in enumerate(g.beliefs):
        for a in reliable_actions(model, b, values):
            dist[i, model.action_index[a]] = 1.0
        dist[i] /= dist[i].sum()
        for a in model.actions:
            for z, _p, j in g.edges[(i, a)]:
                nxt[i, model.action_index[a], model.signal_index[z]] = j
    return Policy("uniform-reliable", model, nxt, dist, root, [str(b) for b in g.beliefs], start_b)


# ---------------------------------------------------------------------------
# simulation


@dataclass
class SimStats:
    runs: int
    successes: int
    histogram: list  # histogram[t] = runs first hitting the hit set at step t
    never: int
    seed: int
    objective: str
    cutoff: int
    halted: int = 0
    hit_states: list = field(default_factory=list)

    @property
    def rate(self) -> float:
        return self.successes / self.runs

    @property
    def stderr(self) -> float:
        p = self.rate
        return math.sqrt(p * (1 - p) / self.runs)

    def hit_within(self, steps: int) -> int:
        return sum(self.histogram[: steps + 1])

    def to_dict(self) -> dict:
        return {
            "runs": self.runs, "successes": self.successes, "rate": self.rate, "stderr": self.stderr,
            "objective": self.objective, "cutoff": self.cutoff, "seed": self.seed, "halted": self.halted,
            "hit_states": self.hit_states, "hitting_histogram": self.histogram, "never_hit": self.never,
        }

    def histogram_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "runs"])
        for t, c in enumerate(self.histogram):
            w.writerow([t, c])
        w.writerow(["never", self.never])
        return buf.getvalue()


OBJECTIVES = ("reach", "parity")


def _draws(seed: int, step: int, runs: int) -> np.ndarray:
    """Uniforms keyed by (seed, step); row r belongs to run r."""
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, step])))
    return gen.random((runs, 2))


def _pick(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.minimum((cum < u[:, None]).sum(axis=1), cum.shape[1] - 1)


def simulate(model: Pomdp, policy: Policy, objective: str = "reach", cutoff: int = 100, runs: int = 1000,
             seed: int = 0, targets: Iterable[str] | None = None, hit_states: Iterable[str] | None = None,
             initial=None, workers: int | None = None) -> SimStats:
    """Seeded Monte Carlo runs of ``policy``.

    ``reach`` succeeds when the belief becomes a Dirac on a target before the
    cutoff. ``parity`` is a finite proxy: the minimum priority over the
    trailing half of the run is even. The histogram records the first step
    at which the belief is a Dirac on ``hit_states`` (default: the terminal
    states of the targets).
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    if runs < 1:
        raise ValueError("runs must be at least 1")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    if model.n_states > 62:
        raise ValueError("simulation tracks supports as 62-bit masks")
    X = frozenset(model.require_targets() if targets is None else targets)
    hit = frozenset(terminal_states(model, X) if hit_states is None else hit_states)
    if objective == "parity":
        model.require_priorities()
    if initial is None:
        initial = policy.start_belief if policy.start_belief is not None else Belief.initial(model)
    elif not isinstance(initial, Belief):
        initial = Belief.of(model, initial)

    S, A, Z = model.n_states, model.n_actions, model.n_signals
    K = model.kernel_float  # (A, Z, S, S')
    joint = K.transpose(2, 0, 3, 1).reshape(S, A, S * Z)  # (s, a, t*Z + z)
    cum_joint = np.cumsum(joint, axis=2)
    post_mask = np.zeros((S, A, Z), dtype=np.int64)
    for s in range(S):
        for a in range(A):
            for z in range(Z):
                for t in np.flatnonzero(K[a, z, s] > 0):
                    post_mask[s, a, z] |= 1 << int(t)
    x_mask = sum(1 << model.state_index[s] for s in X)
    h_mask = sum(1 << model.state_index[s] for s in hit)
    init = np.array([float(p) for p in initial.probs])
    cum_init = np.cumsum(init)
    init_supp = sum(1 << i for i in initial.support)
    prio = np.array([model.priorities[s] for s in model.states]) if model.priorities is not None else None

    def block(lo: int, hi: int):
        n = hi - lo
        state = _pick(cum_init[None, :].repeat(n, 0), _draws(seed, 0, runs)[lo:hi, 0])
        supp = np.full(n, init_supp, dtype=np.int64)
        node = np.full(n, policy.start, dtype=np.int64)
        traj = np.zeros((n, cutoff + 1), dtype=np.int64)
        traj[:, 0] = state
        length = np.full(n, cutoff, dtype=np.int64)
        single = (supp & (supp - 1)) == 0
        success = single & ((supp & x_mask) != 0)
        first_hit = np.where(single & ((supp & h_mask) != 0), 0, -1)
        for t in range(cutoff):
            u = _draws(seed, t + 1, runs)[lo:hi]
            live = np.flatnonzero(node != HALT)
            if not len(live):
                break
            probs = policy.action_probs(node[live], t)
            a = _pick(np.cumsum(probs, axis=1), u[live, 0])
            flat = _pick(cum_joint[state[live], a], u[live, 1])
            nxt, z = flat // Z, flat % Z
            new_supp = np.zeros(len(live), dtype=np.int64)
            cur = supp[live]
            for s in range(S):
                on = (cur >> s) & 1 == 1
                new_supp[on] |= post_mask[s, a[on], z[on]]
            nn = policy.advance(node[live], a, z)
            if (nn == IMPOSSIBLE).any():
                raise RuntimeError("policy has no successor for an observed signal")
            state[live] = nxt
            supp[live] = new_supp
            node[live] = nn
            traj[live, t + 1] = nxt
            halted_now = live[nn == HALT]
            length[halted_now] = t + 1
            single = (new_supp & (new_supp - 1)) == 0
            success[live] |= single & ((new_supp & x_mask) != 0)
            newly = live[single & ((new_supp & h_mask) != 0)]
            newly = newly[first_hit[newly] < 0]
            first_hit[newly] = t + 1
        if objective == "parity":
            steps = np.arange(cutoff + 1)[None, :]
            window = (steps >= (length // 2)[:, None]) & (steps <= length[:, None])
            lowest = np.where(window, prio[traj], np.iinfo(np.int64).max).min(axis=1)
            success = lowest % 2 == 0
        return int(success.sum()), np.bincount(first_hit[first_hit >= 0], minlength=cutoff + 1), \
            int((first_hit < 0).sum()), int((node == HALT).sum())

    workers = workers or 1
    bounds = np.linspace(0, runs, min(workers, runs) + 1).astype(int)
    spans = list(zip(bounds[:-1], bounds[1:]))
    if len(spans) > 1:
        with ThreadPoolExecutor(len(spans)) as pool:
            parts = list(pool.map(lambda lh: block(*lh), spans))
    else:
        parts = [block(0, runs)]
    hist = np.zeros(cutoff + 1, dtype=np.int64)
    succ = never = halted = 0
    for s_, h_, nv, hl in parts:
        succ += s_
        hist += h_
        never += nv
        halted += hl
    return SimStats(runs, succ, [int(x) for x in hist], never, seed, objective, cutoff, halted,
                    [s for s in model.states if s in hit])
