"""Finite, fully observable MDPs: end components and qualitative/quantitative
reachability and parity solvers."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping

import networkx as nx
import numpy as np

State = Hashable


@dataclass(frozen=True, eq=False)
class FiniteMdp:
    """``transitions[(q, a)]`` is a distribution ``{q': prob}``; a missing key
    means ``a`` is not enabled at ``q``."""

    states: tuple
    actions: tuple
    transitions: Mapping[tuple, Mapping]
    initial: Mapping = field(default_factory=dict)

    def __post_init__(self):
        for q in self.states:
            if not self.enabled(q):
                raise ValueError(f"state {q!r} has no enabled action")
        for (q, a), row in self.transitions.items():
            if sum(row.values()) != 1 and abs(float(sum(row.values())) - 1) > 1e-12:
                raise ValueError(f"row ({q!r},{a!r}) does not sum to 1")

    def enabled(self, q) -> tuple:
        cache = self.__dict__.get("_enabled")
        if cache is None:
            cache = {s: tuple(a for a in self.actions if (s, a) in self.transitions) for s in self.states}
            object.__setattr__(self, "_enabled", cache)
        return cache[q]

    def post(self, q, a) -> set:
        return {t for t, p in self.transitions[(q, a)].items() if p > 0}

    def succ_states(self, q) -> set:
        return set().union(*(self.post(q, a) for a in self.enabled(q)))


@dataclass(frozen=True)
class EndComponent:
    states: frozenset
    actions: Mapping  # state -> frozenset of actions

    @classmethod
    def of(cls, actions: Mapping[State, Iterable]) -> "EndComponent":
        return cls(frozenset(actions), {q: frozenset(a) for q, a in actions.items()})

    def __eq__(self, other):
        return isinstance(other, EndComponent) and self.states == other.states and dict(self.actions) == dict(other.actions)

    def __hash__(self):
        return hash((self.states, frozenset((q, a) for q, acts in self.actions.items() for a in acts)))

    def contains(self, other: "EndComponent") -> bool:
        return other.states <= self.states and all(other.actions[q] <= self.actions[q] for q in other.states)


@dataclass(frozen=True)
class MemorylessStrategy:
    """Each state maps to the actions played uniformly at random there."""

    choices: Mapping

    def actions_at(self, q) -> tuple:
        return self.choices[q]

    def __contains__(self, q):
        return q in self.choices


def is_end_component(mdp: FiniteMdp, candidate: EndComponent) -> bool:
    Q = candidate.states
    if not Q or set(candidate.actions) != set(Q):
        return False
    graph = nx.DiGraph()
    graph.add_nodes_from(Q)
    for q in Q:
        acts = candidate.actions[q]
        if not acts:
            return False
        for a in acts:
            if (q, a) not in mdp.transitions:
                return False
            post = mdp.post(q, a)
            if not post <= Q:
                return False
            graph.add_edges_from((q, t) for t in post)
    return nx.is_strongly_connected(graph)


def mec_decomposition(mdp: FiniteMdp, states: Iterable | None = None) -> list[EndComponent]:
    """Maximal end components, optionally of the sub-MDP induced by ``states``
    (actions leaving the subset are dropped).

    Iterated SCC refinement: drop actions that can leave their SCC, drop
    states left without actions, recompute SCCs until nothing changes.
    """
    alive = set(mdp.states if states is None else states)
    acts = {q: {a for a in mdp.enabled(q) if mdp.post(q, a) <= alive} for q in alive}
    alive = {q for q in alive if acts[q]}
    while True:
        graph = nx.DiGraph()
        graph.add_nodes_from(alive)
        for q in alive:
            for a in acts[q]:
                graph.add_edges_from((q, t) for t in mdp.post(q, a) if t in alive)
        comp = {}
        sccs = list(nx.strongly_connected_components(graph))
        for i, c in enumerate(sccs):
            for q in c:
                comp[q] = i
        changed = False
        for q in list(alive):
            keep = {a for a in acts[q] if all(t in alive and comp[t] == comp[q] for t in mdp.post(q, a))}
            if keep != acts[q]:
                acts[q] = keep
                changed = True
        dead = {q for q in alive if not acts[q]}
        if dead:
            alive -= dead
            changed = True
        if not changed:
            break
    order = {q: i for i, q in enumerate(mdp.states)}
    mecs = [EndComponent.of({q: acts[q] for q in c}) for c in sccs if c <= alive]
    mecs.sort(key=lambda ec: min(order[q] for q in ec.states))
    return mecs


def _attractor_layers(mdp, target: set, within: set, allowed: Mapping) -> dict:
    """Backward BFS distance to ``target`` inside ``within`` using ``allowed`` actions."""
    pred: dict = {}
    for q in within:
        for a in allowed[q]:
            for t in mdp.post(q, a):
                pred.setdefault(t, set()).add(q)
    dist = {q: 0 for q in target if q in within}
    frontier = deque(dist)
    while frontier:
        t = frontier.popleft()
        for q in pred.get(t, ()):
            if q not in dist:
                dist[q] = dist[t] + 1
                frontier.append(q)
    return dist


def almost_sure_reach(mdp: FiniteMdp, target: Iterable) -> tuple[set, MemorylessStrategy]:
    """Largest set from which ``target`` is reached with probability 1, with a
    memoryless witness."""
    target = set(target)
    W = set(mdp.states)
    while True:
        allowed = {q: [a for a in mdp.enabled(q) if mdp.post(q, a) <= W] for q in W}
        dist = _attractor_layers(mdp, target, W, allowed)
        R = set(dist)
        if R == W:
            break
        W = R
    choices = {}
    for q in W:
        if q in target:
            safe = allowed[q] or list(mdp.enabled(q))
            choices[q] = (safe[0],)
            continue
        for a in allowed[q]:
            if any(dist.get(t, 1 << 60) < dist[q] for t in mdp.post(q, a)):
                choices[q] = (a,)
                break
    return W, MemorylessStrategy(choices)


def almost_sure_parity(mdp: FiniteMdp, priorities: Mapping) -> tuple[set, MemorylessStrategy]:
    """States winning the parity condition with probability 1.

    For each even priority c, end components of the sub-MDP of states with
    priority >= c that contain a priority-c state are winning; the rest of the
    winning region almost-surely reaches their union. The witness plays
    uniformly over the end-component actions inside good components and the
    reachability witness elsewhere.
    """
    good: dict = {}
    for c in sorted({p for p in priorities.values() if p % 2 == 0}):
        sub = [q for q in mdp.states if priorities[q] >= c]
        for ec in mec_decomposition(mdp, sub):
            if any(priorities[q] == c for q in ec.states):
                for q in ec.states:
                    good.setdefault(q, tuple(a for a in mdp.actions if a in ec.actions[q]))
    W, reach = almost_sure_reach(mdp, good)
    choices = {q: (good[q] if q in good else reach.choices[q]) for q in W}
    return W, MemorylessStrategy(choices)


# ---------------------------------------------------------------------------
# quantitative reachability


def _solve_exact(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Gauss-Jordan elimination over the rationals (A is square, nonsingular)."""
    n = len(b)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        M[col] = [x / pv for x in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[i][n] for i in range(n)]


def _can_reach(mdp, target: set, within=None, choice=None) -> set:
    """States with a positive-probability path to target (optionally under a fixed choice)."""
    pred: dict = {}
    for q in mdp.states:
        acts = (choice[q],) if choice is not None and q in choice else mdp.enabled(q)
        for a in acts:
            for t in mdp.post(q, a):
                pred.setdefault(t, set()).add(q)
    seen = set(target)
    frontier = deque(seen)
    while frontier:
        t = frontier.popleft()
        for q in pred.get(t, ()):
            if q not in seen:
                seen.add(q)
                frontier.append(q)
    return seen


def quantitative_reach(mdp: FiniteMdp, target: Iterable, exact: bool | None = None, tol: float = 1e-10) -> dict:
    """Maximal probability of eventually reaching ``target``, per state.

    Exact mode (default up to 200 states) runs policy iteration with rational
    linear solves; states that cannot reach the target under the evaluated
    policy get value 0, which keeps every system nonsingular. Float mode runs
    value iteration until successive sweeps differ by less than ``tol``.
    """
    target = set(target)
    if exact is None:
        exact = len(mdp.states) <= 200
    yes, _ = almost_sure_reach(mdp, target)
    maybe_reach = _can_reach(mdp, target)
    values = {q: (Fraction(1) if q in yes else Fraction(0)) for q in mdp.states}
    rest = [q for q in mdp.states if q in maybe_reach and q not in yes]
    if not rest:
        return values if exact else {q: float(v) for q, v in values.items()}
    if not exact:
        return _value_iteration(mdp, target, yes, rest, tol)

    def q_value(q, a, vals):
        return sum((p * vals[t] for t, p in mdp.transitions[(q, a)].items()), Fraction(0))

    # start from an action with a positive chance of progress
    choice = {}
    for q in rest:
        choice[q] = next((a for a in mdp.enabled(q) if mdp.post(q, a) & (maybe_reach | yes)), mdp.enabled(q)[0])
    while True:
        live = _can_reach(mdp, yes, choice=choice)
        vals = dict(values)
        solve = [q for q in rest if q in live]
        if solve:
            sidx = {q: i for i, q in enumerate(solve)}
            A = [[Fraction(0)] * len(solve) for _ in solve]
            b = [Fraction(0)] * len(solve)
            for q in solve:
                i = sidx[q]
                A[i][i] += 1
                for t, p in mdp.transitions[(q, choice[q])].items():
                    if t in sidx:
                        A[i][sidx[t]] -= p
                    elif t in yes:
                        b[i] += p
            for q, x in zip(solve, _solve_exact(A, b)):
                vals[q] = x
        for q in rest:
            if q not in live:
                vals[q] = Fraction(0)
        changed = False
        for q in rest:
            current = q_value(q, choice[q], vals)
            best_a, best = choice[q], current
            for a in mdp.enabled(q):
                v = q_value(q, a, vals)
                if v > best:
                    best_a, best = a, v
            if best_a != choice[q]:
                choice[q] = best_a
                changed = True
        if not changed:
            return vals


def _value_iteration(mdp, target, yes, rest, tol) -> dict:
    index = {q: i for i, q in enumerate(mdp.states)}
    v = np.array([1.0 if q in yes else 0.0 for q in mdp.states])
    rows = []
    for q in rest:
        acts = []
        for a in mdp.enabled(q):
            row = mdp.transitions[(q, a)]
            acts.append((np.array([index[t] for t in row]), np.array([float(p) for p in row.values()])))
        rows.append((index[q], acts))
    while True:
        delta = 0.0
        for i, acts in rows:
            new = max(float(np.dot(p, v[t])) for t, p in acts)
            delta = max(delta, abs(new - v[i]))
            v[i] = new
        if delta < tol:
            break
    return {q: float(v[index[q]]) for q in mdp.states}


def parity_values(mdp: FiniteMdp, priorities: Mapping, exact: bool | None = None) -> dict:
    """Optimal parity probability: maximal reachability of the almost-sure
    parity winning region."""
    win, _ = almost_sure_parity(mdp, priorities)
    return quantitative_reach(mdp, win, exact=exact)
