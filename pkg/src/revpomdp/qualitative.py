"""Qualitative analysis on the belief-support abstraction.

Almost-sure questions only depend on which outcomes have positive
probability, and the support of a posterior only depends on the support of
the prior. The support MDP below keeps exactly that information.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple

from .mdp import FiniteMdp, MemorylessStrategy, almost_sure_parity, almost_sure_reach, mec_decomposition
from .model import Pomdp, require_revealing

Support = frozenset


def _step_table(model: Pomdp) -> dict:
    """(state, action) -> {signal: successor states}."""
    table = {}
    for (s, a), row in model.kernel.items():
        by_signal: dict[str, set] = {}
        for (t, z) in row:
            by_signal.setdefault(z, set()).add(t)
        table[(s, a)] = by_signal
    return table


def support_step(model: Pomdp, u: Iterable[str], a: str, z: str, _table=None) -> Support:
    """Support of the posterior for any prior with support ``u`` (empty when
    ``z`` is impossible)."""
    table = _table if _table is not None else _step_table(model)
    out = set()
    for s in u:
        out |= table[(s, a)].get(z, set())
    return frozenset(out)


def support_outcomes(model: Pomdp, u: Support, a: str, _table=None) -> dict[str, Support]:
    """Possible signals from support ``u`` under ``a`` with their posterior supports."""
    table = _table if _table is not None else _step_table(model)
    out: dict[str, set] = {}
    for s in u:
        for z, ts in table[(s, a)].items():
            out.setdefault(z, set()).update(ts)
    return {z: frozenset(out[z]) for z in model.signals if z in out}


def _explore_supports(model: Pomdp, roots: Iterable[Support], table) -> tuple[list, dict]:
    order, seen = [], set()
    steps: dict = {}
    frontier = deque()
    for r in roots:
        if r not in seen:
            seen.add(r)
            order.append(r)
            frontier.append(r)
    while frontier:
        u = frontier.popleft()
        for a in model.actions:
            for z, v in support_outcomes(model, u, a, table).items():
                steps[(u, a, z)] = v
                if v not in seen:
                    seen.add(v)
                    order.append(v)
                    frontier.append(v)
    return order, steps


def support_name(model: Pomdp, u: Support) -> str:
    return "{" + ",".join(s for s in model.states if s in u) + "}"


@dataclass(frozen=True, eq=False)
class SupportMdp:
    """Belief-support MDP of a revealing model.

    ``mdp`` moves uniformly over the distinct successor supports; ``steps``
    maps ``(support, action, signal)`` to the successor support.
    """

    model: Pomdp
    mdp: FiniteMdp
    steps: Mapping

    @property
    def supports(self) -> tuple:
        return self.mdp.states

    def successor(self, u: Support, a: str, z: str) -> Support:
        return self.steps[(u, a, z)]

    def priorities(self, priorities: Mapping[str, int]) -> dict:
        """Singletons keep their state's priority; larger supports get the
        smallest odd number above every state priority."""
        d = max(priorities.values(), default=0)
        pad = d + 1 if (d + 1) % 2 == 1 else d + 2
        return {u: (priorities[next(iter(u))] if len(u) == 1 else pad) for u in self.supports}


def build_support_mdp(model: Pomdp) -> SupportMdp:
    require_revealing(model)
    table = _step_table(model)
    roots = [frozenset(s for s, p in model.initial.items() if p)]
    roots += [frozenset([s]) for s in model.states]
    order, steps = _explore_supports(model, roots, table)
    transitions = {}
    for u in order:
        for a in model.actions:
            succ = []
            for z in model.signals:
                v = steps.get((u, a, z))
                if v is not None and v not in succ:
                    succ.append(v)
            transitions[(u, a)] = {v: Fraction(1, len(succ)) for v in succ}
    mdp = FiniteMdp(states=tuple(order), actions=model.actions, transitions=transitions)
    return SupportMdp(model, mdp, steps)


@dataclass(frozen=True, eq=False)
class ParityRegion:
    """Almost-sure parity analysis result.

    ``states`` is the set X of states whose Dirac belief wins almost surely;
    ``winning`` the winning supports; ``witness`` a support-based strategy.
    """

    states: frozenset
    winning: frozenset
    witness: MemorylessStrategy
    support_mdp: SupportMdp
    priorities: Mapping


_REGION_CACHE: dict[tuple, ParityRegion] = {}


def _priorities_of(model: Pomdp, priorities) -> dict:
    if priorities is None:
        return dict(model.require_priorities())
    if not isinstance(priorities, Mapping):
        priorities = dict(priorities)
    missing = set(model.states) - set(priorities)
    if missing:
        raise ValueError(f"priorities missing for {sorted(missing)}")
    return dict(priorities)


def parity_region(model: Pomdp, priorities: Mapping[str, int] | None = None) -> ParityRegion:
    pr = _priorities_of(model, priorities)
    key = (model.content_hash(), tuple(sorted(pr.items())))
    hit = _REGION_CACHE.get(key)
    if hit is not None:
        return hit
    smdp = build_support_mdp(model)
    ext = smdp.priorities(pr)
    win, witness = almost_sure_parity(smdp.mdp, ext)
    X = frozenset(s for s in model.states if frozenset([s]) in win)
    region = ParityRegion(X, frozenset(win), witness, smdp, pr)
    _REGION_CACHE[key] = region
    return region


def belief_reach_region(model: Pomdp, targets: Iterable[str] | None = None) -> ParityRegion:
    """Supports from which a Dirac belief on a target is reached almost surely.

    ``states`` holds the states whose Dirac belief wins; ``priorities`` is
    left empty since no parity condition is involved.
    """
    X = frozenset(model.require_targets() if targets is None else targets)
    smdp = build_support_mdp(model)
    goal = [u for u in smdp.supports if len(u) == 1 and u <= X]
    win, witness = almost_sure_reach(smdp.mdp, goal)
    states = frozenset(s for s in model.states if frozenset([s]) in win)
    return ParityRegion(states, frozenset(win), witness, smdp, {})


def almost_sure_parity_states(model: Pomdp, priorities: Mapping[str, int] | None = None) -> frozenset:
    return parity_region(model, priorities).states


def initial_support(model: Pomdp) -> Support:
    return frozenset(s for s, p in model.initial.items() if p)


def almost_sure_winning(model: Pomdp, priorities: Mapping[str, int] | None = None) -> bool:
    region = parity_region(model, priorities)
    return initial_support(model) in region.winning


class LimitSureVerdict(NamedTuple):
    winning: bool
    via_almost_sure: bool = True

    def __bool__(self):
        return self.winning


def limit_sure_winning(model: Pomdp, priorities: Mapping[str, int] | None = None) -> LimitSureVerdict:
    """Limit-sure parity winning. On revealing models it coincides with
    almost-sure winning, which is what gets computed."""
    return LimitSureVerdict(almost_sure_winning(model, priorities), True)


def terminal_states(model: Pomdp, targets: Iterable[str] | None = None) -> frozenset:
    """Targets plus the states from which no reachable support meets a target."""
    X = frozenset(model.require_targets() if targets is None else targets)
    table = _step_table(model)
    out = set(X)
    for s in model.states:
        if s in X:
            continue
        order, _ = _explore_supports(model, [frozenset([s])], table)
        if not any(u & X for u in order):
            out.add(s)
    return frozenset(out)


def support_end_components(smdp: SupportMdp) -> list:
    return mec_decomposition(smdp.mdp)


def to_dot(smdp: SupportMdp, winning: Iterable = ()) -> str:
    """Graphviz rendering; winning supports are filled."""
    model = smdp.model
    winning = set(winning)
    ids = {u: f"u{i}" for i, u in enumerate(smdp.supports)}
    lines = ["digraph support_mdp {", "  rankdir=LR;", "  node [shape=box];"]
    for u in smdp.supports:
        style = ', style=filled, fillcolor="#b7e1a1"' if u in winning else ""
        lines.append(f'  {ids[u]} [label="{support_name(model, u)}"{style}];')
    for u in smdp.supports:
        for a in model.actions:
            for v in smdp.mdp.transitions[(u, a)]:
                sigs = [z for z in model.signals if smdp.steps.get((u, a, z)) == v]
                lines.append(f'  {ids[u]} -> {ids[v]} [label="{a}/{",".join(sigs)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
