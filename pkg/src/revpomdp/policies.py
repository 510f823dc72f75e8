"""Policies as finite-state controllers over a model's actions and signals.

A controller has nodes; each node has a distribution over actions and a
successor node for every (action, signal) pair. The observable history is
folded into the node, so ``distribution(history)`` realises the usual
history-to-action-distribution map. The successor ``HALT`` ends an episode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import Pomdp
from .qualitative import ParityRegion, Support

HALT = -2
IMPOSSIBLE = -1

KINDS = ("grid-greedy", "support-witness", "uniform-reliable", "uniform-random", "scripted", "two-phase")


@dataclass(eq=False)
class Policy:
    kind: str
    model: Pomdp
    next_node: np.ndarray  # (N, A, Z) int64
    dist: np.ndarray  # (N, A) float
    start: int
    labels: list = field(default_factory=list)
    start_belief: object = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")

    @property
    def n_nodes(self) -> int:
        return len(self.dist)

    def action_probs(self, nodes: np.ndarray, step: int) -> np.ndarray:
        return self.dist[nodes]

    def advance(self, nodes: np.ndarray, actions: np.ndarray, signals: np.ndarray) -> np.ndarray:
        return self.next_node[nodes, actions, signals]

    def node_after(self, history: Sequence[tuple[str, str]]) -> int:
        m = self.model
        node = self.start
        for a, z in history:
            if node == HALT:
                break
            node = int(self.next_node[node, m.action_index[a], m.signal_index[z]])
            if node == IMPOSSIBLE:
                raise ValueError(f"signal {z!r} is impossible after action {a!r} here")
        return node

    def distribution(self, history: Sequence[tuple[str, str]] = ()) -> dict[str, float] | None:
        """Action distribution after an observable history; ``None`` once halted."""
        node = self.node_after(history)
        if node == HALT:
            return None
        row = self.action_probs(np.array([node]), len(history))[0]
        return {a: float(p) for a, p in zip(self.model.actions, row) if p > 0}


@dataclass(eq=False)
class ScriptedPolicy(Policy):
    """Plays a fixed action sequence cyclically, ignoring signals."""

    script: tuple = ()

    def action_probs(self, nodes, step):
        out = np.zeros((len(nodes), self.model.n_actions))
        out[:, self.model.action_index[self.script[step % len(self.script)]]] = 1.0
        return out


def scripted_policy(model: Pomdp, script: Sequence[str]) -> ScriptedPolicy:
    if not script:
        raise ValueError("empty script")
    for a in script:
        if a not in model.action_index:
            raise ValueError(f"unknown action {a!r}")
    A, Z = model.n_actions, model.n_signals
    return ScriptedPolicy("scripted", model, np.zeros((1, A, Z), dtype=np.int64), np.full((1, A), 1.0 / A), 0,
                          ["*"], script=tuple(script))


def uniform_random_policy(model: Pomdp) -> Policy:
    A, Z = model.n_actions, model.n_signals
    return Policy("uniform-random", model, np.zeros((1, A, Z), dtype=np.int64), np.full((1, A), 1.0 / A), 0, ["*"])


def _support_nodes(model: Pomdp, region: ParityRegion, offset: int = 0):
    """Controller rows for the support witness; supports outside the winning
    region halt."""
    smdp = region.support_mdp
    supports = list(smdp.supports)
    ids = {u: offset + i for i, u in enumerate(supports)}
    A, Z = model.n_actions, model.n_signals
    nxt = np.full((len(supports), A, Z), IMPOSSIBLE, dtype=np.int64)
    dist = np.zeros((len(supports), A))
    for i, u in enumerate(supports):
        if u in region.winning:
            for a in region.witness.actions_at(u):
                dist[i, model.action_index[a]] = 1.0
        else:
            dist[i, :] = 1.0
        dist[i] /= dist[i].sum()
        for a in model.actions:
            for z in model.signals:
                v = smdp.steps.get((u, a, z))
                if v is not None:
                    nxt[i, model.action_index[a], model.signal_index[z]] = ids[v] if v in region.winning else HALT
    return supports, ids, nxt, dist


def support_witness_policy(model: Pomdp, region: ParityRegion, start: Support | None = None) -> Policy:
    """Plays the almost-sure parity witness on belief supports."""
    supports, ids, nxt, dist = _support_nodes(model, region)
    if start is None:
        start = frozenset(s for s, p in model.initial.items() if p)
    if start not in ids:
        raise ValueError("start support is not reachable in the support MDP")
    from .qualitative import support_name

    return Policy("support-witness", model, nxt, dist, ids[start], [support_name(model, u) for u in supports])
