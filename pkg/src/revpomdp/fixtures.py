"""Reference models used by the tests, scripts and the CLI docs, plus random
model generators."""

from __future__ import annotations

import random
from fractions import Fraction

from .mdp import FiniteMdp
from .model import Pomdp, validate

R2_DOCUMENT = """\
{ "revealing": true,
  "states": ["s1","s2"],
  "actions": ["a"],
  "signals": ["s1","s2","noise"],
  "transitions": [
    {"from":"s1","action":"a","to":"s1","signal":"s1","prob":"1/4"},
    {"from":"s1","action":"a","to":"s1","signal":"noise","prob":"1/4"},
    {"from":"s1","action":"a","to":"s2","signal":"s2","prob":"1/4"},
    {"from":"s1","action":"a","to":"s2","signal":"noise","prob":"1/4"},
    {"from":"s2","action":"a","to":"s2","signal":"s2","prob":"1/2"},
    {"from":"s2","action":"a","to":"s2","signal":"noise","prob":"1/2"} ],
  "initial": {"s1":"1/2","s2":"1/2"},
  "priorities": {"s1":1,"s2":0},
  "targets": ["s2"] }
"""


def noisy_pair() -> Pomdp:
    from .modelio import parse_model

    return parse_model(R2_DOCUMENT)


def _tr(s, a, t, z, p):
    return {"from": s, "action": a, "to": t, "signal": z, "prob": p}


WAIT_COMMIT_EDGES = {
    # (state, action) -> {successor: probability}
    ("s0", "w"): {"s0": Fraction(1, 2), "s1": Fraction(1, 2)},
    ("s0", "c"): {"bot": Fraction(1)},
    ("s1", "w"): {"s1": Fraction(1)},
    ("s1", "c"): {"top": Fraction(1)},
    ("bot", "w"): {"bot": Fraction(1)},
    ("bot", "c"): {"bot": Fraction(1)},
    ("top", "w"): {"s0": Fraction(1)},
    ("top", "c"): {"s0": Fraction(1)},
}
WAIT_COMMIT_STATES = ("s0", "s1", "bot", "top")
WAIT_COMMIT_PRIORITIES = {"s0": 1, "s1": 1, "bot": 1, "top": 0}


def wait_commit_mdp() -> FiniteMdp:
    """The wait/commit example as a fully observable MDP."""
    return FiniteMdp(states=WAIT_COMMIT_STATES, actions=("w", "c"), transitions=dict(WAIT_COMMIT_EDGES),
                     initial={"s0": Fraction(1)})


def wait_commit_blind() -> Pomdp:
    """The wait/commit example with a single uninformative signal (not revealing)."""
    transitions = [_tr(s, a, t, "o", p) for (s, a), row in WAIT_COMMIT_EDGES.items() for t, p in row.items()]
    return validate({
        "states": list(WAIT_COMMIT_STATES), "actions": ["w", "c"], "signals": ["o"],
        "transitions": transitions, "initial": {"s0": 1}, "priorities": WAIT_COMMIT_PRIORITIES,
    })


def wait_commit_revealing() -> Pomdp:
    """The wait/commit example where every transition announces its successor."""
    transitions = [_tr(s, a, t, t, p) for (s, a), row in WAIT_COMMIT_EDGES.items() for t, p in row.items()]
    return validate({
        "revealing": True,
        "states": list(WAIT_COMMIT_STATES), "actions": ["w", "c"], "signals": list(WAIT_COMMIT_STATES),
        "transitions": transitions, "initial": {"s0": 1}, "priorities": WAIT_COMMIT_PRIORITIES,
        "targets": ["top"],
    })


def revealing_chain() -> Pomdp:
    """s1 stays (announced) or moves to the absorbing target s2, each with 1/2."""
    return validate({
        "revealing": True,
        "states": ["s1", "s2"], "actions": ["a"], "signals": ["s1", "s2"],
        "transitions": [
            _tr("s1", "a", "s1", "s1", "1/2"), _tr("s1", "a", "s2", "s2", "1/2"),
            _tr("s2", "a", "s2", "s2", "1"),
        ],
        "initial": {"s1": 1}, "priorities": {"s1": 1, "s2": 0}, "targets": ["s2"],
    })


def guess_model() -> Pomdp:
    """Two actions, partial information: the controller must pick ``left`` or
    ``right`` to match a hidden coin; ``peek`` reveals the coin with probability
    1/4 and loses with probability 1/8. The target is ``win``; ``lose`` is
    absorbing. From the uniform prior the optimal value is 2/3 (peek until the
    coin shows)."""
    states = ["h", "t", "win", "lose"]
    sig = states + ["quiet"]
    trs = []
    for coin in ("h", "t"):
        trs += [_tr(coin, "peek", coin, coin, "1/4"), _tr(coin, "peek", coin, "quiet", "5/8"),
                _tr(coin, "peek", "lose", "lose", "1/8")]
        good, bad = ("left", "right") if coin == "h" else ("right", "left")
        trs += [_tr(coin, good, "win", "win", "1")]
        trs += [_tr(coin, bad, "lose", "lose", "1")]
    for s in ("win", "lose"):
        for a in ("peek", "left", "right"):
            trs.append(_tr(s, a, s, s, "1"))
    return validate({
        "revealing": True, "states": states, "actions": ["peek", "left", "right"], "signals": sig,
        "transitions": trs, "initial": {"h": "1/2", "t": "1/2"},
        "priorities": {"h": 1, "t": 1, "win": 0, "lose": 1}, "targets": ["win"],
    })


def all_priorities(model: Pomdp, value: int) -> Pomdp:
    return model.with_(priorities={s: value for s in model.states})


# ---------------------------------------------------------------------------
# random models


def _split(rng: random.Random, total: Fraction, parts: int, max_weight: int = 3) -> list[Fraction]:
    weights = [rng.randint(1, max_weight) for _ in range(parts)]
    s = sum(weights)
    return [total * w / s for w in weights]


def random_revealing(
    rng: random.Random,
    n_states: int,
    n_actions: int,
    n_noise: int = 1,
    max_successors: int = 2,
    noise_prob: float = 0.5,
    single_source_noise: bool = False,
    absorbing_last: bool = False,
    max_priority: int = 2,
) -> Pomdp:
    """A random revealing POMDP with small rational probabilities.

    Each successor of a row is announced with positive probability and, with
    probability ``noise_prob``, also emits one of the ``n_noise`` extra signals.
    With ``single_source_noise`` every (action, noise signal) pair is emitted by
    at most one state, which keeps the set of reachable exact beliefs finite.
    """
    states = [f"s{i}" for i in range(n_states)]
    actions = [f"a{j}" for j in range(n_actions)]
    noise = [f"z{j}" for j in range(n_noise)]
    owner = {}
    if single_source_noise:
        for a in actions:
            for z in noise:
                owner[(a, z)] = rng.choice(states)
    trs = []
    for i, s in enumerate(states):
        for a in actions:
            if absorbing_last and i == n_states - 1:
                trs.append(_tr(s, a, s, s, Fraction(1)))
                continue
            k = rng.randint(1, min(max_successors, n_states))
            succ = rng.sample(states, k)
            masses = _split(rng, Fraction(1), k)
            for t, m in zip(succ, masses):
                allowed = [z for z in noise if not single_source_noise or owner[(a, z)] == s]
                if allowed and rng.random() < noise_prob:
                    z = rng.choice(allowed)
                    reveal, quiet = _split(rng, m, 2)
                    trs.append(_tr(s, a, t, t, reveal))
                    trs.append(_tr(s, a, t, z, quiet))
                else:
                    trs.append(_tr(s, a, t, t, m))
    init_support = rng.sample(states, rng.randint(1, min(2, n_states)))
    init = dict(zip(init_support, _split(rng, Fraction(1), len(init_support))))
    return validate({
        "revealing": True, "states": states, "actions": actions, "signals": states + noise,
        "transitions": trs, "initial": init,
        "priorities": {s: rng.randint(0, max_priority) for s in states},
        "targets": rng.sample(states, rng.randint(1, max(1, n_states // 2))),
    })


def random_fully_revealing(rng: random.Random, n_states: int, n_actions: int, max_successors: int = 2,
                           max_priority: int = 2) -> Pomdp:
    return random_revealing(rng, n_states, n_actions, n_noise=0, max_successors=max_successors,
                            noise_prob=0.0, max_priority=max_priority)


def random_mdp(rng: random.Random, n_states: int, n_actions: int, p_enabled: float = 0.8,
               max_successors: int = 3) -> FiniteMdp:
    states = tuple(f"q{i}" for i in range(n_states))
    actions = tuple(f"a{j}" for j in range(n_actions))
    transitions = {}
    for q in states:
        acts = [a for a in actions if rng.random() < p_enabled] or [rng.choice(actions)]
        for a in acts:
            k = rng.randint(1, min(max_successors, n_states))
            succ = rng.sample(states, k)
            transitions[(q, a)] = dict(zip(succ, _split(rng, Fraction(1), k)))
    return FiniteMdp(states=states, actions=actions, transitions=transitions)


def as_mdp(model: Pomdp) -> FiniteMdp:
    """State-level MDP of a model (signals dropped)."""
    transitions = {}
    for (s, a), row in model.kernel.items():
        dist: dict = {}
        for (t, _z), p in row.items():
            dist[t] = dist.get(t, Fraction(0)) + p
        transitions[(s, a)] = dist
    return FiniteMdp(states=model.states, actions=model.actions, transitions=transitions,
                     initial=dict(model.initial))
