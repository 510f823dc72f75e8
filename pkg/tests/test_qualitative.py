import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from conftest import small_models
from revpomdp import fixtures
from revpomdp.belief import Belief, ZeroProbabilitySignal, update
from revpomdp.mdp import almost_sure_parity
from revpomdp.model import NotRevealingError
from revpomdp.oracle import exact_value
from revpomdp.qualitative import (
    almost_sure_parity_states, almost_sure_winning, belief_reach_region, build_support_mdp, initial_support,
    limit_sure_winning, parity_region, support_end_components, terminal_states, to_dot,
)

S1, S2, S12 = frozenset({"s1"}), frozenset({"s2"}), frozenset({"s1", "s2"})


def test_r2_support_mdp(noisy_pair):
    smdp = build_support_mdp(noisy_pair)
    assert set(smdp.supports) == {S1, S2, S12}
    assert smdp.successor(S1, "a", "s1") == S1
    assert smdp.successor(S1, "a", "s2") == S2
    assert smdp.successor(S1, "a", "noise") == S12
    assert set(smdp.mdp.transitions[(S1, "a")]) == {S1, S2, S12}


def test_fully_revealing_support_mdp_has_only_singletons():
    for m in [fixtures.wait_commit_revealing()] + [fixtures.random_fully_revealing(random.Random(i), 4, 2)
                                                for i in range(10)]:
        smdp = build_support_mdp(m)
        assert all(len(u) == 1 for u in smdp.supports if u != frozenset(s for s, p in m.initial.items() if p))


def test_support_count_bound():
    for m in small_models(5, 30):
        assert len(build_support_mdp(m).supports) <= 2 ** len(m.states) - 1


def test_non_revealing_rejected():
    with pytest.raises(NotRevealingError):
        build_support_mdp(fixtures.wait_commit_blind())
    with pytest.raises(NotRevealingError):
        almost_sure_parity_states(fixtures.wait_commit_blind())


def test_x_examples(noisy_pair):
    assert almost_sure_parity_states(noisy_pair) == {"s1", "s2"}
    assert almost_sure_winning(noisy_pair)
    even = fixtures.all_priorities(noisy_pair, 2)
    assert almost_sure_parity_states(even) == {"s1", "s2"}
    odd = fixtures.all_priorities(noisy_pair, 1)
    assert almost_sure_parity_states(odd) == frozenset()
    assert not almost_sure_winning(odd)


def test_dirac_in_x_wins():
    for m in small_models(6, 20):
        for s in almost_sure_parity_states(m):
            assert almost_sure_winning(m.with_(initial={s: F(1)}))


def test_wait_commit_x():
    assert almost_sure_parity_states(fixtures.wait_commit_revealing()) == {"s0", "s1", "top"}


def test_fully_revealing_matches_mdp():
    for i in range(20):
        m = fixtures.random_fully_revealing(random.Random(100 + i), 4, 2, max_priority=3)
        win, _ = almost_sure_parity(fixtures.as_mdp(m), dict(m.priorities))
        assert almost_sure_parity_states(m) == frozenset(win)


def test_limit_sure_coincides():
    models = small_models(7, 40) + [fixtures.noisy_pair(), fixtures.wait_commit_revealing(), fixtures.guess_model()]
    for m in models:
        verdict = limit_sure_winning(m)
        assert bool(verdict) == almost_sure_winning(m)
        assert verdict.via_almost_sure
    noisy_pair = fixtures.noisy_pair()
    assert limit_sure_winning(fixtures.all_priorities(noisy_pair, 0))
    assert not limit_sure_winning(fixtures.all_priorities(noisy_pair, 1))


def test_terminal_examples(noisy_pair):
    assert terminal_states(noisy_pair, {"s2"}) == {"s2"}
    assert terminal_states(noisy_pair, {"s1"}) == {"s1", "s2"}
    fig = fixtures.wait_commit_revealing()
    assert terminal_states(fig, {"top"}) == {"top", "bot"}


def test_terminal_invariants():
    for m in small_models(8, 30):
        X = m.require_targets()
        T = terminal_states(m)
        assert X <= T
        smdp = build_support_mdp(m)
        for s in T - X:
            reach = {frozenset([s])}
            frontier = [frozenset([s])]
            while frontier:
                u = frontier.pop()
                for a in m.actions:
                    for v in smdp.mdp.transitions[(u, a)]:
                        if v not in reach:
                            reach.add(v)
                            frontier.append(v)
            assert not any(u & X for u in reach)


def test_terminal_monotone():
    for m in small_models(9, 30):
        X = set(m.require_targets())
        extra = set(random.Random(len(X)).sample(list(m.states), 1))
        small, big = terminal_states(m, X), terminal_states(m, X | extra)
        assert small & X <= big
        # a state that could reach X can still reach X | extra
        assert (big - (X | extra)) <= (small - X)


def test_support_abstraction_sound():
    rng = random.Random(10)
    for m in small_models(10, 25):
        smdp = build_support_mdp(m)
        u0 = frozenset(s for s, p in m.initial.items() if p)
        for _ in range(5):
            # a random belief on a reachable support, with random weights
            u = rng.choice(smdp.supports)
            w = {s: F(rng.randint(1, 5)) for s in u}
            tot = sum(w.values())
            b = Belief.of(m, {s: x / tot for s, x in w.items()})
            for a in m.actions:
                for z in m.signals:
                    try:
                        post = update(m, b, a, z)
                    except ZeroProbabilitySignal:
                        assert (u, a, z) not in smdp.steps
                        continue
                    assert frozenset(m.states[i] for i in post.support) == smdp.successor(u, a, z)
        assert u0 in smdp.supports


def test_every_mec_contains_a_singleton():
    models = small_models(11, 40) + [fixtures.noisy_pair(), fixtures.guess_model(), fixtures.wait_commit_revealing()]
    for m in models:
        smdp = build_support_mdp(m)
        for ec in support_end_components(smdp):
            assert any(len(u) == 1 for u in ec.states)


def test_transitions_include_revealed_singletons():
    for m in small_models(12, 30):
        smdp = build_support_mdp(m)
        for u in smdp.supports:
            for a in m.actions:
                succ = smdp.mdp.transitions[(u, a)]
                for s in u:
                    for t in m.successors(s, a):
                        assert frozenset([t]) in succ


@given(st.integers(0, 10_000))
def test_padding_priority_odd_and_above(seed):
    m = small_models(seed, 1, max_priority=4)[0]
    region = parity_region(m)
    d = max(m.priorities.values())
    for u, p in region.support_mdp.priorities(m.priorities).items():
        if len(u) > 1:
            assert p % 2 == 1 and p > d


def test_dot_export(noisy_pair):
    region = parity_region(noisy_pair)
    dot = to_dot(region.support_mdp, region.winning)
    assert dot.startswith("digraph support_mdp {")
    assert dot.count("->") == 7
    assert '"{s1,s2}"' in dot and "filled" in dot


def test_belief_reach_region_examples(noisy_pair, guess):
    region = belief_reach_region(noisy_pair, {"s2"})
    assert region.states == {"s1", "s2"} and S12 in region.winning
    g = belief_reach_region(guess, {"win"})
    assert g.states == {"h", "t", "win"}
    assert frozenset({"h", "t"}) not in g.winning


def test_belief_reach_region_matches_exact_value_one():
    for m in small_models(13, 40, single_source_noise=True):
        X = m.require_targets()
        won = initial_support(m) in belief_reach_region(m, X).winning
        assert won == (exact_value(m, X) == 1)
