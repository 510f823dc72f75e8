from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from revpomdp import fixtures
from revpomdp.model import (
    PLACEHOLDER, MissingSectionError, ModelValidationError, build_underlying_mdp, check_revealing, delta_min,
    format_fraction, to_fraction, validate,
)
from revpomdp.modelio import parse_model, serialize_model


def _two_state(rows=None, **extra):
    rows = rows or [("s1", "a", "s1", "s1", "1/2"), ("s1", "a", "s2", "s2", "1/2"), ("s2", "a", "s2", "s2", 1)]
    raw = {
        "states": ["s1", "s2"], "actions": ["a"], "signals": ["s1", "s2"],
        "transitions": [{"from": s, "action": a, "to": t, "signal": z, "prob": p} for s, a, t, z, p in rows],
        "initial": {"s1": 1},
    }
    raw.update(extra)
    return raw


def test_well_formed_model_accepted():
    m = validate(_two_state())
    assert m.states == ("s1", "s2") and m.kernel[("s1", "a")][("s2", "s2")] == Fraction(1, 2)


def test_row_sum_violation_message():
    raw = _two_state([("s1", "a", "s1", "s1", "0.5"), ("s1", "a", "s2", "s2", "0.4"), ("s2", "a", "s2", "s2", 1)])
    with pytest.raises(ModelValidationError) as exc:
        validate(raw)
    assert "row sum 0.9 ≠ 1 at (s1,a)" in [v.message for v in exc.value.violations]


def test_undeclared_signal_named():
    raw = _two_state([("s1", "a", "s1", "x", 1), ("s2", "a", "s2", "s2", 1)])
    with pytest.raises(ModelValidationError) as exc:
        validate(raw)
    assert any("'x'" in str(v) for v in exc.value.violations)


def test_all_violations_reported():
    raw = _two_state([("s1", "a", "s1", "s1", "0.3"), ("s2", "b", "s2", "s2", 1)], initial={"s1": "0.5"})
    raw["states"] = ["s1", "s2", "s1"]
    with pytest.raises(ModelValidationError) as exc:
        validate(raw)
    text = str(exc.value)
    for needle in ("duplicate identifier 's1'", "undeclared action 'b'", "row sum 0.3", "initial belief sums to 0.5"):
        assert needle in text


def test_unknown_and_missing_keys():
    raw = _two_state(colour="blue")
    del raw["initial"]
    with pytest.raises(ModelValidationError) as exc:
        validate(raw)
    assert {"unknown key 'colour'", "missing required key 'initial'"} <= {v.message for v in exc.value.violations}


def test_revealing_claim_requires_states_as_signals():
    raw = _two_state(revealing=True)
    raw["signals"] = ["s1"]
    raw["transitions"] = [{"from": "s1", "action": "a", "to": "s1", "signal": "s1", "prob": 1},
                          {"from": "s2", "action": "a", "to": "s1", "signal": "s1", "prob": 1}]
    with pytest.raises(ModelValidationError, match="must list state 's2'"):
        validate(raw)


def test_revealing_claim_checked():
    raw = _two_state([("s1", "a", "s2", "s1", 1), ("s2", "a", "s2", "s2", 1)], revealing=True)
    with pytest.raises(ModelValidationError, match="never announced"):
        validate(raw)


def test_check_revealing_examples(noisy_pair):
    assert check_revealing(fixtures.wait_commit_revealing()) == (True, [])
    assert check_revealing(noisy_pair)[0]
    ok, bad = check_revealing(fixtures.wait_commit_blind())
    edges = [(s, a, t) for (s, a), row in fixtures.WAIT_COMMIT_EDGES.items() for t in row]
    assert not ok and sorted(bad) == sorted(edges)


def test_delta_min_examples(noisy_pair):
    det = validate(_two_state([("s1", "a", "s2", "s2", 1), ("s2", "a", "s2", "s2", 1)]))
    assert delta_min(det) == 1
    mixed = validate(_two_state([("s1", "a", "s1", "s1", "1/2"), ("s1", "a", "s2", "s2", "1/4"),
                                 ("s1", "a", "s2", "s1", "1/4"), ("s2", "a", "s2", "s2", 1)]))
    assert delta_min(mixed) == Fraction(1, 4)
    assert delta_min(noisy_pair) == Fraction(1, 4)


def test_underlying_mdp_shape(noisy_pair):
    mdp = build_underlying_mdp(noisy_pair)
    assert len(mdp.states) == 2 * 4
    for (q, a), row in mdp.transitions.items():
        assert sum(row.values()) == 1
    assert mdp.initial == {("s1", PLACEHOLDER): Fraction(1, 2), ("s2", PLACEHOLDER): Fraction(1, 2)}
    blind = build_underlying_mdp(fixtures.wait_commit_blind())
    assert len(blind.states) == 4 * 2
    for (s, a), succ in fixtures.WAIT_COMMIT_EDGES.items():
        for z in ("o", PLACEHOLDER):
            assert blind.transitions[((s, z), a)] == {(t, "o"): p for t, p in succ.items()}


def test_underlying_mdp_independent_of_signal(noisy_pair):
    mdp = build_underlying_mdp(noisy_pair)
    for s in noisy_pair.states:
        rows = {tuple(sorted(mdp.transitions[((s, z), "a")].items())) for z in list(noisy_pair.signals) + [PLACEHOLDER]}
        assert len(rows) == 1


@given(st.integers(0, 10_000))
def test_underlying_mdp_preserves_reachability(seed):
    import random

    m = fixtures.random_revealing(random.Random(seed), 3, 2, n_noise=2)
    mdp = build_underlying_mdp(m)
    for s in m.states:
        for a in m.actions:
            pomdp_succ = m.successors(s, a)
            for z in list(m.signals) + [PLACEHOLDER]:
                assert {t for (t, _z) in mdp.post((s, z), a)} == pomdp_succ


def test_missing_sections_are_typed():
    m = validate(_two_state())
    with pytest.raises(MissingSectionError):
        m.require_priorities()
    with pytest.raises(MissingSectionError):
        m.require_targets()


@given(st.integers(0, 10_000))
def test_validate_serialize_idempotent(seed):
    import random

    m = fixtures.random_revealing(random.Random(seed), 3, 2, n_noise=2)
    again = parse_model(serialize_model(m))
    assert again == m
    assert serialize_model(again) == serialize_model(m)


def test_revealing_implies_dirac_outcomes():
    import random

    from revpomdp.belief import Belief, one_step_outcomes

    rng = random.Random(5)
    for _ in range(30):
        m = fixtures.random_revealing(rng, 3, 2, n_noise=2)
        b = Belief.initial(m)
        for a in m.actions:
            diracs = {o.posterior.support[0] for o in one_step_outcomes(m, b, a) if o.posterior.is_dirac()}
            succ = {m.state_index[t] for s in m.states if m.initial.get(s) for t in m.successors(s, a)}
            assert succ <= diracs


def test_fraction_helpers():
    assert to_fraction("1/3") == Fraction(1, 3)
    assert to_fraction("0.1") == Fraction(1, 10)
    assert to_fraction(0.1) == Fraction(1, 10)
    assert format_fraction(Fraction(9, 10)) == "0.9"
    assert format_fraction(Fraction(1, 3)) == "1/3"
    with pytest.raises(TypeError):
        to_fraction(True)


def test_with_revalidates(noisy_pair):
    m = noisy_pair.with_(targets=["s1"])
    assert m.targets == frozenset({"s1"}) and m.content_hash() != noisy_pair.content_hash()
    with pytest.raises(ModelValidationError):
        noisy_pair.with_(targets=["nope"])
