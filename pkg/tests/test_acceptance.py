"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected in ``RESULTS`` and repeated in the terminal
summary (see conftest.py).
"""

import math
import random
import time
from fractions import Fraction as F

import numpy as np

from _oracles import brute_projection_distance, maximal_end_components_by_subsets
from conftest import small_models
from revpomdp import fixtures
from revpomdp.belief import Belief, Grid, apportion, l1_distance, one_step_outcomes, project
from revpomdp.mdp import EndComponent, mec_decomposition, parity_values
from revpomdp.modelio import ModelParseError, parse_model, serialize_model
from revpomdp.oracle import ExactValues, exact_tstep_value, reliable_actions, simulate, uniform_reliable_policy
from revpomdp.qualitative import almost_sure_parity_states, almost_sure_winning, limit_sure_winning
from revpomdp.quantitative import (
    StoppingParams, extract_policy, horizon_for_accuracy, parity_value, stopping_parameters, tstep_value,
)

RESULTS: dict[int, str] = {}


def verdict(n: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {n:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def named_fixtures():
    return [fixtures.noisy_pair(), fixtures.revealing_chain(), fixtures.wait_commit_revealing(), fixtures.guess_model()]


def oracle_fixtures(seed: int, count: int, **kw):
    """Random models whose reachable exact beliefs form a finite set."""
    return small_models(seed, count, single_source_noise=True, **kw)


def random_belief(rng: random.Random, support, n: int) -> Belief:
    w = [0] * n
    for i in support:
        w[i] = rng.randint(1, 9)
    tot = sum(w)
    return Belief(tuple(F(x, tot) for x in w))


# ---------------------------------------------------------------------------


def test_criterion_01_oracle_equivalence():
    rng = random.Random(101)
    eps = 0.1
    began = time.perf_counter()
    worst, count, bad = 0.0, 0, 0
    for _ in range(120):
        S = rng.randint(2, 4)
        A = rng.randint(1, 3)
        noise = rng.randint(0, min(2, 6 - S))
        m = fixtures.random_revealing(rng, S, A, n_noise=noise, max_successors=3, noise_prob=0.7)
        T = rng.randint(0, 6)
        X = m.require_targets()
        query = random_belief(rng, rng.sample(range(S), rng.randint(1, S)), S) if rng.random() < 0.5 else None
        exact = exact_tstep_value(m, X, T, query)
        approx = tstep_value(m, X, T, eps, query)
        err = abs(approx - float(exact))
        worst = max(worst, err)
        bad += err > eps
        count += 1
    elapsed = time.perf_counter() - began
    verdict(1, "grid T-step value vs exact oracle", bad == 0 and count >= 50 and elapsed < 60,
            f"{count} models, eps={eps}, worst error {worst:.2e}, {bad} violations, {elapsed:.1f}s")


def test_criterion_02_fully_observable_reduction():
    rng = random.Random(202)
    eps = 0.05
    began = time.perf_counter()
    worst, checks, bad = 0.0, 0, 0
    models = [fixtures.wait_commit_revealing()]
    models += [fixtures.random_fully_revealing(rng, rng.randint(2, 4), rng.randint(1, 3), max_successors=3,
                                               max_priority=3) for _ in range(24)]
    for m in models:
        ref = parity_values(fixtures.as_mdp(m), dict(m.priorities))
        for s in m.states:
            got = parity_value(m, None, eps, {s: 1}).value
            err = abs(got - float(ref[s]))
            worst = max(worst, err)
            bad += err > eps
            checks += 1
    elapsed = time.perf_counter() - began
    verdict(2, "fully revealing parity value vs MDP parity value", bad == 0 and len(models) >= 20 and elapsed < 60,
            f"{len(models)} models, {checks} Dirac queries, worst error {worst:.2e}, {elapsed:.1f}s")


def test_criterion_03_qualitative_coincidence():
    models = named_fixtures() + oracle_fixtures(303, 40, max_priority=3)
    mismatch, low, checked = 0, [], 0
    for m in models:
        mismatch += bool(limit_sure_winning(m)) != almost_sure_winning(m)
        for s in sorted(almost_sure_parity_states(m)):
            v = parity_value(m, None, 0.05, {s: 1}).value
            checked += 1
            if v < 0.95:
                low.append((s, v))
    verdict(3, "limit-sure equals almost-sure; X has value >= 1-eps", mismatch == 0 and not low,
            f"{len(models)} fixtures, {mismatch} verdict mismatches, {checked} states of X checked, "
            f"{len(low)} below 0.95")


def test_criterion_04_stopping_lemma():
    runs = 100_000
    rows, bad = [], 0
    models = [fixtures.guess_model(), fixtures.revealing_chain(), fixtures.wait_commit_revealing()]
    models += oracle_fixtures(404, 12)
    for m in models:
        X = m.require_targets()
        p = stopping_parameters(m)
        stats = simulate(m, uniform_reliable_policy(m, X), "reach", cutoff=p.n, runs=runs, seed=44, targets=X)
        rate = stats.hit_within(p.n) / runs
        q = float(p.q)
        sigma = math.sqrt(q * (1 - q) / runs)
        ok = rate >= q - 3 * sigma
        bad += not ok
        rows.append(rate)
    verdict(4, "uniform-reliable policy is (n,q)-stopping", bad == 0 and len(models) >= 10,
            f"{len(models)} fixtures x {runs} runs, min hit rate within n steps {min(rows):.4f}, {bad} below q-3sigma")


def test_criterion_05_martingale():
    models = [fixtures.guess_model(), fixtures.revealing_chain(), fixtures.wait_commit_revealing()]
    models += oracle_fixtures(505, 60)
    checks, bad = 0, 0
    for m in models:
        vals = ExactValues(m, m.require_targets(), [Belief.initial(m)] + [Belief.dirac(m.n_states, i)
                                                                       for i in range(m.n_states)])
        for b in vals.graph.beliefs:
            if vals.is_target_dirac(b):
                continue
            acts = reliable_actions(m, b, vals)
            bad += not acts
            for a in acts:
                expected = sum((o.probability * vals(o.posterior) for o in one_step_outcomes(m, b, a)), F(0))
                bad += expected != vals(b)
                checks += 1
    verdict(5, "reliable actions preserve the exact value", bad == 0,
            f"{len(models)} fixtures, {checks} (belief, reliable action) pairs, {bad} violations")


def test_criterion_06_lipschitz_and_monotone():
    rng = random.Random(606)
    models = named_fixtures() + small_models(606, 30)
    lip_checks = mono_checks = bad = 0
    for m in models:
        X = m.require_targets()
        S = m.n_states
        for _ in range(4):
            supp = rng.sample(range(S), rng.randint(1, S))
            b, c = random_belief(rng, supp, S), random_belief(rng, supp, S)
            prev_b = None
            for T in range(5):
                vb = exact_tstep_value(m, X, T, b)
                vc = exact_tstep_value(m, X, T, c)
                bad += abs(vb - vc) > l1_distance(b, c)
                lip_checks += 1
                if prev_b is not None:
                    bad += vb < prev_b
                    mono_checks += 1
                prev_b = vb
    verdict(6, "exact T-step values: same-support 1-Lipschitz, monotone in T", bad == 0,
            f"{len(models)} fixtures, {lip_checks} Lipschitz and {mono_checks} monotonicity checks, exact, "
            f"{bad} violations")


def test_criterion_07_projection_contract():
    rng = random.Random(707)
    exhaustive = bad = 0
    for S in range(1, 5):
        for k in range(S, 13):
            pts = Grid(k, S).counts()
            for _ in range(12):
                supp = sorted(rng.sample(range(S), rng.randint(1, S)))
                w = [0] * S
                for i in supp:
                    w[i] = rng.randint(1, 40)
                D = sum(w)
                proj = apportion(w, k)
                # L1 distance scaled by k*D is an integer
                same = np.all((pts > 0) == (np.array(w) > 0), axis=1)
                best = np.abs(pts[same] * D - k * np.array(w)).sum(axis=1).min()
                got = sum(abs(n * D - k * x) for n, x in zip(proj, w))
                bad += got != best
                exhaustive += 1
    b = Belief((F(1, 3), F(1, 6), F(1, 2), F(0)))
    bad += l1_distance(b, project(b, 5)) != brute_projection_distance(b, 5)
    worst_ratio, over = 0.0, 0
    for _ in range(10_000):
        S = rng.randint(1, 4)
        k = rng.randint(S, 60)
        b = random_belief(rng, sorted(rng.sample(range(S), rng.randint(1, S))), S)
        d = l1_distance(b, project(b, k))
        worst_ratio = max(worst_ratio, float(d * k / S))
        over += d > F(S, k)
    verdict(7, "projection is the same-support L1 minimiser and within |S|/k", bad == 0 and over == 0,
            f"{exhaustive} exhaustive cases (|S|<=4, k<=12), {bad} non-optimal; 10000 random beliefs, "
            f"max distance {worst_ratio:.3f} x |S|/k, {over} over the bound")


def test_criterion_08_end_components():
    rng = random.Random(808)
    instances = bad = 0
    for _ in range(150):
        m = fixtures.random_mdp(rng, rng.randint(1, 5), rng.randint(1, 3))
        bad += set(mec_decomposition(m)) != set(maximal_end_components_by_subsets(m))
        instances += 1
    fig = mec_decomposition(fixtures.wait_commit_mdp())
    expected = [EndComponent.of({"s0": {"w"}, "s1": {"w", "c"}, "top": {"w", "c"}}),
                EndComponent.of({"bot": {"w", "c"}})]
    fig_ok = fig == expected
    verdict(8, "MEC decomposition vs brute force; wait/commit example MECs", bad == 0 and fig_ok and instances >= 100,
            f"{instances} random MDPs (<=5 states, <=3 actions), {bad} mismatches; wait/commit example "
            f"{'matches' if fig_ok else 'differs'}")


def test_criterion_09_policy_realization():
    runs, eps = 10_000, 0.05
    models = named_fixtures() + [fixtures.all_priorities(fixtures.noisy_pair(), 0)] + oracle_fixtures(909, 8, max_priority=3)
    worst, bad = float("inf"), 0
    for m in models:
        rep = parity_value(m, None, eps, record_policy=True)
        pol = extract_policy(m, rep.solution, region=rep.region)
        stats = simulate(m, pol, "parity", cutoff=400, runs=runs, seed=99, targets=rep.region.states)
        margin = stats.rate - (rep.value - eps - 3 * stats.stderr)
        worst = min(worst, margin)
        bad += margin < 0
    verdict(9, "extracted two-phase policy achieves the parity value", bad == 0,
            f"{len(models)} fixtures x {runs} runs (cutoff 400), smallest margin over value-eps-3sigma "
            f"{worst:.4f}, {bad} failures")


def test_criterion_10_horizon_formula():
    plan = horizon_for_accuracy(StoppingParams(4, F(1, 64)), 1)
    exact = F(63, 64) ** 44 > F(1, 2) >= F(63, 64) ** 45
    params = [StoppingParams(4, F(1, 64)), StoppingParams(6, F(1, 1024)), StoppingParams(5, F(1, 8192))]
    mono = True
    for p in params:
        seq = [horizon_for_accuracy(p, F(i, 200)).theoretical for i in range(1, 200)]
        mono &= all(a >= b for a, b in zip(seq, seq[1:]))
    ok = plan.theoretical == 180 and plan.blocks == 45 and plan.exact_check and exact and mono
    verdict(10, "horizon formula", ok,
            f"T={plan.theoretical} (m={plan.blocks}, exact check {plan.exact_check}); "
            f"nonincreasing in eps over 3 x 199 values: {mono}")


def _mutate(rng: random.Random, doc: bytes) -> bytes:
    b = bytearray(doc)
    for _ in range(rng.randint(1, 4)):
        op = rng.randrange(4)
        p = rng.randrange(len(b) + 1)
        if op == 0 and p < len(b):
            b[p] = rng.randrange(256)
        elif op == 1 and p < len(b):
            del b[p]
        elif op == 2:
            b.insert(p, rng.choice(b'{}[]",:0123456789/-.eE ntrufals'))
        else:
            q = rng.randrange(len(b) + 1)
            lo, hi = sorted((p, q))
            b[lo:hi] = b[lo:hi][::-1]
    return bytes(b)


def test_criterion_11_parser_robustness():
    models = named_fixtures() + [fixtures.wait_commit_blind()] + small_models(1111, 20)
    round_trip = sum(parse_model(serialize_model(m)) == m for m in models)
    docs = [serialize_model(m).encode() for m in models[:8]]
    rng = random.Random(1111)
    crashes = accepted = rejected = unpositioned = 0
    for i in range(100_000):
        text = _mutate(rng, docs[i % len(docs)])
        try:
            parse_model(text)
            accepted += 1
        except ModelParseError as exc:
            rejected += 1
            unpositioned += not exc.errors or any(e.line < 1 or e.column < 1 for e in exc.errors)
        except Exception:  # noqa: BLE001 - any other exception is the failure being measured
            crashes += 1
    ok = round_trip == len(models) and crashes == 0 and unpositioned == 0
    verdict(11, "parser round trip and fuzzing", ok,
            f"round trip {round_trip}/{len(models)}; 100000 mutated documents: {rejected} rejected with "
            f"positions, {accepted} accepted, {crashes} crashes, {unpositioned} without position")
