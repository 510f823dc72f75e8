"""Grid value iteration for belief-reachability and parity values.

The engine works on count vectors of the k-uniform grid (see ``belief``).
Two layouts share the same sweep code:

* ``full`` materialises every grid point in lexicographic order, so the
  table is a dense vector indexed by grid rank;
* ``reachable`` only materialises the points reachable from the projected
  query under projected updates. The value at the query is identical, and
  huge resolutions stay tractable whenever few grid points are reachable.
"""

from __future__ import annotations

import math
import os
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .belief import Belief, Grid, apportion, grid_step
from .model import Pomdp, delta_min, format_fraction, require_revealing, to_fraction, validate
from .policies import HALT, IMPOSSIBLE, Policy, _support_nodes
from .qualitative import ParityRegion, parity_region

DEFAULT_MAX_GRID = 50_000_000
DEFAULT_MAX_HORIZON = 1_000_000
_CHUNK = 1 << 15


class ResourceLimitExceeded(RuntimeError):
    """A configured ceiling on grid points or sweeps would be exceeded."""

    def __init__(self, what: str, required, limit, note: str = ""):
        self.what = what
        self.required = required
        self.limit = limit
        msg = f"{what}: requires {required}, ceiling is {limit}"
        super().__init__(msg + (f" ({note})" if note else ""))


def _threads() -> int:
    raw = os.environ.get("REVPOMDP_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _check_epsilon(epsilon, allow_one: bool = False) -> Fraction:
    eps = to_fraction(epsilon)
    if not (0 < eps < 1 or (allow_one and eps == 1)):
        raise ValueError(f"epsilon must lie in (0,1), got {epsilon}")
    return eps


# ---------------------------------------------------------------------------
# horizon


@dataclass(frozen=True)
class StoppingParams:
    n: int
    q: Fraction


def stopping_parameters(model: Pomdp) -> StoppingParams:
    require_revealing(model)
    d = delta_min(model)
    return StoppingParams(model.n_states + 2, d * d * (d / model.n_actions) ** model.n_states)


@dataclass(frozen=True)
class HorizonPlan:
    """Theoretical horizon for an accuracy plus what a run actually used.

    ``exact_check`` says whether the block count was certified with exact
    rational powers (otherwise a 60-digit logarithm was used).
    """

    epsilon: Fraction
    n: int
    q: Fraction
    blocks: int
    theoretical: int
    exact_check: bool
    effective: int | None = None
    early_stop: bool = False
    tolerance: float | None = None
    stop_reason: str | None = None

    def finished(self, effective: int, early_stop: bool, tolerance, reason: str) -> "HorizonPlan":
        return replace(self, effective=effective, early_stop=early_stop, tolerance=tolerance, stop_reason=reason)


_EXACT_POWER_BITS = 4_000_000


def _ln_one_minus(q: Decimal) -> Decimal:
    """ln(1 - q) keeping relative precision when q is tiny."""
    if q > Decimal("0.5"):
        return (1 - q).ln()
    total, term, j = Decimal(0), q, 1
    while True:
        step = term / j
        if step < total.copy_abs() * Decimal(10) ** -70 or step == 0:
            return -total
        total += step
        term *= q
        j += 1


def _log_blocks(q: Fraction, half: Fraction) -> int:
    with localcontext() as ctx:
        ctx.prec = 60
        num = (Decimal(half.numerator) / Decimal(half.denominator)).ln()
        den = _ln_one_minus(Decimal(q.numerator) / Decimal(q.denominator))
        return max(1, int((num / den).to_integral_value(rounding="ROUND_CEILING")))


def horizon_for_accuracy(params: StoppingParams, epsilon) -> HorizonPlan:
    """Smallest m with (1-q)^m <= epsilon/2, times n.

    epsilon = 1 is accepted as the boundary case."""
    eps = _check_epsilon(epsilon, allow_one=True)
    q = Fraction(params.q)
    if not 0 < q <= 1:
        raise ValueError(f"q must lie in (0,1], got {q}")
    half = eps / 2
    r = 1 - q
    if r == 0:
        return HorizonPlan(eps, params.n, q, 1, params.n, True)
    m = _log_blocks(q, half)
    size = max(r.numerator.bit_length(), r.denominator.bit_length())
    exact = m * size <= _EXACT_POWER_BITS
    if exact:
        power = r ** m
        while power > half:
            power *= r
            m += 1
        while m > 1 and power / r <= half:
            power /= r
            m -= 1
    return HorizonPlan(eps, params.n, q, m, params.n * m, exact)


def grid_resolution(horizon: int, n_states: int, epsilon) -> int:
    eps = to_fraction(epsilon)
    return max(n_states, math.ceil(Fraction((horizon + 1) * n_states) / eps))


# ---------------------------------------------------------------------------
# engine


@dataclass(eq=False)
class ValueTable:
    """Values of one sweep on the materialised grid points.

    In ``full`` layout ``points`` is the whole grid in rank order; in
    ``reachable`` layout it is the explored subset.
    """

    grid: Grid
    points: np.ndarray
    values: np.ndarray
    step: int
    targets: frozenset

    def __len__(self):
        return len(self.values)


def _neumaier_sum(terms: np.ndarray) -> np.ndarray:
    """Compensated sum over the last axis."""
    s = np.zeros(terms.shape[:-1])
    c = np.zeros_like(s)
    for j in range(terms.shape[-1]):
        x = terms[..., j]
        t = s + x
        c += np.where(np.abs(s) >= np.abs(x), (s - t) + x, (x - t) + s)
        s = t
    return s + c


class GridSolver:
    """Projected belief dynamics on the k-grid plus T-step Bellman sweeps."""

    def __init__(self, model: Pomdp, targets: Iterable[str], k: int, layout: str = "reachable",
                 max_grid: int = DEFAULT_MAX_GRID, threads: int | None = None):
        require_revealing(model)
        self.model = model
        self.targets = frozenset(targets)
        for s in self.targets:
            if s not in model.state_index:
                raise ValueError(f"unknown target state {s!r}")
        if k < model.n_states:
            raise ValueError(f"grid resolution k={k} is below |S|={model.n_states}")
        self.k = int(k)
        self.grid = Grid(self.k, model.n_states)
        self.layout = layout
        self.max_grid = max_grid
        self.threads = threads or _threads()
        self._target_idx = np.array(sorted(model.state_index[s] for s in self.targets), dtype=np.int64)
        self._index: dict[bytes, int] = {}
        A, Z, S = model.n_actions, model.n_signals, model.n_states
        self.points = np.zeros((0, S), dtype=np.int64)
        self.succ = np.zeros((0, A, Z), dtype=np.int64)
        self.prob = np.zeros((0, A, Z))
        if layout == "full":
            self._build_full()
        elif layout != "reachable":
            raise ValueError(f"unknown layout {layout!r}")

    # -- structure --------------------------------------------------------
    def _absorbing(self, pts: np.ndarray) -> np.ndarray:
        if not len(self._target_idx):
            return np.zeros(len(pts), dtype=bool)
        return (pts[:, self._target_idx] == self.k).any(axis=1)

    @property
    def absorbing(self) -> np.ndarray:
        return self._absorbing(self.points)

    def _build_full(self):
        size = self.grid.size
        if size > self.max_grid:
            raise ResourceLimitExceeded("grid points", size, self.max_grid, f"k={self.k}, |S|={self.model.n_states}")
        pts = self.grid.counts()
        A, Z = self.model.n_actions, self.model.n_signals
        succ = np.full((size, A, Z), IMPOSSIBLE, dtype=np.int64)
        prob = np.zeros((size, A, Z))
        live = np.flatnonzero(~self._absorbing(pts))
        for lo in range(0, len(live), _CHUNK):
            rows = live[lo:lo + _CHUNK]
            sc, pr = grid_step(self.model, pts[rows], self.k)
            ok = pr > 0
            idx = np.full(pr.shape, IMPOSSIBLE, dtype=np.int64)
            idx[ok] = self.grid.index_array(sc[ok])
            succ[rows] = idx
            prob[rows] = pr
        self.points, self.succ, self.prob = pts, succ, prob

    def lookup(self, counts) -> int | None:
        counts = np.asarray(counts, dtype=np.int64)
        if self.layout == "full":
            return self.grid.index(counts)
        return self._index.get(counts.tobytes())

    def ensure(self, counts) -> int:
        """Index of a grid point, exploring its projected closure if new."""
        counts = np.asarray(counts, dtype=np.int64).reshape(-1)
        idx = self.lookup(counts)
        if idx is not None:
            return idx
        self._explore(counts[None, :])
        return self._index[counts.tobytes()]

    def _add(self, rows: np.ndarray) -> np.ndarray:
        ids = np.empty(len(rows), dtype=np.int64)
        new = []
        n = len(self.points)
        for i, row in enumerate(rows):
            key = row.tobytes()
            j = self._index.get(key)
            if j is None:
                j = n + len(new)
                self._index[key] = j
                new.append(row)
            ids[i] = j
        if new:
            total = n + len(new)
            if total > self.max_grid:
                raise ResourceLimitExceeded("explored grid points", f"more than {self.max_grid}", self.max_grid,
                                            f"k={self.k}")
            A, Z = self.model.n_actions, self.model.n_signals
            self.points = np.concatenate([self.points, np.array(new, dtype=np.int64)])
            self.succ = np.concatenate([self.succ, np.full((len(new), A, Z), IMPOSSIBLE, dtype=np.int64)])
            self.prob = np.concatenate([self.prob, np.zeros((len(new), A, Z))])
        return ids

    def _explore(self, roots: np.ndarray):
        before = len(self.points)
        self._add(roots)
        frontier = np.arange(before, len(self.points))
        while len(frontier):
            frontier = frontier[~self._absorbing(self.points[frontier])]
            start = len(self.points)
            for lo in range(0, len(frontier), _CHUNK):
                rows = frontier[lo:lo + _CHUNK]
                sc, pr = grid_step(self.model, self.points[rows], self.k)
                ok = pr > 0
                flat = sc[ok]
                idx = np.full(pr.shape, IMPOSSIBLE, dtype=np.int64)
                if len(flat):
                    uniq, inv = np.unique(flat, axis=0, return_inverse=True)
                    idx[ok] = self._add(uniq)[inv.reshape(-1)]
                self.succ[rows] = idx
                self.prob[rows] = pr
            frontier = np.arange(start, len(self.points))

    # -- sweeps -----------------------------------------------------------
    def _q_values(self, v: np.ndarray) -> np.ndarray:
        safe = np.where(self.succ < 0, 0, self.succ)
        if self.threads <= 1 or len(v) < 4 * _CHUNK:
            return _neumaier_sum(self.prob * v[safe])
        out = np.empty(self.prob.shape[:2])

        def work(lo):
            hi = min(lo + _CHUNK, len(v))
            out[lo:hi] = _neumaier_sum(self.prob[lo:hi] * v[safe[lo:hi]])

        with ThreadPoolExecutor(self.threads) as pool:
            list(pool.map(work, range(0, len(v), _CHUNK)))
        return out

    def sweep(self, horizon: int, *, window: int | None = None, tolerance: float | None = None,
              max_sweeps: int = DEFAULT_MAX_HORIZON, record_policy: bool = False, keep_tables: bool = False):
        """Run up to ``horizon`` Bellman sweeps; returns a :class:`SweepResult`.

        With ``window`` and ``tolerance`` the run stops once the largest
        increase over the last ``window`` sweeps is below ``tolerance``.
        """
        early = window is not None and tolerance is not None
        if horizon > max_sweeps and not early:
            raise ResourceLimitExceeded("Bellman sweeps", horizon, max_sweeps)
        absorbing = self.absorbing
        v = absorbing.astype(float)
        tables = [v.copy()] if keep_tables else []
        history = deque([v.copy()], maxlen=(window or 1))
        argmax: list[tuple[int, np.ndarray]] = []
        prev_arg = None
        rows = np.arange(len(v))
        t = 0
        reason = "horizon"
        while t < horizon:
            if t >= max_sweeps:
                raise ResourceLimitExceeded("Bellman sweeps", horizon, max_sweeps,
                                            f"no convergence within {max_sweeps} sweeps")
            Q = self._q_values(v)
            new = Q.max(axis=1)
            new[absorbing] = 1.0
            np.clip(new, 0.0, 1.0, out=new)
            t += 1
            if record_policy:
                arg = Q.argmax(axis=1).astype(np.int32)
                if prev_arg is not None:
                    # keep the previous choice while it still attains the max
                    keep = Q[rows, prev_arg] >= new - 1e-14
                    arg = np.where(keep, prev_arg, arg).astype(np.int32)
                if prev_arg is None or not np.array_equal(arg, prev_arg):
                    argmax.append((t, arg))
                prev_arg = arg
            if keep_tables:
                tables.append(new.copy())
            if early and t >= window and float(np.max(new - history[0], initial=0.0)) < tolerance:
                v = new
                reason = "converged"
                break
            history.append(new.copy())
            v = new
        return SweepResult(v, t, reason, argmax, tables)


@dataclass(eq=False)
class SweepResult:
    values: np.ndarray
    steps: int
    reason: str
    argmax: list
    tables: list

    def argmax_at(self, t: int) -> np.ndarray:
        """Action indices chosen by sweep ``t`` (clamped to the run)."""
        t = min(max(t, 1), self.steps)
        chosen = self.argmax[0][1]
        for start, arr in self.argmax:
            if start > t:
                break
            chosen = arr
        return chosen


@dataclass(eq=False)
class GridSolution:
    """Outcome of one grid value iteration."""

    model: Pomdp
    targets: frozenset
    solver: GridSolver
    result: SweepResult
    query: Belief
    query_counts: tuple
    query_index: int
    seconds: float

    @property
    def value(self) -> float:
        return float(self.result.values[self.query_index])

    @property
    def horizon(self) -> int:
        return self.result.steps

    @property
    def table(self) -> ValueTable:
        return ValueTable(self.solver.grid, self.solver.points, self.result.values, self.result.steps, self.targets)

    def tables(self) -> list[ValueTable]:
        return [ValueTable(self.solver.grid, self.solver.points, v, t, self.targets)
                for t, v in enumerate(self.result.tables)]

    def value_at(self, b: Belief) -> float:
        """Table value at the projection of ``b`` (explores and re-solves if needed)."""
        counts = apportion(_weights(b), self.solver.k)
        idx = self.solver.lookup(np.array(counts))
        if idx is None or idx >= len(self.result.values):
            raise KeyError("belief projects outside the solved region")
        return float(self.result.values[idx])


def _weights(b: Belief) -> list[int]:
    probs = [Fraction(p) for p in b.probs]
    den = math.lcm(*(p.denominator for p in probs))
    return [int(p * den) for p in probs]


def _query(model: Pomdp, query) -> Belief:
    if query is None:
        return Belief.initial(model)
    if isinstance(query, Belief):
        if query.dim != model.n_states:
            raise ValueError(f"query has dimension {query.dim}, model has {model.n_states} states")
        return query
    return Belief.of(model, query)


def solve_tstep(model: Pomdp, targets: Iterable[str], horizon: int, epsilon, query=None, *, k: int | None = None,
                layout: str = "reachable", max_grid: int = DEFAULT_MAX_GRID, max_horizon: int = DEFAULT_MAX_HORIZON,
                window: int | None = None, tolerance: float | None = None, record_policy: bool = False,
                keep_tables: bool = False) -> GridSolution:
    """T-step belief-reachability by grid value iteration, with full diagnostics."""
    eps = _check_epsilon(epsilon)
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    b = _query(model, query)
    if k is None:
        k = grid_resolution(horizon, model.n_states, eps)
    began = time.perf_counter()
    solver = GridSolver(model, targets, k, layout=layout, max_grid=max_grid)
    counts = apportion(_weights(b), solver.k)
    qi = solver.ensure(counts)
    result = solver.sweep(horizon, window=window, tolerance=tolerance, max_sweeps=max_horizon,
                          record_policy=record_policy, keep_tables=keep_tables)
    return GridSolution(model, solver.targets, solver, result, b, counts, qi, time.perf_counter() - began)


def tstep_value(model: Pomdp, targets: Iterable[str], horizon: int, epsilon, query=None, **options) -> float:
    """Approximate T-step belief-reachability value, within ``epsilon``."""
    return solve_tstep(model, targets, horizon, epsilon, query, **options).value


# ---------------------------------------------------------------------------
# belief-reachability and parity values


@dataclass(eq=False)
class ValueReport:
    value: float
    plan: HorizonPlan
    solution: GridSolution
    targets: frozenset
    region: ParityRegion | None = None

    def record(self) -> dict:
        sol = self.solution
        plan = self.plan
        return {
            "value": self.value,
            "epsilon": format_fraction(plan.epsilon),
            "targets": [s for s in sol.model.states if s in self.targets],
            "k": sol.solver.k,
            "grid_size": sol.solver.grid.size,
            "grid_points_materialised": len(sol.solver.points),
            "layout": sol.solver.layout,
            "stopping": {"n": plan.n, "q": format_fraction(plan.q)},
            "theoretical_horizon": plan.theoretical,
            "horizon_certified_exactly": plan.exact_check,
            "effective_horizon": plan.effective,
            "early_stop": plan.early_stop,
            "tolerance": plan.tolerance,
            "stop_reason": plan.stop_reason,
            "seconds": round(sol.seconds, 6),
        }


def belief_reach_value(model: Pomdp, targets: Iterable[str] | None, epsilon, query=None, *, early_stop: bool = True,
                       horizon: int | None = None, k: int | None = None, layout: str = "reachable",
                       max_grid: int = DEFAULT_MAX_GRID, max_horizon: int = DEFAULT_MAX_HORIZON,
                       record_policy: bool = False) -> ValueReport:
    """Approximate belief-reachability value within ``epsilon``.

    Runs the T-step solver at accuracy epsilon/2 with the theoretical
    horizon (or ``horizon`` when given). With ``early_stop`` the sweeps halt
    once the increase over the last n sweeps drops below epsilon/(4T).
    """
    eps = _check_epsilon(epsilon)
    X = frozenset(model.require_targets() if targets is None else targets)
    params = stopping_parameters(model)
    plan = horizon_for_accuracy(params, eps)
    T = plan.theoretical if horizon is None else int(horizon)
    if horizon is not None:
        plan = replace(plan, theoretical=T, exact_check=False)
    if k is None:
        k = grid_resolution(T, model.n_states, eps / 2)
    window = tolerance = None
    if early_stop:
        window = params.n
        tolerance = float(eps) / (4 * T) if T else 0.0
    sol = solve_tstep(model, X, T, eps / 2, query, k=k, layout=layout, max_grid=max_grid, max_horizon=max_horizon,
                      window=window, tolerance=tolerance, record_policy=record_policy)
    plan = plan.finished(sol.horizon, early_stop, tolerance, sol.result.reason)
    return ValueReport(sol.value, plan, sol, X)


def parity_value(model: Pomdp, priorities: Mapping[str, int] | None, epsilon, query=None, **options) -> ValueReport:
    """Approximate parity value: belief-reachability of the almost-sure
    parity states."""
    region = parity_region(model, priorities)
    report = belief_reach_value(model, region.states, epsilon, query, **options)
    report.region = region
    return report


# ---------------------------------------------------------------------------
# policies


@dataclass(eq=False)
class GridPolicy(Policy):
    """Grid-greedy controller, optionally followed by the support witness.

    Nodes below ``n_grid`` are grid points; at step i such a node plays the
    argmax recorded by sweep ``horizon - i`` (the last sweep once the
    remaining horizon runs out). Other nodes are supports.
    """

    n_grid: int = 0
    sweeps: SweepResult | None = None

    def action_probs(self, nodes, step):
        out = self.dist[nodes].copy()
        on_grid = nodes < self.n_grid
        if on_grid.any():
            remaining = self.sweeps.steps - step
            arg = self.sweeps.argmax_at(remaining if remaining >= 1 else self.sweeps.steps)
            out[on_grid] = 0.0
            out[np.flatnonzero(on_grid), arg[nodes[on_grid]]] = 1.0
        return out


def extract_policy(model: Pomdp, solution: GridSolution, targets: Iterable[str] | None = None,
                   region: ParityRegion | None = None) -> GridPolicy:
    """Two-phase policy from a solved table.

    Phase 1 follows the recorded argmax on the projected belief; reaching a
    Dirac on a target switches to the support witness of ``region``. Without
    a region the episode halts there instead.
    """
    if not solution.result.argmax:
        if solution.result.steps == 0:
            raise ValueError("horizon 0 table has no recorded actions")
        raise ValueError("solution was computed without record_policy=True")
    X = frozenset(solution.targets if targets is None else targets)
    solver = solution.solver
    G = len(solver.points)
    A, Z = model.n_actions, model.n_signals
    S = model.n_states
    absorbing = solver.absorbing
    dirac_state = np.full(G, -1, dtype=np.int64)
    rows, cols = np.nonzero(solver.points == solver.k)
    dirac_state[rows] = cols
    labels = [str(tuple(int(x) for x in p)) for p in solver.points]
    if region is not None:
        supports, ids, s_next, s_dist = _support_nodes(model, region, offset=G)
        entry = {i: ids.get(frozenset([model.states[i]]), HALT) for i in range(S)}
        from .qualitative import support_name

        labels += [support_name(model, u) for u in supports]
    else:
        s_next = np.zeros((0, A, Z), dtype=np.int64)
        s_dist = np.zeros((0, A))
        entry = {i: HALT for i in range(S)}

    def redirect(node_ids: np.ndarray) -> np.ndarray:
        out = node_ids.copy()
        grid_ok = out >= 0
        hit = np.zeros_like(grid_ok)
        hit[grid_ok] = absorbing[out[grid_ok]]
        for j in np.flatnonzero(hit):
            out.flat[j] = entry[int(dirac_state[out.flat[j]])]
        return out

    g_next = redirect(solver.succ)
    g_dist = np.zeros((G, A))
    g_dist[:, 0] = 1.0
    nxt = np.concatenate([g_next, s_next]).astype(np.int64)
    dist = np.concatenate([g_dist, s_dist])
    start = int(redirect(np.array([solution.query_index]))[0])
    kind = "two-phase" if region is not None else "grid-greedy"
    return GridPolicy(kind, model, nxt, dist, start, labels, solution.query, n_grid=G, sweeps=solution.result)


# ---------------------------------------------------------------------------
# reachability through a probe action


def _fresh(name: str, taken: set) -> str:
    out = name
    while out in taken:
        out += "'"
    taken.add(out)
    return out


@dataclass(frozen=True)
class ProbeModel:
    model: Pomdp
    top: str
    bottom: str
    probe: str


def probe_transform(model: Pomdp, targets: Iterable[str] | None = None) -> ProbeModel:
    """Reduce plain reachability of ``targets`` to belief-reachability.

    Target states become absorbing and announce themselves. A fresh action
    ``probe`` moves a target state to a fresh absorbing state ``top`` and any
    other state to a fresh absorbing state ``bot``. Reaching a target has the
    same optimal probability as holding a Dirac belief on ``top``.
    """
    X = frozenset(model.require_targets() if targets is None else targets)
    taken = set(model.states) | set(model.signals) | set(model.actions)
    top, bot = _fresh("top", taken), _fresh("bot", taken)
    probe = _fresh("probe", taken)
    states = list(model.states) + [top, bot]
    actions = list(model.actions) + [probe]
    signals = list(model.signals) + [top, bot]
    trs = []

    def tr(s, a, t, z, p):
        trs.append({"from": s, "action": a, "to": t, "signal": z, "prob": p})

    for s in model.states:
        for a in model.actions:
            if s in X:
                tr(s, a, s, s, 1)
            else:
                for (t, z), p in model.kernel[(s, a)].items():
                    tr(s, a, t, z, p)
        tr(s, probe, top if s in X else bot, top if s in X else bot, 1)
    for s in (top, bot):
        for a in actions:
            tr(s, a, s, s, 1)
    pr = dict(model.priorities) if model.priorities is not None else {s: 1 for s in model.states}
    pr.update({top: 0, bot: 1})
    raw = {
        "revealing": True, "states": states, "actions": actions, "signals": signals, "transitions": trs,
        "initial": dict(model.initial), "priorities": pr, "targets": [top],
    }
    return ProbeModel(validate(raw), top, bot, probe)


def reach_value(model: Pomdp, targets: Iterable[str] | None, epsilon, query=None, **options) -> ValueReport:
    """Approximate optimal probability of reaching a target state."""
    pm = probe_transform(model, targets)
    b = _query(model, query)
    lifted = Belief(tuple(b.probs) + (type(b.probs[0])(0),) * 2)
    report = belief_reach_value(pm.model, [pm.top], epsilon, lifted, **options)
    return report


def plan_dict(plan: HorizonPlan) -> dict:
    out = asdict(plan)
    out["epsilon"] = str(plan.epsilon)
    out["q"] = str(plan.q)
    return out
