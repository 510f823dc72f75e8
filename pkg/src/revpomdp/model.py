"""POMDP domain types, validation, and the underlying MDP construction.

Probabilities are kept as :class:`fractions.Fraction` throughout; dense float
and integer views are derived lazily for the numerical engines.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from types import MappingProxyType
from typing import Any, Mapping

import numpy as np


class ModelError(Exception):
    """Base class for model-level failures."""


@dataclass(frozen=True)
class Violation:
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}" if self.location else self.message


class ModelValidationError(ModelError, ValueError):
    def __init__(self, violations: list[Violation]):
        self.violations = list(violations)
        lines = "\n".join(f"  - {v}" for v in self.violations)
        super().__init__(f"{len(self.violations)} violation(s):\n{lines}")


class NotRevealingError(ModelError):
    """Raised by analyses that are only sound on revealing models."""

    def __init__(self, violations=()):
        self.violations = list(violations)
        shown = ", ".join(f"({s},{a},{t})" for s, a, t in self.violations[:5])
        more = "" if len(self.violations) <= 5 else f" and {len(self.violations) - 5} more"
        super().__init__(f"model is not revealing: {shown}{more}")


class MissingSectionError(ModelError):
    """An operation needs `priorities` or `targets` but the model has none."""


def format_fraction(x: Fraction) -> str:
    """Decimal text when the fraction has a short terminating expansion, else p/q."""
    x = Fraction(x)
    d = x.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    if d != 1 or x.denominator > 10**12:
        return f"{x.numerator}/{x.denominator}"
    if x.denominator == 1:
        return str(x.numerator)
    digits = 0
    while (x * 10**digits).denominator != 1:
        digits += 1
    sign, scaled = ("-" if x < 0 else ""), str(abs(x.numerator) * 10**digits // x.denominator).rjust(digits + 1, "0")
    return f"{sign}{scaled[:-digits]}.{scaled[-digits:]}"


def to_fraction(value: Any) -> Fraction:
    """Exact conversion. Strings "p/q" and decimals are parsed exactly.

    Floats go through their shortest repr, so 0.1 becomes 1/10 rather than the
    binary approximation.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite probability {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a probability")


def _frozen_map(d):
    return MappingProxyType(dict(d))


@dataclass(frozen=True, eq=False)
class Pomdp:
    """A finite POMDP with rational kernel.

    ``kernel[(s, a)]`` maps ``(next_state, signal)`` to a positive Fraction;
    every ``(s, a)`` row sums to exactly one. ``initial`` maps states to their
    initial probability (absent states have probability zero).
    """

    states: tuple[str, ...]
    actions: tuple[str, ...]
    signals: tuple[str, ...]
    kernel: Mapping[tuple[str, str], Mapping[tuple[str, str], Fraction]]
    initial: Mapping[str, Fraction]
    priorities: Mapping[str, int] | None = None
    targets: frozenset[str] | None = None
    revealing: bool = False

    def __eq__(self, other):
        if not isinstance(other, Pomdp):
            return NotImplemented
        return (
            self.states == other.states
            and self.actions == other.actions
            and self.signals == other.signals
            and {k: dict(v) for k, v in self.kernel.items()}
            == {k: dict(v) for k, v in other.kernel.items()}
            and {s: p for s, p in self.initial.items() if p}
            == {s: p for s, p in other.initial.items() if p}
            and (dict(self.priorities) if self.priorities is not None else None)
            == (dict(other.priorities) if other.priorities is not None else None)
            and self.targets == other.targets
            and self.revealing == other.revealing
        )

    __hash__ = object.__hash__

    # index maps ------------------------------------------------------------
    @cached_property
    def state_index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.states)}

    @cached_property
    def action_index(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.actions)}

    @cached_property
    def signal_index(self) -> dict[str, int]:
        return {z: i for i, z in enumerate(self.signals)}

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    @property
    def n_signals(self) -> int:
        return len(self.signals)

    @property
    def max_priority(self) -> int:
        return max(self.require_priorities().values(), default=0)

    def require_priorities(self) -> Mapping[str, int]:
        if self.priorities is None:
            raise MissingSectionError("model has no priorities section")
        return self.priorities

    def require_targets(self) -> frozenset[str]:
        if self.targets is None:
            raise MissingSectionError("model has no targets section")
        return self.targets

    # dense views -------------------------------------------------------------
    @cached_property
    def denominator(self) -> int:
        """Least common denominator of every kernel entry."""
        d = 1
        for row in self.kernel.values():
            for p in row.values():
                d = math.lcm(d, p.denominator)
        return d

    @cached_property
    def kernel_int(self) -> np.ndarray:
        """Integer kernel of shape (A, Z, S, S'): entries are delta * denominator.

        Falls back to an object array of Python ints for huge denominators."""
        D = self.denominator
        dtype = np.int64 if D < 2**62 else object
        out = np.zeros((len(self.actions), len(self.signals), self.n_states, self.n_states), dtype=dtype)
        for (s, a), row in self.kernel.items():
            i, ai = self.state_index[s], self.action_index[a]
            for (t, z), p in row.items():
                out[ai, self.signal_index[z], i, self.state_index[t]] = int(p * D)
        out.setflags(write=False)
        return out

    @cached_property
    def kernel_float(self) -> np.ndarray:
        out = np.zeros(self.kernel_int.shape)
        for (s, a), row in self.kernel.items():
            i, ai = self.state_index[s], self.action_index[a]
            for (t, z), p in row.items():
                out[ai, self.signal_index[z], i, self.state_index[t]] = float(p)
        out.setflags(write=False)
        return out

    @cached_property
    def initial_vector(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(self.initial.get(s, 0)) for s in self.states)

    def successors(self, s: str, a: str) -> set[str]:
        return {t for (t, _z) in self.kernel[(s, a)]}

    def content_hash(self) -> str:
        from .modelio import serialize_model

        return hashlib.sha256(serialize_model(self).encode()).hexdigest()

    def with_(self, **changes) -> "Pomdp":
        """Copy with some sections replaced, re-validated."""
        raw = to_raw(self)
        for key, value in changes.items():
            raw[key] = value
        return validate(raw)


# ---------------------------------------------------------------------------
# validation

_RAW_KEYS = {"revealing", "states", "actions", "signals", "transitions", "initial", "priorities", "targets"}


def to_raw(model: Pomdp) -> dict:
    """Plain-dict description of a model (the inverse of :func:`validate`)."""
    transitions = []
    for s in model.states:
        for a in model.actions:
            row = model.kernel[(s, a)]
            order = sorted(row, key=lambda tz: (model.state_index[tz[0]], model.signal_index[tz[1]]))
            for t, z in order:
                p = row[(t, z)]
                transitions.append({"from": s, "action": a, "to": t, "signal": z, "prob": p})
    raw = {
        "revealing": model.revealing,
        "states": list(model.states),
        "actions": list(model.actions),
        "signals": list(model.signals),
        "transitions": transitions,
        "initial": {s: p for s, p in model.initial.items() if p},
    }
    if model.priorities is not None:
        raw["priorities"] = dict(model.priorities)
    if model.targets is not None:
        raw["targets"] = [s for s in model.states if s in model.targets]
    return raw


def _check_names(kind: str, names, out: list[Violation]) -> tuple[str, ...]:
    if not isinstance(names, (list, tuple)):
        out.append(Violation(kind, f"{kind} must be a list of names"))
        return ()
    seen: set[str] = set()
    result = []
    for n in names:
        if not isinstance(n, str) or not n:
            out.append(Violation(kind, f"invalid identifier {n!r}"))
            continue
        if n in seen:
            out.append(Violation(kind, f"duplicate identifier {n!r}"))
            continue
        seen.add(n)
        result.append(n)
    if not result:
        out.append(Violation(kind, f"{kind} must be nonempty"))
    return tuple(result)


def validate(raw: Mapping[str, Any]) -> Pomdp:
    """Check a raw description and build a :class:`Pomdp`.

    Raises :class:`ModelValidationError` listing every violation found.
    """
    out: list[Violation] = []
    unknown = set(raw) - _RAW_KEYS
    for key in sorted(unknown):
        out.append(Violation("", f"unknown key {key!r}"))
    for key in ("states", "actions", "signals", "transitions", "initial"):
        if key not in raw:
            out.append(Violation("", f"missing required key {key!r}"))
    if out:
        raise ModelValidationError(out)

    revealing = raw.get("revealing", False)
    if not isinstance(revealing, bool):
        out.append(Violation("revealing", "must be a boolean"))
        revealing = False
    states = _check_names("states", raw["states"], out)
    actions = _check_names("actions", raw["actions"], out)
    signals = _check_names("signals", raw["signals"], out)
    state_set, action_set, signal_set = set(states), set(actions), set(signals)

    kernel: dict[tuple[str, str], dict[tuple[str, str], Fraction]] = {
        (s, a): {} for s in states for a in actions
    }
    transitions = raw["transitions"]
    if not isinstance(transitions, (list, tuple)):
        out.append(Violation("transitions", "must be a list"))
        transitions = []
    for i, tr in enumerate(transitions):
        where = f"transitions[{i}]"
        if not isinstance(tr, Mapping):
            out.append(Violation(where, "entry must be an object"))
            continue
        extra = set(tr) - {"from", "action", "to", "signal", "prob"}
        missing = {"from", "action", "to", "signal", "prob"} - set(tr)
        if extra:
            out.append(Violation(where, f"unknown key(s) {sorted(extra)}"))
        if missing:
            out.append(Violation(where, f"missing key(s) {sorted(missing)}"))
            continue
        s, a, t, z = tr["from"], tr["action"], tr["to"], tr["signal"]
        ok = True
        for val, pool, kind in ((s, state_set, "state"), (a, action_set, "action"),
                                (t, state_set, "state"), (z, signal_set, "signal")):
            if not isinstance(val, str) or val not in pool:
                out.append(Violation(where, f"undeclared {kind} {val!r}"))
                ok = False
        try:
            p = to_fraction(tr["prob"])
        except (TypeError, ValueError, ZeroDivisionError):
            out.append(Violation(where, f"invalid probability {tr['prob']!r}"))
            continue
        if not ok:
            continue
        if p <= 0 or p > 1:
            out.append(Violation(f"({s},{a})", f"probability {format_fraction(p)} outside (0,1] for ({t},{z})"))
            continue
        row = kernel[(s, a)]
        if (t, z) in row:
            out.append(Violation(f"({s},{a})", f"duplicate entry for ({t},{z})"))
            continue
        row[(t, z)] = p
    for (s, a), row in kernel.items():
        total = sum(row.values(), Fraction(0))
        if not row:
            out.append(Violation(f"({s},{a})", "no transitions"))
        elif total != 1:
            out.append(Violation(f"({s},{a})", f"row sum {format_fraction(total)} ≠ 1 at ({s},{a})"))

    initial: dict[str, Fraction] = {}
    init_raw = raw["initial"]
    if isinstance(init_raw, Mapping):
        items = init_raw.items()
    elif isinstance(init_raw, str):
        items = [(init_raw, 1)]
    else:
        out.append(Violation("initial", "must map states to probabilities"))
        items = []
    for s, p in items:
        if s not in state_set:
            out.append(Violation("initial", f"undeclared state {s!r}"))
            continue
        try:
            p = to_fraction(p)
        except (TypeError, ValueError, ZeroDivisionError):
            out.append(Violation("initial", f"invalid probability {p!r} for {s!r}"))
            continue
        if p < 0:
            out.append(Violation("initial", f"negative probability for {s!r}"))
            continue
        if p:
            initial[s] = p
    if items and sum(initial.values(), Fraction(0)) != 1:
        total = sum(initial.values(), Fraction(0))
        out.append(Violation("initial", f"initial belief sums to {format_fraction(total)} ≠ 1"))

    priorities = None
    if raw.get("priorities") is not None:
        pr = raw["priorities"]
        if not isinstance(pr, Mapping):
            out.append(Violation("priorities", "must map states to integers"))
        else:
            priorities = {}
            for s, c in pr.items():
                if s not in state_set:
                    out.append(Violation("priorities", f"undeclared state {s!r}"))
                elif isinstance(c, bool) or not isinstance(c, int) or c < 0:
                    out.append(Violation("priorities", f"priority of {s!r} must be a non-negative integer"))
                else:
                    priorities[s] = c
            for s in states:
                if s not in pr:
                    out.append(Violation("priorities", f"missing priority for {s!r}"))
    targets = None
    if raw.get("targets") is not None:
        tg = raw["targets"]
        if not isinstance(tg, (list, tuple, set, frozenset)):
            out.append(Violation("targets", "must be a list of states"))
        else:
            for s in tg:
                if not isinstance(s, str) or s not in state_set:
                    out.append(Violation("targets", f"undeclared state {s!r}"))
            targets = frozenset(s for s in tg if isinstance(s, str) and s in state_set)

    if revealing:
        for s in states:
            if s not in signal_set:
                out.append(Violation("signals", f"revealing model must list state {s!r} as a signal"))

    if out:
        raise ModelValidationError(out)

    model = Pomdp(
        states=states,
        actions=actions,
        signals=signals,
        kernel=_frozen_map({k: _frozen_map(v) for k, v in kernel.items()}),
        initial=_frozen_map(initial),
        priorities=_frozen_map(priorities) if priorities is not None else None,
        targets=targets,
        revealing=revealing,
    )
    if revealing:
        ok, bad = check_revealing(model)
        if not ok:
            raise ModelValidationError(
                [Violation(f"({s},{a})", f"successor {t!r} is never announced") for s, a, t in bad]
            )
    return model


def check_revealing(model: Pomdp) -> tuple[bool, list[tuple[str, str, str]]]:
    """Every positive-probability successor must be announced with positive probability."""
    bad = []
    for s in model.states:
        for a in model.actions:
            row = model.kernel[(s, a)]
            for t in sorted({t for (t, _z) in row}, key=model.state_index.__getitem__):
                if row.get((t, t), 0) <= 0:
                    bad.append((s, a, t))
    return not bad, bad


def require_revealing(model: Pomdp) -> None:
    ok, bad = check_revealing(model)
    if not ok:
        raise NotRevealingError(bad)


def delta_min(model: Pomdp) -> Fraction:
    """Smallest positive kernel entry."""
    return min(p for row in model.kernel.values() for p in row.values())


PLACEHOLDER = None  # the "no signal yet" marker of underlying-MDP states


def build_underlying_mdp(model: Pomdp):
    """MDP over (state, signal-or-placeholder) pairs carrying the full dynamics."""
    from .mdp import FiniteMdp

    sigs = list(model.signals) + [PLACEHOLDER]
    states = [(s, z) for s in model.states for z in sigs]
    transitions = {}
    for s, z in states:
        for a in model.actions:
            transitions[((s, z), a)] = dict(model.kernel[(s, a)])
    initial = {(s, PLACEHOLDER): p for s, p in model.initial.items() if p}
    return FiniteMdp(states=tuple(states), actions=model.actions, transitions=transitions, initial=initial)
