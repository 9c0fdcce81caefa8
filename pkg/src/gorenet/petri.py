"""Place/transition net engine.

Markings are plain tuples of non-negative token counts indexed by place
order, so they hash and compare by value.  Nets are immutable after
construction; every operation here is pure.

Firing rule: a transition is enabled when each input place holds at least
the arc weight; firing removes the input weights and adds the output
weights.  A transition with no input places is always enabled.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

Marking = tuple[int, ...]


@dataclass(frozen=True)
class Place:
    id: str
    label: str = ""


@dataclass(frozen=True)
class Arc:
    source: str
    target: str
    weight: int = 1


class NetDefinitionError(ValueError):
    pass


class MarkingMismatchError(ValueError):
    def __init__(self, expected: int, got: int) -> None:
        super().__init__(f"marking has {got} entries, net has {expected} places")


class NotEnabledError(RuntimeError):
    """Firing attempted on a disabled transition; names a deficient place."""

    def __init__(self, transition: str, place: str, have: int, need: int) -> None:
        super().__init__(
            f"not-enabled: {transition} needs {need} token(s) in {place}, has {have}"
        )
        self.transition = transition
        self.place = place


@dataclass(frozen=True)
class PetriNet:
    places: tuple[Place, ...]
    transitions: tuple[str, ...]
    arcs: tuple[Arc, ...]

    _index: dict[str, int] = field(default_factory=dict, repr=False, compare=False)
    # transition id -> ((place index, weight), ...)
    _inputs: dict[str, tuple[tuple[int, int], ...]] = field(
        default_factory=dict, repr=False, compare=False
    )
    _outputs: dict[str, tuple[tuple[int, int], ...]] = field(
        default_factory=dict, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        place_ids = [p.id for p in self.places]
        if len(set(place_ids)) != len(place_ids):
            raise NetDefinitionError("duplicate place id")
        if len(set(self.transitions)) != len(self.transitions):
            raise NetDefinitionError("duplicate transition id")
        overlap = set(place_ids) & set(self.transitions)
        if overlap:
            raise NetDefinitionError(f"ids used for both place and transition: {overlap}")
        self._index.update({pid: i for i, pid in enumerate(place_ids)})

        seen_arcs: set[tuple[str, str]] = set()
        inputs: dict[str, list[tuple[int, int]]] = {t: [] for t in self.transitions}
        outputs: dict[str, list[tuple[int, int]]] = {t: [] for t in self.transitions}
        for arc in self.arcs:
            if arc.weight < 1:
                raise NetDefinitionError(f"arc {arc.source}->{arc.target} weight must be >= 1")
            if (arc.source, arc.target) in seen_arcs:
                raise NetDefinitionError(f"duplicate arc {arc.source}->{arc.target}")
            seen_arcs.add((arc.source, arc.target))
            if arc.source in self._index and arc.target in inputs:
                inputs[arc.target].append((self._index[arc.source], arc.weight))
            elif arc.source in inputs and arc.target in self._index:
                outputs[arc.source].append((self._index[arc.target], arc.weight))
            else:
                raise NetDefinitionError(
                    f"arc {arc.source}->{arc.target} must join one place and one transition"
                )
        self._inputs.update({t: tuple(v) for t, v in inputs.items()})
        self._outputs.update({t: tuple(v) for t, v in outputs.items()})

    def place_index(self, place_id: str) -> int:
        return self._index[place_id]

    def has_transition(self, tid: str) -> bool:
        return tid in self._inputs

    def empty_marking(self) -> Marking:
        return (0,) * len(self.places)

    def check_marking(self, m: Marking) -> None:
        if len(m) != len(self.places):
            raise MarkingMismatchError(len(self.places), len(m))
        if any(k < 0 for k in m):
            raise ValueError(f"negative token count in marking {m}")

    def deficient_place(self, m: Marking, tid: str) -> tuple[str, int, int] | None:
        """First input place blocking ``tid`` at ``m``, in place order."""
        lacking = [
            (idx, need) for idx, need in self._inputs[tid] if m[idx] < need
        ]
        if not lacking:
            return None
        idx, need = min(lacking)
        return self.places[idx].id, m[idx], need


def enabled(net: PetriNet, m: Marking) -> set[str]:
    net.check_marking(m)
    return {
        t
        for t in net.transitions
        if all(m[idx] >= need for idx, need in net._inputs[t])
    }


def fire(net: PetriNet, m: Marking, tid: str) -> Marking:
    net.check_marking(m)
    if not net.has_transition(tid):
        raise KeyError(f"unknown transition {tid!r}")
    deficient = net.deficient_place(m, tid)
    if deficient is not None:
        place, have, need = deficient
        raise NotEnabledError(tid, place, have, need)
    out = list(m)
    for idx, w in net._inputs[tid]:
        out[idx] -= w
    for idx, w in net._outputs[tid]:
        out[idx] += w
    assert all(k >= 0 for k in out), "firing produced a negative marking"
    return tuple(out)


FiringScript = tuple[str, ...]


@dataclass(frozen=True)
class RunResult:
    """Trace of a scripted run; ``trace[0]`` is the initial marking.

    On a disabled step the trace is partial and ``error`` describes the
    failure as ``not-enabled-at-step k``.
    """

    trace: tuple[Marking, ...]
    error: str | None = None
    failed_step: int | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def run(net: PetriNet, m0: Marking, script: FiringScript) -> RunResult:
    net.check_marking(m0)
    for tid in script:
        if not net.has_transition(tid):
            raise KeyError(f"unknown transition {tid!r} in script")
    trace = [m0]
    for k, tid in enumerate(script):
        try:
            trace.append(fire(net, trace[-1], tid))
        except NotEnabledError as exc:
            return RunResult(
                tuple(trace),
                error=f"not-enabled-at-step {k}: {exc}",
                failed_step=k,
            )
    return RunResult(tuple(trace))


@dataclass(frozen=True)
class ReachabilityResult:
    markings: frozenset[Marking]
    truncated: bool


def reachable(net: PetriNet, m0: Marking, bound: int) -> ReachabilityResult:
    """Breadth-first closure of firing, capped at ``bound`` stored states.

    Exploration is deterministic: successors are generated in transition
    list order.
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    net.check_marking(m0)
    seen: set[Marking] = {m0}
    queue: deque[Marking] = deque([m0])
    truncated = False
    while queue:
        current = queue.popleft()
        for tid in net.transitions:
            if net.deficient_place(current, tid) is not None:
                continue
            nxt = fire(net, current, tid)
            if nxt in seen:
                continue
            if len(seen) >= bound:
                truncated = True
                continue
            seen.add(nxt)
            queue.append(nxt)
    return ReachabilityResult(frozenset(seen), truncated)
