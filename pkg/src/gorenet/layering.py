"""Connection between the dynamics net and the goal layer.

A binding maps places to goal-layer nodes (intentional elements, or actors
for the role-swap places) and names the trigger element whose place
activates the dynamics layer.  Simulation over a bound net observes the
token game: every token added to a softgoal-bound place is recorded as a
contribution event with the polarity declared on the binding entry.
Observation never changes net semantics; the marking trace of a hybrid run
is exactly the plain run's trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .goalmodel import ActorKind, ElementKind, GoalModel, Polarity, Violation, ValidationReport
from .petri import FiringScript, Marking, PetriNet, NotEnabledError, fire


@dataclass(frozen=True)
class BindingEntry:
    place: str
    node: str
    declared_kind: str | None = None
    polarity: Polarity = Polarity.HELP


@dataclass(frozen=True)
class LayerBinding:
    entries: tuple[BindingEntry, ...] = ()
    trigger: str | None = None

    def entry_for(self, place: str) -> BindingEntry | None:
        for entry in self.entries:
            if entry.place == place:
                return entry
        return None

    def trigger_place(self) -> str | None:
        if self.trigger is None:
            return None
        for entry in self.entries:
            if entry.node == self.trigger:
                return entry.place
        return None


_ELEMENT_KINDS = {k.value for k in ElementKind}
_ACTOR_KINDS = {k.value for k in ActorKind}


def bind_and_check(model: GoalModel, net: PetriNet, binding: LayerBinding) -> ValidationReport:
    """Cross-layer validation; violations are data, like goal validation."""
    out: list[Violation] = []
    place_ids = {p.id for p in net.places}
    bound_places: set[str] = set()
    node_to_place: dict[str, str] = {}

    for entry in binding.entries:
        if entry.place in bound_places:
            out.append(
                Violation("duplicate-place", entry.place, "place bound more than once")
            )
        bound_places.add(entry.place)
        if entry.place not in place_ids:
            out.append(Violation("unknown-place", entry.place, "place not in the net"))

        is_element = model.has_element(entry.node)
        is_actor = any(a.id == entry.node for a in model.actors)
        if not is_element and not is_actor:
            out.append(
                Violation("unknown-node", entry.place, f"binds unknown node {entry.node!r}")
            )
            continue

        if entry.node in node_to_place:
            out.append(
                Violation(
                    "non-injective",
                    entry.place,
                    f"{entry.node!r} already bound to {node_to_place[entry.node]}",
                )
            )
        else:
            node_to_place[entry.node] = entry.place

        if entry.declared_kind is not None:
            actual = (
                model.element(entry.node).kind.value
                if is_element
                else model.actor(entry.node).kind.value
            )
            expected_pool = _ELEMENT_KINDS if is_element else _ACTOR_KINDS
            if entry.declared_kind in (expected_pool | {"element"}):
                if entry.declared_kind not in ("element", actual):
                    out.append(
                        Violation(
                            "kind-mismatch",
                            entry.place,
                            f"declared as {entry.declared_kind}, "
                            f"{entry.node!r} is a {actual}",
                        )
                    )
            else:
                out.append(
                    Violation(
                        "kind-mismatch",
                        entry.place,
                        f"declared as {entry.declared_kind}, "
                        f"but {entry.node!r} is a {actual}",
                    )
                )

        if entry.polarity not in (Polarity.HELP, Polarity.HURT):
            out.append(
                Violation("unsupported-polarity", entry.place, "binding polarity must be help or hurt")
            )

    if binding.trigger is not None and not (
        model.has_element(binding.trigger)
        or any(a.id == binding.trigger for a in model.actors)
    ):
        out.append(
            Violation("trigger-unresolved", binding.trigger, "trigger names an unknown element")
        )
    if not binding.entries:
        out.append(
            Violation(
                "trigger-unreachable",
                binding.trigger or "<none>",
                "no places are bound; the dynamics layer can never activate",
                severity="warning",
            )
        )

    out.sort(key=lambda v: (v.subject, v.rule))
    return tuple(out)


@dataclass(frozen=True)
class ContributionEvent:
    round: int
    softgoal: str
    polarity: Polarity
    source_place: str


@dataclass(frozen=True)
class Tally:
    help: int = 0
    hurt: int = 0


@dataclass(frozen=True)
class HybridTrace:
    markings: tuple[Marking, ...]
    events: tuple[ContributionEvent, ...]
    tallies: dict[str, Tally] = field(compare=False)
    status: str = "script-ended"  # or rounds-exhausted / not-enabled
    rounds_completed: int = 0
    error: str | None = None
    trigger_place: str | None = None
    trigger_place_index: int | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def hybrid_simulate(
    model: GoalModel,
    net: PetriNet,
    binding: LayerBinding,
    m0: Marking,
    script: FiringScript,
    rounds: int | None = None,
    loop_transition: str | None = None,
) -> HybridTrace:
    """Run the token game and collect contribution events and tallies.

    ``rounds`` counts completed firings of ``loop_transition`` (by default
    the last transition of the net, which closes the feedback loop in the
    bundled case study).  With ``rounds`` set, the script is replayed from
    its start until the round budget is met; a replay pass that completes
    no round stops the run instead of spinning.
    """
    net.check_marking(m0)
    if loop_transition is None and net.transitions:
        loop_transition = net.transitions[-1]

    softgoal_entries: dict[str, BindingEntry] = {}
    for entry in binding.entries:
        if model.has_element(entry.node) and (
            model.element(entry.node).kind is ElementKind.SOFTGOAL
        ):
            softgoal_entries[entry.place] = entry

    markings: list[Marking] = [m0]
    events: list[ContributionEvent] = []
    counts: dict[str, dict[str, int]] = {}
    completed = 0
    status = "script-ended"
    error: str | None = None

    def record(before: Marking, after: Marking) -> None:
        for place, entry in softgoal_entries.items():
            idx = net.place_index(place)
            added = after[idx] - before[idx]
            for _ in range(max(0, added)):
                events.append(
                    ContributionEvent(completed, entry.node, entry.polarity, place)
                )
                slot = counts.setdefault(entry.node, {"help": 0, "hurt": 0})
                slot[entry.polarity.value] += 1

    step = 0
    done = not script
    if rounds is not None and completed >= rounds:
        done = True
        status = "rounds-exhausted"
    while not done:
        progressed = 0
        for tid in script:
            if rounds is not None and completed >= rounds:
                break
            before = markings[-1]
            try:
                after = fire(net, before, tid)
            except NotEnabledError as exc:
                error = f"not-enabled-at-step {step}: {exc}"
                status = "not-enabled"
                done = True
                break
            step += 1
            markings.append(after)
            record(before, after)
            if tid == loop_transition:
                completed += 1
                progressed += 1
        if done:
            break
        if rounds is not None and completed >= rounds:
            status = "rounds-exhausted"
            done = True
        elif rounds is None or progressed == 0:
            done = True

    tallies = {
        node: Tally(slot["help"], slot["hurt"]) for node, slot in sorted(counts.items())
    }
    trigger_place = binding.trigger_place()
    return HybridTrace(
        markings=tuple(markings),
        events=tuple(events),
        tallies=tallies,
        status=status,
        rounds_completed=completed,
        error=error,
        trigger_place=trigger_place,
        trigger_place_index=(
            net.place_index(trigger_place) if trigger_place is not None else None
        ),
    )


def trigger_state(trace: HybridTrace) -> str:
    """``dynamicsActive`` iff the trigger-bound place ever held a token."""
    idx = trace.trigger_place_index
    if idx is None:
        return "baseOnly"
    if any(m[idx] > 0 for m in trace.markings):
        return "dynamicsActive"
    return "baseOnly"
