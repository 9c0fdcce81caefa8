"""Qualitative what-if evaluation over the goal layer.

Forward propagation pushes scenario labels through the link structure until
a fixed point:

* AND-decomposition delivers the minimum of the children, once every child
  carries a label;
* means-ends delivers the maximum over the labelled means;
* a dependency copies the dependee's label to the dependum and the
  dependum's label to the depender;
* help/hurt contributions deliver the mapped label of their source.

An element that receives exactly one delivery, or several identical full
labels (S, D, U or C), is labelled automatically.  Any other bag of
evidence - mixed labels, or repeated partial labels whose accumulation only
an analyst can weigh - becomes a human-judgment point, answered from the
judgment table, from an interactive resolver, or left pending.  Scenario
labels are stipulations: they are never overridden by propagation.

Elements downstream of an unanswered judgment point are withheld from the
result rather than labelled from partial evidence.  Backward search is a
brute-force enumeration over the decision points, keeping the assignments
whose forward run labels the target as desired.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .goalmodel import (
    GoalModel,
    LinkKind,
    Polarity,
    UnknownIdError,
    decision_points,
)
from .labels import (
    HELP_MAP,
    HURT_MAP,
    QualLabel,
    max_label,
    min_label,
    rank,
)

Bag = tuple[QualLabel, ...]


def canonical_bag(labels: Iterable[QualLabel]) -> Bag:
    return tuple(sorted(labels, key=rank))


@dataclass(frozen=True)
class Scenario:
    name: str
    initial_labels: dict[str, QualLabel] = field(default_factory=dict)


def scenario_warnings(model: GoalModel, scenario: Scenario) -> list[str]:
    """Non-fatal notes: initial labels on elements that are not decisions."""
    dps = set(decision_points(model))
    out = []
    for element_id in sorted(scenario.initial_labels):
        if element_id not in dps:
            out.append(
                f"scenario {scenario.name!r} labels {element_id!r}, "
                "which is not a decision point"
            )
    return out


@dataclass(frozen=True)
class HJPoint:
    element: str
    bag: Bag

    def describe(self) -> str:
        labels = ", ".join(l.value for l in self.bag)
        return f"{self.element} given {{{labels}}}"


@dataclass(frozen=True)
class JudgmentEntry:
    element: str
    bag: Bag
    label: QualLabel
    provenance: str = "file"  # or "interactive"


class JudgmentTable:
    """Answers for judgment points, keyed by element and evidence multiset."""

    def __init__(self, entries: Iterable[JudgmentEntry] = ()) -> None:
        self._entries: dict[tuple[str, Bag], JudgmentEntry] = {}
        for entry in entries:
            self.add(entry)

    def add(self, entry: JudgmentEntry) -> None:
        key = (entry.element, canonical_bag(entry.bag))
        self._entries[key] = JudgmentEntry(
            entry.element, canonical_bag(entry.bag), entry.label, entry.provenance
        )

    def lookup(self, element: str, bag: Bag) -> JudgmentEntry | None:
        return self._entries.get((element, canonical_bag(bag)))

    def entries(self) -> list[JudgmentEntry]:
        return [self._entries[k] for k in sorted(self._entries, key=lambda k: (k[0], [l.value for l in k[1]]))]

    def merged(self, other: "JudgmentTable") -> "JudgmentTable":
        """New table where ``other``'s entries shadow this one's."""
        table = JudgmentTable(self.entries())
        for entry in other.entries():
            table.add(entry)
        return table

    def __len__(self) -> int:
        return len(self._entries)


class JudgmentSet:
    """Judgment tables from a file: one shared table plus per-scenario ones.

    The printed what-if tables answer the same evidence differently in
    different scenarios, so scoping is part of the format.
    """

    def __init__(self) -> None:
        self.shared = JudgmentTable()
        self.scoped: dict[str, JudgmentTable] = {}

    def table_for(self, scenario_name: str | None) -> JudgmentTable:
        if scenario_name is None or scenario_name not in self.scoped:
            return self.shared
        return self.shared.merged(self.scoped[scenario_name])

    def scope(self, name: str) -> JudgmentTable:
        return self.scoped.setdefault(name, JudgmentTable())


@dataclass(frozen=True)
class AuditStep:
    element: str
    deliveries: tuple[tuple[str, QualLabel], ...]  # (origin description, label)
    bag: Bag
    method: str  # initial | single | identical | judgment-file | judgment-interactive
    label: QualLabel


@dataclass(frozen=True)
class EvaluationResult:
    status: str  # ok | unresolved-judgments
    final_labels: dict[str, QualLabel]
    judgments_used: tuple[JudgmentEntry, ...]
    pending: tuple[HJPoint, ...]
    unlabeled: tuple[str, ...]
    blocked: tuple[str, ...]
    audit: tuple[AuditStep, ...]

    @property
    def ok(self) -> bool:
        return self.status == "ok"


class NonConvergentError(RuntimeError):
    def __init__(self, cycle: list[str]) -> None:
        super().__init__("non-convergent: labels keep changing through " + " -> ".join(cycle))
        self.cycle = cycle


Resolver = Callable[[HJPoint], QualLabel | None]


class _Evidence:
    """Per-element incoming evidence structure, precomputed from the links."""

    def __init__(self, model: GoalModel) -> None:
        self.children: dict[str, list[str]] = {}
        self.means: dict[str, list[str]] = {}
        self.copies: dict[str, list[tuple[str, str]]] = {}  # element -> (source, origin)
        self.contribs: dict[str, list[tuple[str, Polarity]]] = {}
        feeds: dict[str, set[str]] = {e.id: set() for e in model.elements}

        for link in sorted(model.links, key=lambda l: l.id):
            if link.kind is LinkKind.DECOMPOSITION:
                self.children.setdefault(link.target, []).append(link.source)
                feeds[link.source].add(link.target)
            elif link.kind is LinkKind.MEANS_END:
                self.means.setdefault(link.target, []).append(link.source)
                feeds[link.source].add(link.target)
            elif link.kind is LinkKind.CONTRIBUTION:
                if link.polarity not in (Polarity.HELP, Polarity.HURT):
                    raise ValueError(
                        f"link {link.id}: {link.polarity and link.polarity.value!r} "
                        "contributions cannot be evaluated (validate the model first)"
                    )
                self.contribs.setdefault(link.target, []).append(
                    (link.source, link.polarity)
                )
                feeds[link.source].add(link.target)
            elif link.kind is LinkKind.DEPENDENCY:
                assert link.dependum is not None
                # dependee -> dependum -> depender
                self.copies.setdefault(link.dependum, []).append(
                    (link.target, f"dependee {link.target}")
                )
                self.copies.setdefault(link.source, []).append(
                    (link.dependum, f"dependum {link.dependum}")
                )
                feeds[link.target].add(link.dependum)
                feeds[link.dependum].add(link.source)

        self.feeds = feeds  # evidence-flow successors

    def order(self, model: GoalModel) -> tuple[list[str], bool]:
        """Topological order over evidence flow; falls back to id order."""
        ids = sorted(e.id for e in model.elements)
        indegree = {i: 0 for i in ids}
        for src, outs in self.feeds.items():
            for dst in outs:
                indegree[dst] += 1
        ready = sorted(i for i in ids if indegree[i] == 0)
        out: list[str] = []
        while ready:
            node = ready.pop(0)
            out.append(node)
            for dst in sorted(self.feeds[node]):
                indegree[dst] -= 1
                if indegree[dst] == 0:
                    ready.append(dst)
            ready.sort()
        if len(out) == len(ids):
            return out, True
        return ids, False


def _combine(
    element: str,
    deliveries: list[tuple[str, QualLabel]],
    memo: Mapping[tuple[str, Bag], JudgmentEntry],
) -> tuple[QualLabel | None, str, Bag]:
    """Combination rule; returns (label or None-if-pending, method, bag)."""
    bag = canonical_bag(label for _, label in deliveries)
    if len(bag) == 1:
        return bag[0], "single", bag
    first = bag[0]
    if all(l is first for l in bag) and first in (
        QualLabel.S,
        QualLabel.D,
        QualLabel.U,
        QualLabel.C,
    ):
        return first, "identical", bag
    entry = memo.get((element, bag))
    if entry is not None:
        return entry.label, f"judgment-{entry.provenance}", bag
    return None, "pending", bag


def _fixpoint(
    model: GoalModel,
    scenario: Scenario,
    memo: dict[tuple[str, Bag], JudgmentEntry],
    max_sweeps: int,
) -> EvaluationResult:
    evidence = _Evidence(model)
    order, is_dag = evidence.order(model)
    sweeps = 1 if is_dag else max_sweeps

    pinned: dict[str, QualLabel] = {}
    for element_id, label in scenario.initial_labels.items():
        model.element(element_id)  # raises UnknownIdError on bad keys
        pinned[element_id] = label

    labels: dict[str, QualLabel] = dict(pinned)
    blocked: set[str] = set()
    pending: dict[str, HJPoint] = {}
    used: dict[tuple[str, Bag], JudgmentEntry] = {}
    audit: dict[str, AuditStep] = {}
    previous: dict[str, QualLabel] | None = None

    for sweep in range(sweeps):
        labels = dict(pinned)
        blocked = set()
        pending = {}
        used = {}
        audit = {}
        reference = previous if previous is not None else {}

        def status_of(source: str) -> str:
            if source in labels:
                return "labeled"
            if source in blocked or source in pending:
                return "blocked"
            if not is_dag and source in reference:
                return "labeled-prev"
            return "unlabeled"

        def label_of(source: str) -> QualLabel:
            return labels.get(source) or reference[source]

        for element_id in order:
            if element_id in pinned:
                audit[element_id] = AuditStep(
                    element_id, (), (pinned[element_id],), "initial", pinned[element_id]
                )
                continue

            deliveries: list[tuple[str, QualLabel]] = []
            is_blocked = False

            children = evidence.children.get(element_id, [])
            if children:
                statuses = [status_of(c) for c in children]
                if "blocked" in statuses:
                    is_blocked = True
                elif all(s in ("labeled", "labeled-prev") for s in statuses):
                    combined = min_label([label_of(c) for c in children])
                    if combined.ambiguous:
                        child_bag = canonical_bag(label_of(c) for c in children)
                        entry = memo.get((element_id, child_bag))
                        if entry is None:
                            pending[element_id] = HJPoint(element_id, child_bag)
                            is_blocked = True
                        else:
                            used[(element_id, child_bag)] = entry
                            deliveries.append(("and-of " + ",".join(children), entry.label))
                    else:
                        deliveries.append(("and-of " + ",".join(children), combined.label))

            means = evidence.means.get(element_id, [])
            if means and not is_blocked:
                statuses = [status_of(s) for s in means]
                if "blocked" in statuses:
                    is_blocked = True
                else:
                    labelled = [s for s in means if status_of(s) != "unlabeled"]
                    if labelled:
                        combined = max_label([label_of(s) for s in labelled])
                        if combined.ambiguous:
                            means_bag = canonical_bag(label_of(s) for s in labelled)
                            entry = memo.get((element_id, means_bag))
                            if entry is None:
                                pending[element_id] = HJPoint(element_id, means_bag)
                                is_blocked = True
                            else:
                                used[(element_id, means_bag)] = entry
                                deliveries.append(
                                    ("means-end " + ",".join(labelled), entry.label)
                                )
                        else:
                            deliveries.append(
                                ("means-end " + ",".join(labelled), combined.label)
                            )

            for source, origin in evidence.copies.get(element_id, []):
                if is_blocked:
                    break
                state = status_of(source)
                if state == "blocked":
                    is_blocked = True
                elif state != "unlabeled":
                    deliveries.append((origin, label_of(source)))

            if not is_blocked:
                for source, polarity in evidence.contribs.get(element_id, []):
                    state = status_of(source)
                    if state == "blocked":
                        is_blocked = True
                        break
                    if state == "unlabeled":
                        continue
                    mapping = HELP_MAP if polarity is Polarity.HELP else HURT_MAP
                    deliveries.append(
                        (f"{polarity.value} {source}", mapping[label_of(source)])
                    )

            if is_blocked:
                blocked.add(element_id)
                continue
            if not deliveries:
                continue

            label, method, bag = _combine(element_id, deliveries, memo)
            if label is None:
                pending[element_id] = HJPoint(element_id, bag)
                blocked.add(element_id)
                continue
            if method.startswith("judgment"):
                entry = memo[(element_id, bag)]
                used[(element_id, bag)] = entry
            labels[element_id] = label
            audit[element_id] = AuditStep(element_id, tuple(deliveries), bag, method, label)

        if labels == previous:
            break
        previous = dict(labels)
    else:
        if not is_dag:
            changed = sorted(
                set(labels) ^ set(previous or {})
                | {k for k in labels if previous and previous.get(k) != labels[k]}
            )
            raise NonConvergentError(changed or sorted(evidence.feeds))

    # Pending points downstream of other pending points are consequences,
    # not questions the analyst can answer yet; blocked covers them.
    unlabeled = tuple(
        sorted(
            e.id
            for e in model.elements
            if e.id not in labels and e.id not in blocked
        )
    )
    ordered_used = tuple(
        used[k] for k in sorted(used, key=lambda k: (k[0], [l.value for l in k[1]]))
    )
    result_pending = tuple(pending[k] for k in sorted(pending))
    return EvaluationResult(
        status="ok" if not result_pending else "unresolved-judgments",
        final_labels=dict(sorted(labels.items())),
        judgments_used=ordered_used,
        pending=result_pending,
        unlabeled=unlabeled,
        blocked=tuple(sorted(blocked)),
        audit=tuple(audit[k] for k in sorted(audit)),
    )


def propagate_forward(
    model: GoalModel,
    scenario: Scenario,
    judgments: JudgmentTable | None = None,
    resolver: Resolver | None = None,
    max_sweeps: int = 100,
) -> EvaluationResult:
    """Evaluate a scenario; deterministic given the same judgments.

    With a resolver, unanswered judgment points are put to it one at a time
    (in evidence order) and the evaluation re-runs with each answer
    memoized, so later questions always show settled evidence.
    """
    memo: dict[tuple[str, Bag], JudgmentEntry] = {}
    if judgments is not None:
        for entry in judgments.entries():
            memo[(entry.element, entry.bag)] = entry

    while True:
        result = _fixpoint(model, scenario, memo, max_sweeps)
        if not result.pending or resolver is None:
            return result
        point = result.pending[0]
        answer = resolver(point)
        if answer is None:
            return result
        memo[(point.element, point.bag)] = JudgmentEntry(
            point.element, point.bag, answer, provenance="interactive"
        )


class TooManyDecisionPointsError(ValueError):
    pass


@dataclass(frozen=True)
class SkippedAssignment:
    scenario: Scenario
    pending: tuple[HJPoint, ...]


@dataclass(frozen=True)
class BackwardSearchResult:
    scenarios: tuple[Scenario, ...]
    skipped: tuple[SkippedAssignment, ...]


def backward_search(
    model: GoalModel,
    target: str,
    desired: QualLabel,
    judgments: JudgmentTable | None = None,
    base: Scenario | None = None,
    guard: int = 20,
) -> BackwardSearchResult:
    """All {S, D} decision assignments whose forward run hits the target.

    ``base`` supplies fixed environment labels (non-decision leaves); the
    enumerated assignment overrides it on the decision points.  Assignments
    that stall on unanswered judgments are reported as skipped rather than
    silently dropped.
    """
    model.element(target)
    points = decision_points(model)
    if not points:
        raise ValueError("model has no decision points to search over")
    if len(points) > guard:
        raise TooManyDecisionPointsError(
            f"too-many-decision-points: {len(points)} > {guard}"
        )

    kept: list[Scenario] = []
    skipped: list[SkippedAssignment] = []
    for combo in itertools.product((QualLabel.D, QualLabel.S), repeat=len(points)):
        initial = dict(base.initial_labels) if base else {}
        initial.update(dict(zip(points, combo)))
        name = ",".join(f"{p}={l.value}" for p, l in zip(points, combo))
        scenario = Scenario(name, initial)
        result = propagate_forward(model, scenario, judgments)
        if not result.ok:
            skipped.append(SkippedAssignment(scenario, result.pending))
        elif result.final_labels.get(target) == desired:
            kept.append(scenario)

    kept.sort(key=lambda s: s.name)
    return BackwardSearchResult(tuple(kept), tuple(skipped))
