"""Typed goal layer: actors, intentional elements, and links between them.

A model is assembled by a single-owner ``ModelBuilder`` and then frozen;
validated models are immutable and safe to share across sessions.  Link
direction conventions:

* decomposition / means-end: source is the child or means, target is the
  parent or end (evidence flows source -> target);
* contribution: source contributes to the target softgoal;
* dependency: source is the depender, target is the dependee, and the
  ``dependum`` field names the element depended upon (evidence flows
  dependee -> dependum -> depender).

The dependum is an attribute of the link, not an endpoint: neighborhood
queries list a dependency only under its depender (outgoing) and its
dependee (incoming).
"""

from __future__ import annotations

import enum
import re
import unicodedata
from dataclasses import dataclass, field


class ActorKind(enum.Enum):
    ACTOR = "actor"
    AGENT = "agent"
    ROLE = "role"
    POSITION = "position"


class ElementKind(enum.Enum):
    GOAL = "goal"
    SOFTGOAL = "softgoal"
    TASK = "task"
    RESOURCE = "resource"


class LinkKind(enum.Enum):
    DECOMPOSITION = "decomposition"
    MEANS_END = "meansEnd"
    CONTRIBUTION = "contribution"
    DEPENDENCY = "dependency"


class Polarity(enum.Enum):
    HELP = "help"
    HURT = "hurt"
    MAKE = "make"
    BREAK = "break"


def slugify(name: str) -> str:
    """Stable id derived from a display name."""
    text = unicodedata.normalize("NFKD", name)
    text = "".join(c for c in text if not unicodedata.combining(c))
    text = re.sub(r"[^A-Za-z0-9]+", "-", text).strip("-").lower()
    return text or "x"


@dataclass(frozen=True)
class ActorNode:
    id: str
    name: str
    kind: ActorKind
    plays: tuple[str, ...] = ()


@dataclass(frozen=True)
class IntentionalElement:
    id: str
    name: str
    kind: ElementKind
    owner: str | None = None
    decision_point: bool = False


@dataclass(frozen=True)
class ModelLink:
    id: str
    kind: LinkKind
    source: str
    target: str
    polarity: Polarity | None = None
    dependum: str | None = None


@dataclass(frozen=True)
class Violation:
    rule: str
    subject: str
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"[{self.severity}] {self.subject}: {self.rule} - {self.message}"


ValidationReport = tuple[Violation, ...]


def errors_only(report: ValidationReport) -> ValidationReport:
    return tuple(v for v in report if v.severity == "error")


@dataclass(frozen=True)
class GoalModel:
    actors: tuple[ActorNode, ...]
    elements: tuple[IntentionalElement, ...]
    links: tuple[ModelLink, ...]

    # Lookup tables, derived once at construction.
    _actor_by_id: dict[str, ActorNode] = field(
        default_factory=dict, repr=False, compare=False
    )
    _element_by_id: dict[str, IntentionalElement] = field(
        default_factory=dict, repr=False, compare=False
    )
    _link_by_id: dict[str, ModelLink] = field(
        default_factory=dict, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "actors", tuple(sorted(self.actors, key=lambda a: a.id))
        )
        object.__setattr__(
            self, "elements", tuple(sorted(self.elements, key=lambda e: e.id))
        )
        object.__setattr__(
            self, "links", tuple(sorted(self.links, key=lambda l: l.id))
        )
        self._actor_by_id.update({a.id: a for a in self.actors})
        self._element_by_id.update({e.id: e for e in self.elements})
        self._link_by_id.update({l.id: l for l in self.links})

    def actor(self, actor_id: str) -> ActorNode:
        return self._actor_by_id[actor_id]

    def element(self, element_id: str) -> IntentionalElement:
        try:
            return self._element_by_id[element_id]
        except KeyError:
            raise UnknownIdError(element_id) from None

    def has_element(self, element_id: str) -> bool:
        return element_id in self._element_by_id

    def element_by_name(self, name: str) -> IntentionalElement:
        matches = [e for e in self.elements if e.name == name]
        if len(matches) != 1:
            raise UnknownIdError(name)
        return matches[0]


class UnknownIdError(KeyError):
    """Raised when an element id (or unique name) does not resolve."""

    def __init__(self, ident: str) -> None:
        super().__init__(ident)
        self.ident = ident

    def __str__(self) -> str:
        return f"unknown element: {self.ident}"


def validate(model: GoalModel) -> ValidationReport:
    """Check every structural invariant; violations are data, not failures.

    The report is deterministic: ordered by subject id, then rule name.
    """
    out: list[Violation] = []

    seen: dict[str, str] = {}
    for kind_name, items in (
        ("actor", model.actors),
        ("element", model.elements),
        ("link", model.links),
    ):
        for item in items:
            if item.id in seen:
                out.append(
                    Violation(
                        "duplicate-id",
                        item.id,
                        f"{kind_name} id also used by a {seen[item.id]}",
                    )
                )
            else:
                seen[item.id] = kind_name

    for actor in model.actors:
        for played in actor.plays:
            target = model._actor_by_id.get(played)
            if target is None:
                out.append(
                    Violation("plays-unknown", actor.id, f"plays unknown actor {played!r}")
                )
            elif actor.kind is not ActorKind.AGENT or target.kind is not ActorKind.ROLE:
                out.append(
                    Violation(
                        "plays-kind",
                        actor.id,
                        f"plays edges must go agent -> role, got "
                        f"{actor.kind.value} -> {target.kind.value}",
                    )
                )

    for element in model.elements:
        if element.owner is not None and element.owner not in model._actor_by_id:
            out.append(
                Violation("unknown-owner", element.id, f"owner {element.owner!r} not declared")
            )

    incoming_structuring: dict[str, set[LinkKind]] = {}
    for link in model.links:
        endpoints = [("source", link.source), ("target", link.target)]
        if link.kind is LinkKind.DEPENDENCY:
            endpoints.append(("dependum", link.dependum or ""))
        missing = [role for role, eid in endpoints if eid not in model._element_by_id]
        if missing:
            out.append(
                Violation(
                    "unknown-element",
                    link.id,
                    "unresolved " + ", ".join(missing),
                )
            )
            continue

        if link.kind is LinkKind.CONTRIBUTION:
            if link.polarity is None:
                out.append(Violation("missing-polarity", link.id, "contribution needs help/hurt"))
            elif link.polarity in (Polarity.MAKE, Polarity.BREAK):
                out.append(
                    Violation(
                        "unsupported-polarity",
                        link.id,
                        f"{link.polarity.value} links are parsed but not evaluated; "
                        "use help or hurt",
                    )
                )
            if model.element(link.target).kind is not ElementKind.SOFTGOAL:
                out.append(
                    Violation(
                        "contribution-target-softgoal",
                        link.id,
                        f"contribution targets must be softgoals, "
                        f"{link.target!r} is a {model.element(link.target).kind.value}",
                    )
                )
        elif link.kind in (LinkKind.DECOMPOSITION, LinkKind.MEANS_END):
            src_owner = model.element(link.source).owner
            dst_owner = model.element(link.target).owner
            if src_owner is None or src_owner != dst_owner:
                out.append(
                    Violation(
                        "structuring-same-boundary",
                        link.id,
                        f"{link.kind.value} must stay inside one actor boundary "
                        f"({src_owner!r} vs {dst_owner!r})",
                    )
                )
            incoming_structuring.setdefault(link.target, set()).add(link.kind)
        elif link.kind is LinkKind.DEPENDENCY:
            refs = {link.source, link.target, link.dependum}
            if len(refs) != 3:
                out.append(
                    Violation(
                        "dependency-refs-distinct",
                        link.id,
                        "depender, dependum and dependee must be three distinct elements",
                    )
                )

    for element_id, kinds in incoming_structuring.items():
        if len(kinds) > 1:
            out.append(
                Violation(
                    "mixed-structuring",
                    element_id,
                    "element is both AND-decomposed and means-ends refined",
                )
            )

    for element in model.elements:
        if element.decision_point and element.id in incoming_structuring:
            out.append(
                Violation(
                    "decision-not-leaf",
                    element.id,
                    "decision points must have no incoming decomposition or "
                    "means-end links",
                )
            )

    out.sort(key=lambda v: (v.subject, v.rule))
    return tuple(out)


@dataclass(frozen=True)
class Neighborhood:
    incoming: tuple[ModelLink, ...]
    outgoing: tuple[ModelLink, ...]


def element_neighborhood(model: GoalModel, element_id: str) -> Neighborhood:
    """Links touching an element as an endpoint, split by direction."""
    model.element(element_id)  # raises UnknownIdError
    incoming = tuple(l for l in model.links if l.target == element_id)
    outgoing = tuple(l for l in model.links if l.source == element_id)
    return Neighborhood(incoming, outgoing)


def decision_points(model: GoalModel) -> list[str]:
    """Ids of the analyst-controllable leaves, sorted.

    Elements whose flag contradicts the leaf invariant are excluded here;
    validate() reports them separately.
    """
    structured = {
        l.target
        for l in model.links
        if l.kind in (LinkKind.DECOMPOSITION, LinkKind.MEANS_END)
    }
    return sorted(
        e.id for e in model.elements if e.decision_point and e.id not in structured
    )
