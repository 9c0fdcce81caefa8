"""Textual format for two-layer models (``.gnet`` files).

The format is line-oriented and diffable.  A document may carry any subset
of: actor blocks with their intentional elements, boundary-free elements,
links, one ``net`` block, ``bind`` entries, a ``trigger``, named
``scenario`` blocks, and judgment tables (either bare ``judgment`` lines,
shared by all scenarios, or ``judgments "name" { ... }`` sections scoped to
one scenario).

    # comment
    actor "OSN" {
        task "Maintain desire to use OSN"
        softgoal "Encourage dynamics"
    }
    agent "User A" plays "Generator", "Receiver"
    "Encourage dynamics" and-of "Maintain desire to use OSN"
    "Decide to notify" helps "Generate more content"
    depend "Get user information" --("User information": resource)--> "Gather user information"
    net {
        place p1 "Gather original ET"
        trans t0
        arc p1 -> t0
        arc t0 -> p2 [weight 1]
        marking { p1: 1 }
    }
    bind p12 => softgoal "Generate more content"
    bind p15 => softgoal "Mitigate information overload" polarity hurt
    trigger task "Gather original ETI"
    scenario "reply" { "React to user's ETI" = S }
    judgments "reply" { judgment "Encourage dynamics" given {PD, PS, PS} => S }

Elements may be referenced by quoted display name (must be unique) or by
bare id.  Ids default to slugified names; ``id my-id`` overrides.
Statement separators (``;``) are optional.  Arc weights default to 1.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .goalmodel import (
    ActorKind,
    ActorNode,
    ElementKind,
    GoalModel,
    IntentionalElement,
    LinkKind,
    ModelLink,
    Polarity,
    slugify,
)
from .labels import QualLabel
from .layering import BindingEntry, LayerBinding
from .petri import Arc, Marking, NetDefinitionError, PetriNet, Place
from .reasoning import JudgmentEntry, JudgmentSet, Scenario, canonical_bag


@dataclass(frozen=True)
class SourceDocument:
    text: str
    origin: str = "<memory>"


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    length: int


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str  # error | warning
    message: str
    span: Span

    def __str__(self) -> str:
        return f"{self.span.line}:{self.span.column}: {self.severity}: {self.message}"


@dataclass
class TwoLayerModel:
    goal: GoalModel
    net: PetriNet | None = None
    initial_marking: Marking | None = None
    binding: LayerBinding = field(default_factory=LayerBinding)
    scenarios: dict[str, Scenario] = field(default_factory=dict)
    judgments: JudgmentSet = field(default_factory=JudgmentSet)


def model_equal(a: TwoLayerModel, b: TwoLayerModel) -> bool:
    """Structural equality over every collection of the model."""
    if (a.goal.actors, a.goal.elements, a.goal.links) != (
        b.goal.actors,
        b.goal.elements,
        b.goal.links,
    ):
        return False
    if (a.net is None) != (b.net is None):
        return False
    if a.net is not None and b.net is not None:
        if (a.net.places, a.net.transitions, a.net.arcs) != (
            b.net.places,
            b.net.transitions,
            b.net.arcs,
        ):
            return False
    if a.initial_marking != b.initial_marking:
        return False
    if a.binding != b.binding:
        return False
    if set(a.scenarios) != set(b.scenarios):
        return False
    for name, scenario in a.scenarios.items():
        if b.scenarios[name].initial_labels != scenario.initial_labels:
            return False
    if a.judgments.shared.entries() != b.judgments.shared.entries():
        return False
    if set(a.judgments.scoped) != set(b.judgments.scoped):
        return False
    for name in a.judgments.scoped:
        if a.judgments.scoped[name].entries() != b.judgments.scoped[name].entries():
            return False
    return True


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<badstring>"[^"\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_](?:[A-Za-z0-9_-]*[A-Za-z0-9_])?)
  | (?P<punct>--\(|\)-->|->|=>|[{}():;,=\[\]])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    type: str  # string | int | ident | punct | eof
    text: str
    line: int
    column: int

    def span(self) -> Span:
        return Span(self.line, self.column, max(1, len(self.text)))


class _LexError(Exception):
    def __init__(self, message: str, span: Span) -> None:
        super().__init__(message)
        self.message = message
        self.span = span


def _lex(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise _LexError(f"unexpected character {text[pos]!r}", Span(line, col, 1))
        kind = m.lastgroup or ""
        raw = m.group(0)
        if kind == "badstring":
            raise _LexError("unterminated string", Span(line, col, len(raw)))
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, raw, line, col))
        newlines = raw.count("\n")
        if newlines:
            line += newlines
            col = len(raw) - raw.rfind("\n")
        else:
            col += len(raw)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


def _unquote(raw: str) -> str:
    body = raw[1:-1]
    return re.sub(r"\\(.)", lambda m: m.group(1), body)


def _quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


# ---------------------------------------------------------------------------
# Parser

_ACTOR_KINDS = {k.value: k for k in ActorKind}
_ELEMENT_KINDS = {k.value: k for k in ElementKind}
_LINK_OPS = {
    "and-of": (LinkKind.DECOMPOSITION, None),
    "means-end": (LinkKind.MEANS_END, None),
    "helps": (LinkKind.CONTRIBUTION, Polarity.HELP),
    "hurts": (LinkKind.CONTRIBUTION, Polarity.HURT),
    "makes": (LinkKind.CONTRIBUTION, Polarity.MAKE),
    "breaks": (LinkKind.CONTRIBUTION, Polarity.BREAK),
}
_BIND_KINDS = set(_ACTOR_KINDS) | set(_ELEMENT_KINDS) | {"element"}


@dataclass
class _Ref:
    text: str
    by_name: bool
    span: Span


class _ParseError(Exception):
    def __init__(self, message: str, span: Span) -> None:
        super().__init__(message)
        self.message = message
        self.span = span


class _Parser:
    def __init__(self, doc: SourceDocument) -> None:
        self.doc = doc
        self.diagnostics: list[ParseDiagnostic] = []
        self.tokens: list[_Token] = []
        self.pos = 0

        self.actors: list[dict] = []
        self.elements: list[dict] = []
        self.links: list[dict] = []
        self.places: list[dict] = []
        self.transitions: list[dict] = []
        self.arcs: list[dict] = []
        self.marking: dict[str, tuple[int, Span]] = {}
        self.has_net = False
        self.binds: list[dict] = []
        self.trigger: dict | None = None
        self.scenarios: list[dict] = []
        self.judgment_blocks: list[dict] = []  # {"scope": str|None, "entries": [...]}

    # -- token helpers ------------------------------------------------------

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        token = self.tokens[self.pos]
        if token.type != "eof":
            self.pos += 1
        return token

    def error(self, message: str, span: Span | None = None) -> _ParseError:
        return _ParseError(message, span or self.peek().span())

    def expect_punct(self, text: str) -> _Token:
        token = self.peek()
        if token.type == "punct" and token.text == text:
            return self.next()
        raise self.error(f"expected {text!r}, found {token.text or 'end of file'!r}")

    def accept_punct(self, text: str) -> bool:
        token = self.peek()
        if token.type == "punct" and token.text == text:
            self.next()
            return True
        return False

    def accept_keyword(self, word: str) -> bool:
        token = self.peek()
        if token.type == "ident" and token.text == word:
            self.next()
            return True
        return False

    def expect_keyword(self, word: str) -> _Token:
        token = self.peek()
        if token.type == "ident" and token.text == word:
            return self.next()
        raise self.error(f"expected {word!r}, found {token.text or 'end of file'!r}")

    def expect_string(self, what: str) -> tuple[str, Span]:
        token = self.peek()
        if token.type == "string":
            self.next()
            return _unquote(token.text), token.span()
        raise self.error(f"expected quoted {what}, found {token.text or 'end of file'!r}")

    def expect_ident(self, what: str) -> tuple[str, Span]:
        token = self.peek()
        if token.type == "ident":
            self.next()
            return token.text, token.span()
        raise self.error(f"expected {what}, found {token.text or 'end of file'!r}")

    def expect_int(self, what: str) -> tuple[int, Span]:
        token = self.peek()
        if token.type == "int":
            self.next()
            return int(token.text), token.span()
        raise self.error(f"expected {what}, found {token.text or 'end of file'!r}")

    def expect_ref(self, what: str) -> _Ref:
        token = self.peek()
        if token.type == "string":
            self.next()
            return _Ref(_unquote(token.text), True, token.span())
        if token.type == "ident":
            self.next()
            return _Ref(token.text, False, token.span())
        raise self.error(f"expected {what} (quoted name or id), "
                         f"found {token.text or 'end of file'!r}")

    def skip_statement(self) -> None:
        """Error recovery: skip to the next line, balancing nothing."""
        bad_line = self.peek().line
        while self.peek().type != "eof" and self.peek().line == bad_line:
            self.next()

    # -- grammar ------------------------------------------------------------

    def parse(self) -> None:
        try:
            self.tokens = _lex(self.doc.text)
        except _LexError as exc:
            self.diagnostics.append(ParseDiagnostic("error", exc.message, exc.span))
            return
        while self.peek().type != "eof":
            try:
                self.statement(top_level=True, owner=None)
            except _ParseError as exc:
                self.diagnostics.append(ParseDiagnostic("error", exc.message, exc.span))
                self.skip_statement()

    def statement(self, top_level: bool, owner: str | None) -> None:
        token = self.peek()
        if token.type == "punct" and token.text == ";":
            self.next()
            return
        if token.type == "ident":
            word = token.text
            if word in _ACTOR_KINDS and top_level:
                self.actor_decl()
                return
            if word in _ELEMENT_KINDS:
                self.element_decl(owner)
                return
            if word == "net" and top_level:
                self.net_block()
                return
            if word == "bind" and top_level:
                self.bind_stmt()
                return
            if word == "trigger" and top_level:
                self.trigger_stmt()
                return
            if word == "depend" and top_level:
                self.depend_stmt()
                return
            if word == "scenario" and top_level:
                self.scenario_block()
                return
            if word == "judgments" and top_level:
                self.judgments_block()
                return
            if word == "judgment" and top_level:
                entry = self.judgment_stmt()
                self.judgment_blocks.append({"scope": None, "entries": [entry]})
                return
        if token.type in ("string", "ident") and top_level:
            self.link_stmt()
            return
        raise self.error(f"unexpected {token.text or 'end of file'!r}")

    def actor_decl(self) -> None:
        kind_token = self.next()
        kind = _ACTOR_KINDS[kind_token.text]
        name, span = self.expect_string("actor name")
        explicit_id = None
        if self.accept_keyword("id"):
            explicit_id, _ = self.expect_ident("actor id")
        plays: list[_Ref] = []
        if self.accept_keyword("plays"):
            plays.append(self.expect_ref("role"))
            while self.accept_punct(","):
                plays.append(self.expect_ref("role"))
        actor_id = explicit_id or slugify(name)
        self.actors.append(
            {"id": actor_id, "name": name, "kind": kind, "plays": plays, "span": span}
        )
        if self.accept_punct("{"):
            while not self.accept_punct("}"):
                if self.peek().type == "eof":
                    raise self.error("unterminated actor block", span)
                self.statement(top_level=False, owner=actor_id)
        self.accept_punct(";")

    def element_decl(self, owner: str | None) -> None:
        kind_token = self.next()
        kind = _ELEMENT_KINDS[kind_token.text]
        name, span = self.expect_string("element name")
        explicit_id = None
        if self.accept_keyword("id"):
            explicit_id, _ = self.expect_ident("element id")
        decision = bool(self.accept_keyword("decision"))
        self.accept_punct(";")
        self.elements.append(
            {
                "id": explicit_id or slugify(name),
                "name": name,
                "kind": kind,
                "owner": owner,
                "decision": decision,
                "span": span,
            }
        )

    def link_stmt(self) -> None:
        source = self.expect_ref("link source")
        op_token = self.peek()
        if op_token.type != "ident" or op_token.text not in _LINK_OPS:
            raise self.error(
                "expected a link operator (" + ", ".join(sorted(_LINK_OPS)) + ")"
            )
        self.next()
        target = self.expect_ref("link target")
        self.accept_punct(";")
        kind, polarity = _LINK_OPS[op_token.text]
        self.links.append(
            {
                "kind": kind,
                "polarity": polarity,
                "source": source,
                "target": target,
                "dependum": None,
                "span": op_token.span(),
            }
        )

    def depend_stmt(self) -> None:
        keyword = self.next()
        source = self.expect_ref("depender")
        self.expect_punct("--(")
        dep_name, dep_span = self.expect_string("dependum name")
        self.expect_punct(":")
        kind_text, kind_span = self.expect_ident("dependum kind")
        if kind_text not in _ELEMENT_KINDS:
            raise self.error(f"unknown dependum kind {kind_text!r}", kind_span)
        self.expect_punct(")-->")
        target = self.expect_ref("dependee")
        self.accept_punct(";")
        self.links.append(
            {
                "kind": LinkKind.DEPENDENCY,
                "polarity": None,
                "source": source,
                "target": target,
                "dependum": (dep_name, _ELEMENT_KINDS[kind_text], dep_span),
                "span": keyword.span(),
            }
        )

    def net_block(self) -> None:
        keyword = self.next()
        if self.has_net:
            raise self.error("only one net block is allowed", keyword.span())
        self.has_net = True
        self.expect_punct("{")
        while not self.accept_punct("}"):
            token = self.peek()
            if token.type == "eof":
                raise self.error("unterminated net block", keyword.span())
            if self.accept_punct(";"):
                continue
            if self.accept_keyword("place"):
                pid, span = self.expect_ident("place id")
                label = ""
                if self.peek().type == "string":
                    label, _ = self.expect_string("place label")
                self.accept_punct(";")
                self.places.append({"id": pid, "label": label, "span": span})
            elif self.accept_keyword("trans"):
                tid, span = self.expect_ident("transition id")
                self.accept_punct(";")
                self.transitions.append({"id": tid, "span": span})
            elif self.accept_keyword("arc"):
                src, span = self.expect_ident("arc source")
                self.expect_punct("->")
                dst, _ = self.expect_ident("arc target")
                weight = 1
                if self.accept_punct("["):
                    self.expect_keyword("weight")
                    weight, _ = self.expect_int("weight")
                    self.expect_punct("]")
                self.accept_punct(";")
                self.arcs.append(
                    {"source": src, "target": dst, "weight": weight, "span": span}
                )
            elif self.accept_keyword("marking"):
                self.expect_punct("{")
                while not self.accept_punct("}"):
                    if self.peek().type == "eof":
                        raise self.error("unterminated marking block", keyword.span())
                    pid, span = self.expect_ident("place id")
                    self.expect_punct(":")
                    count, _ = self.expect_int("token count")
                    self.accept_punct(",")
                    self.accept_punct(";")
                    self.marking[pid] = (count, span)
            else:
                raise self.error(
                    f"expected place, trans, arc or marking, found {token.text!r}"
                )

    def bind_stmt(self) -> None:
        self.next()
        place, span = self.expect_ident("place id")
        self.expect_punct("=>")
        kind_text, kind_span = self.expect_ident("node kind")
        if kind_text not in _BIND_KINDS:
            raise self.error(f"unknown binding kind {kind_text!r}", kind_span)
        node = self.expect_ref("bound node")
        polarity = Polarity.HELP
        if self.accept_keyword("polarity"):
            pol_text, pol_span = self.expect_ident("polarity")
            if pol_text not in ("help", "hurt"):
                raise self.error("polarity must be help or hurt", pol_span)
            polarity = Polarity(pol_text)
        self.accept_punct(";")
        self.binds.append(
            {
                "place": place,
                "kind": kind_text,
                "node": node,
                "polarity": polarity,
                "span": span,
            }
        )

    def trigger_stmt(self) -> None:
        keyword = self.next()
        if self.trigger is not None:
            raise self.error("only one trigger is allowed", keyword.span())
        kind_text, kind_span = self.expect_ident("node kind")
        if kind_text not in _BIND_KINDS:
            raise self.error(f"unknown trigger kind {kind_text!r}", kind_span)
        ref = self.expect_ref("trigger element")
        self.accept_punct(";")
        self.trigger = {"kind": kind_text, "ref": ref, "span": keyword.span()}

    def scenario_block(self) -> None:
        self.next()
        name, span = self.expect_string("scenario name")
        self.expect_punct("{")
        entries: list[tuple[_Ref, QualLabel]] = []
        while not self.accept_punct("}"):
            if self.peek().type == "eof":
                raise self.error("unterminated scenario block", span)
            if self.accept_punct(";"):
                continue
            ref = self.expect_ref("element")
            self.expect_punct("=")
            entries.append((ref, self.label_token()))
            self.accept_punct(";")
        self.scenarios.append({"name": name, "entries": entries, "span": span})

    def label_token(self) -> QualLabel:
        text, span = self.expect_ident("label")
        try:
            return QualLabel(text)
        except ValueError:
            raise self.error(f"unknown label {text!r}", span) from None

    def judgments_block(self) -> None:
        self.next()
        name, span = self.expect_string("scenario name")
        self.expect_punct("{")
        entries = []
        while not self.accept_punct("}"):
            if self.peek().type == "eof":
                raise self.error("unterminated judgments block", span)
            if self.accept_punct(";"):
                continue
            self.expect_keyword("judgment")
            entries.append(self.judgment_stmt(consumed_keyword=True))
        self.judgment_blocks.append({"scope": name, "entries": entries})

    def judgment_stmt(self, consumed_keyword: bool = False) -> dict:
        if not consumed_keyword:
            self.expect_keyword("judgment")
        ref = self.expect_ref("element")
        self.expect_keyword("given")
        self.expect_punct("{")
        bag = [self.label_token()]
        while self.accept_punct(","):
            bag.append(self.label_token())
        self.expect_punct("}")
        self.expect_punct("=>")
        label = self.label_token()
        self.accept_punct(";")
        return {"ref": ref, "bag": bag, "label": label}


# ---------------------------------------------------------------------------
# Reference resolution and model assembly


class _Builder:
    def __init__(self, parser: _Parser) -> None:
        self.p = parser
        self.diagnostics = parser.diagnostics

    def err(self, message: str, span: Span) -> None:
        self.diagnostics.append(ParseDiagnostic("error", message, span))

    def build(self) -> TwoLayerModel | None:
        p = self.p

        actor_ids = {a["id"] for a in p.actors}
        actor_by_name: dict[str, list[str]] = {}
        for a in p.actors:
            actor_by_name.setdefault(a["name"], []).append(a["id"])

        elements: list[IntentionalElement] = []
        element_ids: set[str] = set()
        element_by_name: dict[str, list[str]] = {}
        for e in p.elements:
            elements.append(
                IntentionalElement(
                    e["id"], e["name"], e["kind"], e["owner"], e["decision"]
                )
            )
            element_ids.add(e["id"])
            element_by_name.setdefault(e["name"], []).append(e["id"])

        def resolve_element(ref: _Ref) -> str | None:
            if not ref.by_name:
                if ref.text in element_ids:
                    return ref.text
                self.err(f"unknown-element: no element with id {ref.text!r}", ref.span)
                return None
            hits = element_by_name.get(ref.text, [])
            if len(hits) == 1:
                return hits[0]
            if not hits:
                self.err(f"unknown-element: no element named {ref.text!r}", ref.span)
            else:
                self.err(
                    f"ambiguous-name: {ref.text!r} matches {', '.join(sorted(hits))}",
                    ref.span,
                )
            return None

        def resolve_actor(ref: _Ref) -> str | None:
            if not ref.by_name:
                if ref.text in actor_ids:
                    return ref.text
                self.err(f"unknown-actor: no actor with id {ref.text!r}", ref.span)
                return None
            hits = actor_by_name.get(ref.text, [])
            if len(hits) == 1:
                return hits[0]
            if not hits:
                self.err(f"unknown-actor: no actor named {ref.text!r}", ref.span)
            else:
                self.err(f"ambiguous-name: {ref.text!r}", ref.span)
            return None

        actors: list[ActorNode] = []
        for a in p.actors:
            plays = []
            for ref in a["plays"]:
                resolved = resolve_actor(ref)
                if resolved is not None:
                    plays.append(resolved)
            actors.append(ActorNode(a["id"], a["name"], a["kind"], tuple(plays)))

        links: list[ModelLink] = []
        link_ids: set[str] = set()
        for raw in p.links:
            source = resolve_element(raw["source"])
            target = resolve_element(raw["target"])
            dependum_id: str | None = None
            if raw["dependum"] is not None:
                dep_name, dep_kind, dep_span = raw["dependum"]
                hits = element_by_name.get(dep_name, [])
                if len(hits) > 1:
                    self.err(f"ambiguous-name: {dep_name!r}", dep_span)
                    continue
                if hits:
                    dependum_id = hits[0]
                    existing = next(e for e in elements if e.id == dependum_id)
                    if existing.kind is not dep_kind:
                        self.err(
                            f"dependum-kind-mismatch: {dep_name!r} is a "
                            f"{existing.kind.value}, not a {dep_kind.value}",
                            dep_span,
                        )
                        continue
                else:
                    dependum_id = slugify(dep_name)
                    if dependum_id in element_ids:
                        self.err(
                            f"duplicate-id: dependum {dep_name!r} collides with "
                            f"element id {dependum_id!r}",
                            dep_span,
                        )
                        continue
                    elements.append(
                        IntentionalElement(dependum_id, dep_name, dep_kind, None, False)
                    )
                    element_ids.add(dependum_id)
                    element_by_name.setdefault(dep_name, []).append(dependum_id)
            if source is None or target is None:
                continue
            op = {
                LinkKind.DECOMPOSITION: "and-of",
                LinkKind.MEANS_END: "means-end",
                LinkKind.DEPENDENCY: "depend",
            }.get(raw["kind"]) or raw["polarity"].value
            link_id = f"{source}.{op}.{target}"
            if link_id in link_ids:
                self.err(f"duplicate-link: {link_id}", raw["span"])
                continue
            link_ids.add(link_id)
            links.append(
                ModelLink(
                    link_id,
                    raw["kind"],
                    source,
                    target,
                    raw["polarity"],
                    dependum_id,
                )
            )

        net: PetriNet | None = None
        marking: Marking | None = None
        if p.has_net:
            place_ids = [pl["id"] for pl in p.places]
            trans_ids = [t["id"] for t in p.transitions]
            known = set(place_ids) | set(trans_ids)
            arcs = []
            trans_set = set(trans_ids)
            for arc in p.arcs:
                missing = [x for x in (arc["source"], arc["target"]) if x not in known]
                for node in missing:
                    other = arc["target"] if node == arc["source"] else arc["source"]
                    # An arc joins one place and one transition; whichever
                    # side the known endpoint is on fixes the other's kind.
                    label = "unknown-place" if other in trans_set else "unknown-transition"
                    self.err(f"{label}: {node!r} is not declared in the net", arc["span"])
                if not missing:
                    arcs.append(Arc(arc["source"], arc["target"], arc["weight"]))
            for pid, (_, span) in p.marking.items():
                if pid not in place_ids:
                    self.err(f"unknown-place: {pid!r} in marking", span)
            if not self.has_errors():
                try:
                    net = PetriNet(
                        tuple(Place(pl["id"], pl["label"]) for pl in p.places),
                        tuple(trans_ids),
                        tuple(sorted(arcs, key=lambda a: (a.source, a.target))),
                    )
                except NetDefinitionError as exc:
                    self.err(str(exc), Span(1, 1, 1))
                if net is not None:
                    marking = tuple(
                        p.marking.get(pid, (0, None))[0] for pid in place_ids
                    )

        entries: list[BindingEntry] = []
        for raw in p.binds:
            if net is None or all(pl.id != raw["place"] for pl in net.places):
                self.err(f"unknown-place: {raw['place']!r} in bind", raw["span"])
                continue
            pool = resolve_actor if raw["kind"] in _ACTOR_KINDS else resolve_element
            node = pool(raw["node"])
            if node is None:
                continue
            declared = None if raw["kind"] == "element" else raw["kind"]
            entries.append(BindingEntry(raw["place"], node, declared, raw["polarity"]))
        entries.sort(key=lambda e: e.place)

        trigger_id: str | None = None
        if p.trigger is not None:
            pool = (
                resolve_actor
                if p.trigger["kind"] in _ACTOR_KINDS
                else resolve_element
            )
            trigger_id = pool(p.trigger["ref"])

        scenarios: dict[str, Scenario] = {}
        for raw in p.scenarios:
            if raw["name"] in scenarios:
                self.err(f"duplicate-scenario: {raw['name']!r}", raw["span"])
                continue
            labels: dict[str, QualLabel] = {}
            for ref, label in raw["entries"]:
                element = resolve_element(ref)
                if element is not None:
                    labels[element] = label
            scenarios[raw["name"]] = Scenario(raw["name"], labels)

        judgments = JudgmentSet()
        for block in p.judgment_blocks:
            table = (
                judgments.shared
                if block["scope"] is None
                else judgments.scope(block["scope"])
            )
            for raw in block["entries"]:
                element = resolve_element(raw["ref"])
                if element is None:
                    continue
                table.add(
                    JudgmentEntry(
                        element, canonical_bag(raw["bag"]), raw["label"], "file"
                    )
                )

        if self.has_errors():
            return None
        return TwoLayerModel(
            goal=GoalModel(tuple(actors), tuple(elements), tuple(links)),
            net=net,
            initial_marking=marking,
            binding=LayerBinding(tuple(entries), trigger_id),
            scenarios=scenarios,
            judgments=judgments,
        )

    def has_errors(self) -> bool:
        return any(d.severity == "error" for d in self.diagnostics)


def parse(doc: SourceDocument) -> tuple[TwoLayerModel | None, list[ParseDiagnostic]]:
    """Parse a document; no model is returned when any error is reported."""
    parser = _Parser(doc)
    parser.parse()
    if any(d.severity == "error" for d in parser.diagnostics):
        return None, parser.diagnostics
    model = _Builder(parser).build()
    return model, parser.diagnostics


def parse_text(text: str, origin: str = "<memory>") -> tuple[TwoLayerModel | None, list[ParseDiagnostic]]:
    return parse(SourceDocument(text, origin))


# ---------------------------------------------------------------------------
# Serialization


def _element_line(element: IntentionalElement, indent: str) -> str:
    parts = [indent + element.kind.value, _quote(element.name)]
    if element.id != slugify(element.name):
        parts += ["id", element.id]
    if element.decision_point:
        parts.append("decision")
    return " ".join(parts)


def serialize(model: TwoLayerModel) -> SourceDocument:
    """Canonical text for a validated model; parse(serialize(m)) == m."""
    goal = model.goal
    lines: list[str] = ["# gorenet model (canonical form)"]

    dependums = {
        l.dependum for l in goal.links if l.kind is LinkKind.DEPENDENCY and l.dependum
    }
    owned: dict[str, list[IntentionalElement]] = {}
    free: list[IntentionalElement] = []
    for element in goal.elements:
        if element.owner is None:
            free.append(element)
        else:
            owned.setdefault(element.owner, []).append(element)

    for actor in goal.actors:
        head = [actor.kind.value, _quote(actor.name)]
        if actor.id != slugify(actor.name):
            head += ["id", actor.id]
        if actor.plays:
            names = [goal.actor(r).name for r in actor.plays]
            head += ["plays", ", ".join(_quote(n) for n in names)]
        body = owned.get(actor.id, [])
        if body:
            lines.append(" ".join(head) + " {")
            for element in body:
                lines.append(_element_line(element, "    "))
            lines.append("}")
        else:
            lines.append(" ".join(head))

    for element in free:
        if (
            element.id in dependums
            and element.id == slugify(element.name)
            and not element.decision_point
        ):
            # Re-created by its depend statement with the same id and kind.
            continue
        lines.append(_element_line(element, ""))

    op_of = {
        LinkKind.DECOMPOSITION: "and-of",
        LinkKind.MEANS_END: "means-end",
    }
    for link in goal.links:
        src = _quote(goal.element(link.source).name)
        dst = _quote(goal.element(link.target).name)
        if link.kind is LinkKind.DEPENDENCY:
            dep = goal.element(link.dependum or "")
            lines.append(
                f"depend {src} --({_quote(dep.name)}: {dep.kind.value})--> {dst}"
            )
        elif link.kind is LinkKind.CONTRIBUTION:
            op = {"help": "helps", "hurt": "hurts", "make": "makes", "break": "breaks"}[
                (link.polarity or Polarity.HELP).value
            ]
            lines.append(f"{src} {op} {dst}")
        else:
            lines.append(f"{src} {op_of[link.kind]} {dst}")

    if model.net is not None:
        lines.append("net {")
        for place in model.net.places:
            label = f" {_quote(place.label)}" if place.label else ""
            lines.append(f"    place {place.id}{label}")
        for tid in model.net.transitions:
            lines.append(f"    trans {tid}")
        for arc in model.net.arcs:
            weight = f" [weight {arc.weight}]" if arc.weight != 1 else ""
            lines.append(f"    arc {arc.source} -> {arc.target}{weight}")
        if model.initial_marking and any(model.initial_marking):
            lines.append("    marking {")
            for place, count in zip(model.net.places, model.initial_marking):
                if count:
                    lines.append(f"        {place.id}: {count}")
            lines.append("    }")
        lines.append("}")

    for entry in model.binding.entries:
        kind = entry.declared_kind or "element"
        if model.goal.has_element(entry.node):
            name = model.goal.element(entry.node).name
        else:
            name = model.goal.actor(entry.node).name
        polarity = (
            f" polarity {entry.polarity.value}"
            if entry.polarity is not Polarity.HELP
            else ""
        )
        lines.append(f"bind {entry.place} => {kind} {_quote(name)}{polarity}")
    if model.binding.trigger is not None:
        if model.goal.has_element(model.binding.trigger):
            node = model.goal.element(model.binding.trigger)
            lines.append(f"trigger {node.kind.value} {_quote(node.name)}")
        else:
            node = model.goal.actor(model.binding.trigger)
            lines.append(f"trigger {node.kind.value} {_quote(node.name)}")

    for name in sorted(model.scenarios):
        scenario = model.scenarios[name]
        lines.append(f"scenario {_quote(name)} {{")
        for element_id in sorted(scenario.initial_labels):
            lines.append(f"    {element_id} = {scenario.initial_labels[element_id].value}")
        lines.append("}")

    def judgment_lines(table, indent: str) -> list[str]:
        out = []
        for entry in table.entries():
            bag = ", ".join(l.value for l in entry.bag)
            out.append(
                f"{indent}judgment {entry.element} given {{{bag}}} => {entry.label.value}"
            )
        return out

    lines.extend(judgment_lines(model.judgments.shared, ""))
    for scope in sorted(model.judgments.scoped):
        lines.append(f"judgments {_quote(scope)} {{")
        lines.extend(judgment_lines(model.judgments.scoped[scope], "    "))
        lines.append("}")

    return SourceDocument("\n".join(lines) + "\n", "<serialized>")
