"""Documents, gold standards, and the bundled fixture corpus.

A corpus file is a JSON list of records::

    {"id": "...", "body": "...",
     "gold": {"activities": [{"surface": "...", "index": 0}],
              "participants": ["..."],
              "performs": [[p, a]],
              "follows": [[a1, a2]]}}

The bundled fixture holds the seven evaluation documents plus the two
shot documents used for few-shot prompting.
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import CorpusError

EVALUATION_IDS = ("1.2", "1.3", "3.3", "5.2", "10.1", "10.6", "10.13")
SHOT_IDS = ("2.2", "10.9")


@dataclass(frozen=True)
class Document:
    id: str
    body: str

    @property
    def word_count(self) -> int:
        return len(self.body.split())


@dataclass(frozen=True)
class ActivityPhrase:
    surface: str
    index: int


@dataclass(frozen=True)
class GoldStandard:
    doc_id: str
    activities: tuple[ActivityPhrase, ...]
    participants: tuple[str, ...]
    performs: frozenset[tuple[int, int]]
    follows: frozenset[tuple[int, int]]

    @property
    def activity_surfaces(self) -> list[str]:
        return [a.surface for a in self.activities]

    def validate(self) -> None:
        na, np_ = len(self.activities), len(self.participants)
        for a in self.activities:
            if not a.surface:
                raise CorpusError(f"document {self.doc_id}: empty activity surface")
        for p in self.participants:
            if not p:
                raise CorpusError(f"document {self.doc_id}: empty participant phrase")
        for p, a in self.performs:
            if not (0 <= p < np_ and 0 <= a < na):
                raise CorpusError(
                    f"document {self.doc_id}: performs pair ({p}, {a}) references "
                    f"an undeclared element")
        for src, dst in self.follows:
            if not (0 <= src < na and 0 <= dst < na):
                raise CorpusError(
                    f"document {self.doc_id}: follows pair ({src}, {dst}) references "
                    f"an undeclared activity")
            if src == dst:
                raise CorpusError(
                    f"document {self.doc_id}: follows pair ({src}, {dst}) is reflexive")


@dataclass(frozen=True)
class RawBehaviorGraph:
    """Behavioral annotation before gateway elision: nodes tagged by kind."""

    kinds: dict  # node id -> kind; "activity" or anything else (gateway, condition, ...)
    edges: tuple  # directed (src, dst) node-id pairs

    def validate(self) -> None:
        for src, dst in self.edges:
            if src not in self.kinds or dst not in self.kinds:
                raise CorpusError(f"behavior graph edge ({src}, {dst}) has unknown endpoint")


def derive_follows(graph: RawBehaviorGraph) -> set[tuple[object, object]]:
    """Directly-follows pairs between activity nodes, eliding non-activity nodes.

    (a, b) is emitted iff a directed path a -> ... -> b exists whose interior
    nodes are all non-activity; cycles through non-activity nodes terminate via
    the visited set. The result is irreflexive.
    """
    graph.validate()
    succ = defaultdict(list)
    for src, dst in graph.edges:
        succ[src].append(dst)
    result = set()
    for node, kind in graph.kinds.items():
        if kind != "activity":
            continue
        stack = list(succ[node])
        seen = set()
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            if graph.kinds[cur] == "activity":
                if cur != node:
                    result.add((node, cur))
            else:
                stack.extend(succ[cur])
    return result


def _parse_record(rec: dict) -> tuple[Document, GoldStandard]:
    try:
        doc_id = rec["id"]
        body = rec["body"]
        gold = rec["gold"]
        activities = tuple(
            ActivityPhrase(a["surface"], a["index"]) for a in gold["activities"])
        participants = tuple(gold["participants"])
        performs = frozenset((p, a) for p, a in gold["performs"])
        follows = frozenset((s, d) for s, d in gold["follows"])
    except (KeyError, TypeError) as exc:
        raise CorpusError(f"malformed corpus record: {exc}") from exc
    if not body:
        raise CorpusError(f"document {doc_id}: empty body")
    gs = GoldStandard(doc_id, activities, participants, performs, follows)
    gs.validate()
    return Document(doc_id, body), gs


def load_corpus(path) -> list[tuple[Document, GoldStandard]]:
    """Load and validate a canonical corpus file."""
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus file not found: {path}")
    try:
        records = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"corpus file {path} is not valid JSON: {exc}") from exc
    return _parse_records(records)


def _parse_records(records) -> list[tuple[Document, GoldStandard]]:
    if not isinstance(records, list):
        raise CorpusError("corpus file must hold a JSON list of records")
    out = []
    seen = set()
    for rec in records:
        doc, gs = _parse_record(rec)
        if doc.id in seen:
            raise CorpusError(f"duplicate document id {doc.id}")
        seen.add(doc.id)
        out.append((doc, gs))
    return out


def default_corpus() -> list[tuple[Document, GoldStandard]]:
    """The bundled fixture corpus (seven evaluation documents + two shots)."""
    text = resources.files("pexkit.data").joinpath("corpus.json").read_text("utf-8")
    return _parse_records(json.loads(text))


def corpus_index(entries=None) -> dict[str, tuple[Document, GoldStandard]]:
    if entries is None:
        entries = default_corpus()
    return {doc.id: (doc, gs) for doc, gs in entries}


def shot_documents(entries=None) -> list[tuple[Document, GoldStandard]]:
    """The two few-shot sample documents, in prompt order."""
    index = corpus_index(entries)
    missing = [i for i in SHOT_IDS if i not in index]
    if missing:
        raise CorpusError(f"shot documents missing from corpus: {missing}")
    return [index[i] for i in SHOT_IDS]


def evaluation_documents(entries=None) -> list[tuple[Document, GoldStandard]]:
    """The seven evaluation documents, in fixed report order."""
    index = corpus_index(entries)
    missing = [i for i in EVALUATION_IDS if i not in index]
    if missing:
        raise CorpusError(f"evaluation documents missing from corpus: {missing}")
    return [index[i] for i in EVALUATION_IDS]


def import_raw(path) -> list[dict]:
    """Convert a raw annotation export into canonical corpus records.

    The raw file is a JSON list of records shaped like the canonical format
    except that ``follows`` is replaced by a behavior graph::

        {"id", "body", "gold": {activities, participants, performs},
         "graph": {"nodes": [{"id", "kind", "activity": <index, activity nodes only>}],
                   "edges": [[src, dst]]}}

    The directly-follows relation is derived by eliding non-activity nodes.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"raw annotation file not found: {path}")
    try:
        records = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"raw file {path} is not valid JSON: {exc}") from exc
    out = []
    for rec in records:
        try:
            graph_spec = rec["graph"]
            kinds = {n["id"]: n["kind"] for n in graph_spec["nodes"]}
            act_index = {n["id"]: n["activity"] for n in graph_spec["nodes"]
                         if n["kind"] == "activity"}
            edges = tuple((s, d) for s, d in graph_spec["edges"])
        except (KeyError, TypeError) as exc:
            raise CorpusError(f"malformed raw record: {exc}") from exc
        graph = RawBehaviorGraph(kinds, edges)
        follows = sorted((act_index[a], act_index[b]) for a, b in derive_follows(graph))
        canonical = {
            "id": rec["id"],
            "body": rec["body"],
            "gold": {**rec["gold"], "follows": [list(p) for p in follows]},
        }
        _parse_record(canonical)  # validate before emitting
        out.append(canonical)
    return out
