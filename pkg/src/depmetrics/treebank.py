"""Dependency-tree data model and corpus ingestion.

Three input formats are supported:

* CoNLL-U (tab-separated, ``#`` comments, blank-line sentence breaks),
* CaboCha lattice output (``* IDX HEADD ...`` chunk headers, ``EOS``),
* a toolkit-native "canonical" JSONL format, one sentence object per line.

Every sentence is checked for tree well-formedness (exactly one root,
acyclic, fully connected) before it is returned. Parsers either raise on the
first bad sentence (``errors="raise"``, the default) or skip it and record a
:class:`Rejection` (``errors="skip"``), which is what the CLI uses so that a
noisy corpus does not abort a run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Callable, Mapping, Sequence

from .errors import (
    CycleDetected,
    InvalidTree,
    MalformedChunkHeader,
    MalformedLine,
    MissingEOS,
    MultipleRoots,
    NoRoot,
    SelfLoop,
)

FORMATS = ("canonical", "cabocha", "conllu")


@dataclass(frozen=True)
class Node:
    """One token/segment. ``head`` is the 1-based index of its governor; 0 marks the root."""

    index: int
    head: int
    form: str | None = None
    lemma: str | None = None


@dataclass(frozen=True)
class Sentence:
    """An ordered node sequence whose head links form a single rooted tree.

    ``source`` is a provenance tag (file and line range) kept out of
    structural equality concerns; compare ``nodes`` for that.
    """

    id: str
    nodes: tuple[Node, ...]
    source: str = ""

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, index: int) -> Node:
        """Return the node at 1-based position ``index``."""
        return self.nodes[index - 1]

    def heads(self) -> tuple[int, ...]:
        return tuple(n.head for n in self.nodes)

    @property
    def root_index(self) -> int:
        for n in self.nodes:
            if n.head == 0:
                return n.index
        raise NoRoot(f"{self.id}: no root node")

    @classmethod
    def from_heads(
        cls,
        heads: Sequence[int],
        id: str = "",
        forms: Sequence[str | None] | None = None,
        lemmas: Sequence[str | None] | None = None,
        source: str = "",
    ) -> "Sentence":
        """Build a sentence from a head vector (not validated here)."""
        nodes = tuple(
            Node(
                index=i,
                head=h,
                form=forms[i - 1] if forms else None,
                lemma=lemmas[i - 1] if lemmas else None,
            )
            for i, h in enumerate(heads, 1)
        )
        return cls(id=id, nodes=nodes, source=source)


@dataclass(frozen=True)
class Rejection:
    """Why a sentence was dropped during ingestion."""

    source: str
    reason: str
    sentence_id: str | None = None


@dataclass(frozen=True)
class ValencyLexicon:
    """Mapping from predicate lemma to valency class 1..4."""

    entries: Mapping[str, int]

    def __post_init__(self) -> None:
        for lemma, cls in self.entries.items():
            if cls not in (1, 2, 3, 4):
                raise ValueError(f"valency class for {lemma!r} must be 1..4, got {cls}")

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, lemma: str | None) -> int | None:
        if lemma is None:
            return None
        return self.entries.get(lemma)

    @classmethod
    def from_tsv(cls, stream: IO | str | bytes, source: str = "<lexicon>") -> "ValencyLexicon":
        """Load a two-column TSV (lemma, valency class). '#' lines are comments."""
        entries: dict[str, int] = {}
        for lineno, raw in enumerate(_text_lines(stream), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise MalformedLine(f"{source}:{lineno}: expected 2 tab-separated fields")
            try:
                valency = int(fields[1])
            except ValueError:
                raise MalformedLine(f"{source}:{lineno}: non-integer valency {fields[1]!r}") from None
            if valency not in (1, 2, 3, 4):
                raise MalformedLine(f"{source}:{lineno}: valency must be 1..4, got {valency}")
            entries[fields[0]] = valency
        return cls(entries=entries)


def validate_tree(sentence: Sentence) -> Sentence:
    """Check single root, consecutive indices, acyclicity and connectivity.

    Returns the sentence unchanged on success. Every accepted sentence of
    n nodes therefore carries exactly n - 1 dependencies.
    """
    nodes = sentence.nodes
    if not nodes:
        raise InvalidTree(f"{sentence.id or sentence.source}: sentence has no nodes")
    n = len(nodes)
    indices = [node.index for node in nodes]
    if indices != list(range(1, n + 1)):
        raise InvalidTree(f"{sentence.id}: node indices are not consecutive from 1 (got {indices})")
    roots = [node.index for node in nodes if node.head == 0]
    if not roots:
        raise NoRoot(f"{sentence.id}: no node has head 0")
    if len(roots) > 1:
        raise MultipleRoots(f"{sentence.id}: multiple roots at positions {roots}")
    for node in nodes:
        if node.head == node.index:
            raise SelfLoop(f"{sentence.id}: node {node.index} heads itself")
        if node.head != 0 and not 1 <= node.head <= n:
            raise InvalidTree(f"{sentence.id}: node {node.index} head {node.head} out of range 1..{n}")
    # Walk head chains; with one root and no cycles the functional graph is a tree.
    state = [0] * (n + 1)  # 0 unseen, 1 on current chain, 2 settled
    for start in range(1, n + 1):
        if state[start]:
            continue
        chain = []
        v = start
        while True:
            if state[v] == 1:
                raise CycleDetected(f"{sentence.id}: cycle through node {v}")
            if state[v] == 2:
                break
            state[v] = 1
            chain.append(v)
            head = nodes[v - 1].head
            if head == 0:
                break
            v = head
        for u in chain:
            state[u] = 2
    return sentence


def serialize_canonical(sentence: Sentence) -> str:
    """Render one canonical-JSONL line; ``parse_canonical`` inverts it."""
    nodes = []
    for n in sentence.nodes:
        entry: dict[str, object] = {"index": n.index, "head": n.head}
        if n.form is not None:
            entry["form"] = n.form
        if n.lemma is not None:
            entry["lemma"] = n.lemma
        nodes.append(entry)
    return json.dumps({"id": sentence.id, "nodes": nodes}, ensure_ascii=False, sort_keys=True)


# --- shared parser plumbing ----------------------------------------------


def _text_lines(stream: IO | str | bytes) -> list[str]:
    # utf-8-sig tolerates a leading BOM and still rejects non-UTF-8 bytes
    if isinstance(stream, bytes):
        return stream.decode("utf-8-sig").splitlines()
    if isinstance(stream, str):
        return stream.splitlines()
    data = stream.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    return data.splitlines()


def _emit(
    build: Callable[[], Sentence],
    errors: str,
    rejections: list[Rejection] | None,
    source: str,
    sentence_id: str | None,
    out: list[Sentence],
) -> None:
    """Run one sentence builder under the selected error policy."""
    try:
        out.append(build())
    except (MalformedLine, MalformedChunkHeader, MissingEOS, InvalidTree) as exc:
        if errors == "raise":
            raise
        if rejections is not None:
            rejections.append(Rejection(source=source, reason=str(exc), sentence_id=sentence_id))


def _check_error_mode(errors: str) -> None:
    if errors not in ("raise", "skip"):
        raise ValueError(f"errors must be 'raise' or 'skip', got {errors!r}")


# --- CoNLL-U --------------------------------------------------------------


def parse_conllu(
    stream: IO | str | bytes,
    *,
    drop_punct: bool = False,
    source: str = "<conllu>",
    errors: str = "raise",
    rejections: list[Rejection] | None = None,
) -> list[Sentence]:
    """Parse CoNLL-U text into validated sentences.

    Multiword-token ranges (ID with '-') and empty nodes (ID with '.') are
    skipped; the remaining token IDs must already run 1..n, otherwise the
    sentence is rejected. Only ID, FORM, LEMMA, HEAD (and UPOS when
    ``drop_punct`` is set) are consumed; enhanced dependencies are ignored.

    With ``drop_punct``, nodes whose UPOS is PUNCT are removed and the rest
    renumbered; a sentence where a dropped node had dependents is rejected.
    """
    _check_error_mode(errors)
    sentences: list[Sentence] = []
    block: list[tuple[int, str]] = []
    ordinal = 0

    def flush() -> None:
        nonlocal ordinal
        if not block:
            return
        lines = list(block)
        block.clear()
        if all(line.startswith("#") for _, line in lines):
            return  # trailing comment-only block, not a sentence
        ordinal += 1
        span = f"{source}:{lines[0][0]}-{lines[-1][0]}"
        default_id = f"{source}#{ordinal}"
        sent_id = default_id
        for _, line in lines:
            if line.startswith("# sent_id"):
                _, _, value = line.partition("=")
                if value.strip():
                    sent_id = value.strip()
        _emit(
            lambda: _conllu_sentence(lines, sent_id, span, drop_punct),
            errors,
            rejections,
            span,
            sent_id,
            sentences,
        )

    for lineno, raw in enumerate(_text_lines(stream), 1):
        if raw.strip() == "":
            flush()
        else:
            block.append((lineno, raw))
    flush()
    return sentences


def _conllu_sentence(
    lines: list[tuple[int, str]], sent_id: str, span: str, drop_punct: bool
) -> Sentence:
    entries: list[tuple[int, str | None, str | None, int, str]] = []
    for lineno, line in lines:
        if line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) < 8:
            raise MalformedLine(f"line {lineno}: expected >= 8 tab-separated fields, got {len(fields)}")
        raw_id = fields[0]
        if "-" in raw_id or "." in raw_id:
            continue  # multiword-token range / empty node
        try:
            index = int(raw_id)
        except ValueError:
            raise MalformedLine(f"line {lineno}: non-integer ID {raw_id!r}") from None
        try:
            head = int(fields[6])
        except ValueError:
            raise MalformedLine(f"line {lineno}: non-integer HEAD {fields[6]!r}") from None
        form = None if fields[1] == "_" else fields[1]
        lemma = None if fields[2] == "_" else fields[2]
        entries.append((index, form, lemma, head, fields[3]))
    if not entries:
        raise InvalidTree(f"{sent_id}: sentence block has no token lines")
    if [e[0] for e in entries] != list(range(1, len(entries) + 1)):
        raise InvalidTree(f"{sent_id}: token IDs are not consecutive from 1")
    if drop_punct:
        entries = _drop_punct(entries, sent_id)
    nodes = tuple(Node(index=i, head=h, form=f, lemma=le) for i, f, le, h, _ in entries)
    return validate_tree(Sentence(id=sent_id, nodes=nodes, source=span))


def _drop_punct(
    entries: list[tuple[int, str | None, str | None, int, str]], sent_id: str
) -> list[tuple[int, str | None, str | None, int, str]]:
    dropped = {index for index, _, _, _, upos in entries if upos == "PUNCT"}
    if not dropped:
        return entries
    for index, _, _, head, _ in entries:
        if head in dropped:
            raise InvalidTree(f"{sent_id}: dropped punctuation node {head} has dependents")
    kept = [e for e in entries if e[0] not in dropped]
    if not kept:
        raise InvalidTree(f"{sent_id}: no nodes left after dropping punctuation")
    remap = {0: 0}
    for new_index, entry in enumerate(kept, 1):
        remap[entry[0]] = new_index
    return [(remap[i], f, le, remap[h], upos) for i, f, le, h, upos in kept]


# --- CaboCha lattice -------------------------------------------------------


def parse_cabocha(
    stream: IO | str | bytes,
    *,
    source: str = "<cabocha>",
    errors: str = "raise",
    rejections: list[Rejection] | None = None,
) -> list[Sentence]:
    """Parse CaboCha lattice output; each bunsetsu chunk becomes one node.

    Chunk headers look like ``* 3 5D 0/1 1.23``; the second field is the
    0-based chunk index, the third the head chunk index suffixed with 'D'
    (-1D marks the root). Node form is the concatenation of the chunk's
    morpheme surfaces; node lemma is the base form of the chunk's first
    morpheme when the morpheme features carry one. ``EOS`` ends a sentence;
    a stream that ends mid-sentence is rejected with :class:`MissingEOS`.
    """
    _check_error_mode(errors)
    sentences: list[Sentence] = []
    block: list[tuple[int, str]] = []
    ordinal = 0
    lines = _text_lines(stream)

    def flush(end_line: int) -> None:
        nonlocal ordinal
        if not block:
            return  # bare EOS, nothing to parse
        pending = list(block)
        block.clear()
        ordinal += 1
        span = f"{source}:{pending[0][0]}-{end_line}"
        sent_id = f"{source}#{ordinal}"
        _emit(
            lambda: _cabocha_sentence(pending, sent_id, span),
            errors,
            rejections,
            span,
            sent_id,
            sentences,
        )

    for lineno, raw in enumerate(lines, 1):
        if raw.strip() == "":
            continue
        if raw.rstrip() == "EOS":
            flush(lineno)
        else:
            block.append((lineno, raw))

    if block:
        exc = MissingEOS(f"{source}: stream ended inside a sentence (missing EOS)")
        if errors == "raise":
            raise exc
        if rejections is not None:
            rejections.append(
                Rejection(
                    source=f"{source}:{block[0][0]}-{len(lines)}", reason=str(exc), sentence_id=None
                )
            )
    return sentences


def _cabocha_sentence(lines: list[tuple[int, str]], sent_id: str, span: str) -> Sentence:
    chunks: list[tuple[int, list[str], str | None]] = []
    for lineno, raw in lines:
        if raw.startswith("* "):
            parts = raw.split()
            if len(parts) < 3 or not parts[2].endswith("D"):
                raise MalformedChunkHeader(f"line {lineno}: bad chunk header {raw!r}")
            try:
                index = int(parts[1])
                head = int(parts[2][:-1])
            except ValueError:
                raise MalformedChunkHeader(f"line {lineno}: bad chunk header {raw!r}") from None
            if index != len(chunks):
                raise MalformedChunkHeader(
                    f"line {lineno}: chunk index {index} out of sequence (expected {len(chunks)})"
                )
            chunks.append((head, [], None))
        else:
            if not chunks:
                raise MalformedLine(f"line {lineno}: morpheme line before any chunk header")
            head, surfaces, lemma = chunks[-1]
            surface, _, feature_str = raw.partition("\t")
            surfaces.append(surface)
            if lemma is None and feature_str:
                features = feature_str.split(",")
                if len(features) > 6 and features[6] not in ("*", ""):
                    chunks[-1] = (head, surfaces, features[6])
    nodes = tuple(
        Node(
            index=pos + 1,
            head=0 if head == -1 else head + 1,
            form="".join(surfaces),
            lemma=lemma,
        )
        for pos, (head, surfaces, lemma) in enumerate(chunks)
    )
    return validate_tree(Sentence(id=sent_id, nodes=nodes, source=span))


# --- canonical JSONL -------------------------------------------------------


def parse_canonical(
    stream: IO | str | bytes,
    *,
    source: str = "<canonical>",
    errors: str = "raise",
    rejections: list[Rejection] | None = None,
) -> list[Sentence]:
    """Parse the toolkit's JSONL format: one sentence object per line.

    Each line is ``{"id": str, "nodes": [{"index": int, "head": int,
    "form"?: str, "lemma"?: str}, ...]}``. Blank lines and lines starting
    with '#' (used for run metadata by the generator) are skipped.
    """
    _check_error_mode(errors)
    sentences: list[Sentence] = []
    for lineno, raw in enumerate(_text_lines(stream), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        span = f"{source}:{lineno}"
        _emit(
            lambda: _canonical_sentence(line, lineno, span),
            errors,
            rejections,
            span,
            None,
            sentences,
        )
    return sentences


def _canonical_sentence(line: str, lineno: int, span: str) -> Sentence:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedLine(f"line {lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(obj, dict) or "id" not in obj or "nodes" not in obj:
        raise MalformedLine(f"line {lineno}: expected an object with 'id' and 'nodes'")
    if not isinstance(obj["nodes"], list):
        raise MalformedLine(f"line {lineno}: 'nodes' must be a list")
    nodes = []
    for entry in obj["nodes"]:
        if not isinstance(entry, dict):
            raise MalformedLine(f"line {lineno}: node entries must be objects")
        try:
            index = int(entry["index"])
            head = int(entry["head"])
        except (KeyError, TypeError, ValueError):
            raise MalformedLine(f"line {lineno}: node needs integer 'index' and 'head'") from None
        nodes.append(Node(index=index, head=head, form=entry.get("form"), lemma=entry.get("lemma")))
    return validate_tree(Sentence(id=str(obj["id"]), nodes=tuple(nodes), source=span))


# --- dispatch --------------------------------------------------------------

_PARSERS = {
    "conllu": parse_conllu,
    "cabocha": parse_cabocha,
    "canonical": parse_canonical,
}


def parse(
    stream: IO | str | bytes,
    fmt: str,
    *,
    source: str | None = None,
    errors: str = "raise",
    rejections: list[Rejection] | None = None,
    drop_punct: bool = False,
) -> list[Sentence]:
    """Parse ``stream`` in the named format ('conllu', 'cabocha', 'canonical')."""
    if fmt not in _PARSERS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    kwargs: dict[str, object] = {"errors": errors, "rejections": rejections}
    if source is not None:
        kwargs["source"] = source
    if fmt == "conllu":
        kwargs["drop_punct"] = drop_punct
    return _PARSERS[fmt](stream, **kwargs)  # type: ignore[arg-type]
