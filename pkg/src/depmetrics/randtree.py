"""Exhaustive and uniform-random generation of rooted dependency trees.

Rooted labeled trees on n positions are in bijection with (Prüfer sequence,
root) pairs, giving n^(n-1) trees. Enumeration walks every pair; sampling
draws both uniformly, so every rooted tree is equally likely. Generated
sentences feed the same pipeline as parsed corpora (via the canonical JSONL
format) and serve as the brute-force oracle in the test suite.

Sampling is deterministic per (seed, sample index): each sample uses its own
Mersenne Twister stream seeded with the string "<seed>:<index>", which CPython
hashes platform-independently.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from heapq import heapify, heappop, heappush
from typing import Iterator, Sequence

from .errors import ConstraintUnsatisfiable, NTooLarge
from .treebank import Sentence

RNG_NAME = "mersenne-twister/str-seed"
MAX_ENUMERATION_N = 7
CONSTRAINTS = ("chain", "star", "max_root_out_degree")
_MAX_REJECTION_ATTEMPTS = 1_000_000


@dataclass(frozen=True)
class GeneratorConfig:
    """Settings for tree generation.

    ``constraint`` is one of None, "chain", "star" or "max_root_out_degree";
    the last requires ``max_root_out_degree`` between 1 and n - 1 and is
    enforced by rejection sampling.
    """

    n: int
    seed: int = 0
    count: int = 1
    constraint: str | None = None
    max_root_out_degree: int | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.count < 0:
            raise ValueError(f"count must be >= 0, got {self.count}")
        if self.constraint is not None and self.constraint not in CONSTRAINTS:
            raise ValueError(f"unknown constraint {self.constraint!r}; expected one of {CONSTRAINTS}")
        if self.constraint == "max_root_out_degree":
            cap = self.max_root_out_degree
            if cap is None:
                raise ConstraintUnsatisfiable("max_root_out_degree constraint needs a cap value")
            if not 1 <= cap <= self.n - 1:
                raise ConstraintUnsatisfiable(
                    f"root out-degree cap must satisfy 1 <= cap <= n-1, got cap={cap} with n={self.n}"
                )
        elif self.max_root_out_degree is not None:
            raise ValueError("max_root_out_degree is only meaningful with its constraint")


def chain_heads(n: int) -> tuple[int, ...]:
    """Each node heads to the next; the last node is the root. MDD 1, MHD n/2."""
    return tuple(range(2, n + 1)) + (0,)


def star_heads(n: int) -> tuple[int, ...]:
    """Every node heads to the final node (the root). MDD n/2, MHD 1."""
    return tuple([n] * (n - 1)) + (0,)


def _prufer_edges(seq: Sequence[int], n: int) -> list[tuple[int, int]]:
    """Decode a Prüfer sequence over labels 1..n into the tree's edge list."""
    degree = [1] * (n + 1)
    for v in seq:
        degree[v] += 1
    leaves = [v for v in range(1, n + 1) if degree[v] == 1]
    heapify(leaves)
    edges = []
    for v in seq:
        leaf = heappop(leaves)
        edges.append((leaf, v))
        degree[v] -= 1
        if degree[v] == 1:
            heappush(leaves, v)
    last = heappop(leaves)
    edges.append((last, heappop(leaves)))
    return edges


def _orient(edges: Sequence[tuple[int, int]], n: int, root: int) -> tuple[int, ...]:
    """Turn an undirected tree into a head vector by pointing edges at ``root``."""
    adjacency: list[list[int]] = [[] for _ in range(n + 1)]
    for u, v in edges:
        adjacency[u].append(v)
        adjacency[v].append(u)
    heads = [0] * (n + 1)
    stack = [root]
    seen = [False] * (n + 1)
    seen[root] = True
    while stack:
        parent = stack.pop()
        for child in adjacency[parent]:
            if not seen[child]:
                seen[child] = True
                heads[child] = parent
                stack.append(child)
    return tuple(heads[1:])


def enumerate_trees(n: int) -> Iterator[Sentence]:
    """Yield every rooted labeled tree on positions 1..n exactly once.

    There are n^(n-1) of them, which is why n is capped at 7.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > MAX_ENUMERATION_N:
        raise NTooLarge(f"enumeration is limited to n <= {MAX_ENUMERATION_N}, got {n}")
    counter = 0
    if n == 1:
        yield Sentence.from_heads((0,), id="enum1-0")
        return
    seq = [1] * (n - 2)
    while True:
        edges = _prufer_edges(seq, n)
        for root in range(1, n + 1):
            sent = Sentence.from_heads(_orient(edges, n, root), id=f"enum{n}-{counter}")
            counter += 1
            yield sent
        # odometer increment over labels 1..n
        pos = len(seq) - 1
        while pos >= 0 and seq[pos] == n:
            seq[pos] = 1
            pos -= 1
        if pos < 0:
            return
        seq[pos] += 1


def _root_out_degree(heads: Sequence[int]) -> int:
    root = heads.index(0) + 1
    return sum(1 for h in heads if h == root)


def random_tree(config: GeneratorConfig, index: int = 0) -> Sentence:
    """Draw the ``index``-th tree of the configured stream.

    Unconstrained draws are uniform over rooted labeled trees on n nodes.
    The chain/star constraints are deterministic shapes; the root out-degree
    cap rejection-samples the uniform distribution.
    """
    n = config.n
    sent_id = f"rand-n{n}-s{config.seed}-{index}"
    if config.constraint == "chain":
        return Sentence.from_heads(chain_heads(n), id=sent_id)
    if config.constraint == "star":
        return Sentence.from_heads(star_heads(n), id=sent_id)
    if n == 1:
        return Sentence.from_heads((0,), id=sent_id)
    rng = random.Random(f"{config.seed}:{index}")
    cap = config.max_root_out_degree if config.constraint == "max_root_out_degree" else None
    for _ in range(_MAX_REJECTION_ATTEMPTS):
        seq = [rng.randint(1, n) for _ in range(n - 2)]
        root = rng.randint(1, n)
        heads = _orient(_prufer_edges(seq, n), n, root)
        if cap is None or _root_out_degree(heads) <= cap:
            return Sentence.from_heads(heads, id=sent_id)
    raise ConstraintUnsatisfiable(
        f"gave up after {_MAX_REJECTION_ATTEMPTS} draws with cap {cap} at n={n}"
    )


def generate(config: GeneratorConfig) -> Iterator[Sentence]:
    """Yield ``config.count`` trees, at sample indices 0..count-1."""
    for index in range(config.count):
        yield random_tree(config, index)
