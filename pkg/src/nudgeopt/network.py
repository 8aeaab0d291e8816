"""Directed follower networks with per-edge share rates and node opinions.

Edge direction convention: an edge ``(source, target, rate)`` means that
``target`` follows ``source``, i.e. content posted by ``source`` reaches
``target`` at ``rate`` posts per unit time.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

__all__ = [
    "Network",
    "load_network",
    "save_network",
    "path_network",
    "top_out_degree",
    "sample_induced_subgraph",
]


@dataclass
class Network:
    """Immutable directed follower graph with dense integer node ids 0..n-1.

    ``labels`` keeps the original node identifiers when ids were interned
    from a file or carried over from a subgraph sample; ``labels[i]`` is the
    original name of dense node ``i``.
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    rate: np.ndarray
    initial_opinions: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        self.src = np.ascontiguousarray(self.src, dtype=np.int64)
        self.dst = np.ascontiguousarray(self.dst, dtype=np.int64)
        self.rate = np.ascontiguousarray(self.rate, dtype=np.float64)
        self.initial_opinions = np.ascontiguousarray(self.initial_opinions, dtype=np.float64)
        self._validate()
        for arr in (self.src, self.dst, self.rate, self.initial_opinions):
            arr.setflags(write=False)

    def _validate(self):
        if self.n < 0:
            raise ValueError("node count must be nonnegative")
        if not (self.src.shape == self.dst.shape == self.rate.shape):
            raise ValueError("edge arrays must have identical shapes")
        if self.initial_opinions.shape != (self.n,):
            raise ValueError(
                f"expected {self.n} initial opinions, got {self.initial_opinions.shape}"
            )
        if self.num_edges:
            lo = min(self.src.min(), self.dst.min())
            hi = max(self.src.max(), self.dst.max())
            if lo < 0 or hi >= self.n:
                raise ValueError("edge references a node outside 0..n-1")
            loops = self.src == self.dst
            if loops.any():
                i = int(np.flatnonzero(loops)[0])
                raise ValueError(f"self-loop on node {self.src[i]}")
            pairs = set()
            for s, d in zip(self.src.tolist(), self.dst.tolist()):
                if (s, d) in pairs:
                    raise ValueError(f"duplicate edge ({s}, {d})")
                pairs.add((s, d))
            if (self.rate < 0).any():
                raise ValueError("edge rates must be nonnegative")
        if self.n and ((self.initial_opinions < 0) | (self.initial_opinions > 1)).any():
            bad = int(np.flatnonzero((self.initial_opinions < 0) | (self.initial_opinions > 1))[0])
            raise ValueError(
                f"initial opinion of node {bad} is {self.initial_opinions[bad]}, outside [0, 1]"
            )
        if self.labels is not None and len(self.labels) != self.n:
            raise ValueError("labels must have one entry per node")

    @property
    def num_edges(self) -> int:
        return int(self.src.shape[0])

    def out_degree(self) -> np.ndarray:
        """Follower count per node (number of outgoing edges)."""
        return np.bincount(self.src, minlength=self.n)

    @classmethod
    def from_edges(cls, n, edges, initial_opinions, labels=None) -> "Network":
        """Build from an iterable of (source, target, rate) triples."""
        edges = list(edges)
        src = np.array([e[0] for e in edges], dtype=np.int64)
        dst = np.array([e[1] for e in edges], dtype=np.int64)
        rate = np.array([e[2] for e in edges], dtype=np.float64)
        return cls(n=n, src=src, dst=dst, rate=rate,
                   initial_opinions=np.asarray(initial_opinions, dtype=np.float64),
                   labels=labels)


def _intern(raw_ids: list[str]) -> dict[str, int]:
    """Map raw node identifiers to dense ints; numeric order when possible."""
    unique = sorted(set(raw_ids))
    try:
        unique.sort(key=lambda s: int(s))
    except ValueError:
        pass  # non-numeric ids stay in lexicographic order
    return {name: i for i, name in enumerate(unique)}


def _read_rows(path, expected_cols, header_names):
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            cells = [c.strip() for c in row]
            if lineno == 1 and [c.lower() for c in cells] == header_names:
                continue
            if len(cells) != expected_cols:
                raise ValueError(f"{path}:{lineno}: expected {expected_cols} columns, got {len(cells)}")
            rows.append((lineno, cells))
    return rows


def load_network(edge_file, opinion_file) -> Network:
    """Load a network from an edge CSV and an opinion CSV.

    Edge lines are ``source,target,rate`` (target follows source); opinion
    lines are ``node,opinion``. Either file may start with a header row.
    Nodes are the union of ids appearing in both files; ids are interned to
    dense integers and the original names retained as labels. Edge-referenced
    nodes missing from the opinion file get a mid-scale opinion of 0.5 and a
    logged warning.
    """
    edge_rows = _read_rows(edge_file, 3, ["source", "target", "rate"])
    opin_rows = _read_rows(opinion_file, 2, ["node", "opinion"])

    raw_ids = [c for _, (s, t, _) in edge_rows for c in (s, t)]
    raw_ids += [node for _, (node, _) in opin_rows]
    ids = _intern(raw_ids)
    n = len(ids)

    opinions = np.full(n, np.nan)
    for lineno, (node, val) in opin_rows:
        o = float(val)
        if not 0.0 <= o <= 1.0:
            raise ValueError(f"{opinion_file}:{lineno}: opinion {o} for node {node} outside [0, 1]")
        opinions[ids[node]] = o

    missing = np.isnan(opinions)
    if missing.any():
        names = [name for name, i in ids.items() if missing[i]]
        log.warning(
            "%d node(s) referenced by edges have no opinion entry (%s); defaulting to 0.5",
            len(names), ", ".join(names[:5]),
        )
        opinions[missing] = 0.5

    seen = set()
    src, dst, rate = [], [], []
    for lineno, (s, t, r) in edge_rows:
        pair = (ids[s], ids[t])
        if pair[0] == pair[1]:
            raise ValueError(f"{edge_file}:{lineno}: self-loop on node {s}")
        if pair in seen:
            raise ValueError(f"{edge_file}:{lineno}: duplicate edge ({s}, {t})")
        seen.add(pair)
        src.append(pair[0])
        dst.append(pair[1])
        rate.append(float(r))

    labels = tuple(sorted(ids, key=ids.get))
    return Network(n=n, src=np.array(src, dtype=np.int64), dst=np.array(dst, dtype=np.int64),
                   rate=np.array(rate), initial_opinions=opinions, labels=labels)


def save_network(network: Network, edge_file, opinion_file) -> None:
    """Write the edge and opinion CSVs; round-trips through load_network."""
    labels = network.labels or tuple(str(i) for i in range(network.n))
    with open(edge_file, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["source", "target", "rate"])
        for s, d, r in zip(network.src.tolist(), network.dst.tolist(), network.rate.tolist()):
            w.writerow([labels[s], labels[d], repr(r)])
    with open(opinion_file, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["node", "opinion"])
        for i, o in enumerate(network.initial_opinions.tolist()):
            w.writerow([labels[i], repr(o)])


def path_network(n: int, rate: float) -> Network:
    """Path of n nodes with opinions evenly spaced on [0, 1].

    Consecutive nodes follow each other in both directions, every edge
    carrying the given share rate. A single node gets opinion 0.5.
    """
    if n < 1:
        raise ValueError("path network needs at least one node")
    if n == 1:
        opinions = np.array([0.5])
    else:
        opinions = np.arange(n, dtype=np.float64) / (n - 1)
    src, dst = [], []
    for i in range(n - 1):
        src += [i, i + 1]
        dst += [i + 1, i]
    rates = np.full(len(src), float(rate))
    return Network(n=n, src=np.array(src, dtype=np.int64), dst=np.array(dst, dtype=np.int64),
                   rate=rates, initial_opinions=opinions)


def top_out_degree(network: Network, k: int) -> list[int]:
    """The k nodes with the most followers, descending; ties by ascending id.

    Returns all nodes when k exceeds the node count.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    deg = network.out_degree()
    order = np.lexsort((np.arange(network.n), -deg))
    return order[: min(k, network.n)].tolist()


def sample_induced_subgraph(network: Network, k: int, seed: int) -> Network:
    """Uniform random k-node induced subgraph, deterministic under seed.

    Node ids are re-densified preserving their relative order; the sampled
    original ids (or labels) are retained on the result's ``labels``.
    """
    if not 1 <= k <= network.n:
        raise ValueError(f"sample size {k} outside 1..{network.n}")
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(network.n, size=k, replace=False))
    new_id = {int(old): i for i, old in enumerate(keep)}
    mask = np.isin(network.src, keep) & np.isin(network.dst, keep)
    src = np.array([new_id[int(s)] for s in network.src[mask]], dtype=np.int64)
    dst = np.array([new_id[int(d)] for d in network.dst[mask]], dtype=np.int64)
    old_labels = network.labels or tuple(str(i) for i in range(network.n))
    return Network(
        n=k, src=src, dst=dst, rate=network.rate[mask].copy(),
        initial_opinions=network.initial_opinions[keep].copy(),
        labels=tuple(old_labels[int(i)] for i in keep),
    )
