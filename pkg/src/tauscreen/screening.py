"""Edge and neighborhood screening by thresholding a correlation estimate.

Three threshold rules are supported:

* ``fixed``: one constant cutoff gamma.
* ``rate``: the sample-size-scaled cutoff (2/3) * C1 * n^(-kappa), which keeps
  every sufficiently strong edge with high probability.
* ``fpr``: per-pair cutoffs (pi/2) * omega_hat * z / sqrt(n) with
  z = Phi^{-1}(1 - f / (p(p-1))), built from the jackknife variance estimates,
  which targets an expected false-positive budget of f non-edges.

Edges are kept on strict inequality |corr| > gamma. Node indices are 0-based
in memory and 1-based in the TSV interchange format.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import InvalidInputError, MissingInputError
from .rankcorr import CorrMatrix, JackknifeVarMatrix


@dataclass(frozen=True)
class EdgeSet:
    """An undirected graph on p nodes as a sorted tuple of (j, k) pairs, j < k."""

    p: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.p < 1:
            raise InvalidInputError("node count must be >= 1")
        seen = set()
        for j, k in self.edges:
            if not (0 <= j < k < self.p):
                raise InvalidInputError(f"edge ({j}, {k}) out of range for p={self.p}")
            if (j, k) in seen:
                raise InvalidInputError(f"duplicate edge ({j}, {k})")
            seen.add((j, k))
        object.__setattr__(self, "edges", tuple(sorted(tuple(map(int, e)) for e in self.edges)))

    def __len__(self) -> int:
        return len(self.edges)

    def as_set(self) -> set[tuple[int, int]]:
        return set(self.edges)

    def neighbors(self, j: int) -> set[int]:
        if not 0 <= j < self.p:
            raise InvalidInputError(f"node {j} out of range for p={self.p}")
        out = set()
        for a, b in self.edges:
            if a == j:
                out.add(b)
            elif b == j:
                out.add(a)
        return out


@dataclass(frozen=True)
class Partition:
    """Connected-component labels, 1..k in order of first appearance."""

    p: int
    component_id: tuple[int, ...]

    def __post_init__(self):
        if len(self.component_id) != self.p:
            raise InvalidInputError("component_id length must equal p")
        labels = tuple(int(c) for c in self.component_id)
        k = max(labels) if labels else 0
        if sorted(set(labels)) != list(range(1, k + 1)):
            raise InvalidInputError("component labels must form a contiguous range 1..k")
        object.__setattr__(self, "component_id", labels)

    @property
    def n_components(self) -> int:
        return max(self.component_id)

    def blocks(self) -> list[set[int]]:
        out: dict[int, set[int]] = {}
        for node, label in enumerate(self.component_id):
            out.setdefault(label, set()).add(node)
        return [out[label] for label in sorted(out)]


@dataclass(frozen=True)
class ThresholdSpec:
    """Which threshold rule to apply; exactly one mode is active."""

    mode: str
    gamma: float | None = None
    c1: float | None = None
    kappa: float | None = None
    f: float | None = None
    q: float | None = None

    def __post_init__(self):
        if self.mode == "fixed":
            if self.gamma is None or self.gamma < 0:
                raise InvalidInputError("fixed mode needs gamma >= 0")
        elif self.mode == "rate":
            if self.c1 is None or self.c1 <= 0:
                raise InvalidInputError("rate mode needs C1 > 0")
            if self.kappa is None or not 0 < self.kappa < 0.5:
                raise InvalidInputError("rate mode needs kappa in (0, 1/2)")
        elif self.mode == "fpr":
            has_f = self.f is not None
            has_q = self.q is not None
            if has_f == has_q:
                raise InvalidInputError("fpr mode needs exactly one of f or q")
            if has_f and self.f <= 0:
                raise InvalidInputError("fpr mode needs f > 0")
            if has_q and not 0 < self.q < 1:
                raise InvalidInputError("fpr mode needs q in (0, 1)")
        else:
            raise InvalidInputError(f"unknown threshold mode {self.mode!r}")

    @staticmethod
    def fixed(gamma: float) -> "ThresholdSpec":
        return ThresholdSpec("fixed", gamma=float(gamma))

    @staticmethod
    def rate(c1: float, kappa: float) -> "ThresholdSpec":
        return ThresholdSpec("rate", c1=float(c1), kappa=float(kappa))

    @staticmethod
    def fpr(f: float | None = None, q: float | None = None) -> "ThresholdSpec":
        return ThresholdSpec(
            "fpr",
            f=None if f is None else float(f),
            q=None if q is None else float(q),
        )

    def resolve_f(self, p: int) -> float:
        """False-positive budget f for dimension p.

        When only the rate q is known, f defaults to q * p(p-1)/2, i.e. q is
        interpreted against all unordered pairs. Callers holding the true
        non-edge count should convert q themselves and pass f explicitly.
        """
        if self.mode != "fpr":
            raise InvalidInputError("resolve_f is only meaningful in fpr mode")
        if self.f is not None:
            return self.f
        return self.q * p * (p - 1) / 2.0


def threshold_matrix(spec: ThresholdSpec, n: int, p: int, jack: JackknifeVarMatrix | None = None) -> np.ndarray:
    """Materialize the p x p matrix of per-pair cutoffs for a threshold rule.

    The diagonal is set to 0 and never used (screening only inspects j < k).
    """
    if p < 1 or n < 2:
        raise InvalidInputError("need p >= 1 and n >= 2")
    if spec.mode == "fixed":
        out = np.full((p, p), spec.gamma, dtype=np.float64)
    elif spec.mode == "rate":
        gamma = (2.0 / 3.0) * spec.c1 * float(n) ** (-spec.kappa)
        out = np.full((p, p), gamma, dtype=np.float64)
    else:
        if jack is None:
            raise MissingInputError("fpr mode requires a jackknife variance matrix")
        if jack.dim != p:
            raise InvalidInputError(f"variance matrix is {jack.dim}x{jack.dim}, expected p={p}")
        if n < 3:
            raise InvalidInputError("fpr mode needs n >= 3")
        f = spec.resolve_f(p)
        if not f < p * (p - 1) / 2.0:
            raise InvalidInputError(f"need f < p(p-1)/2, got f={f} with p={p}")
        z = float(ndtri(1.0 - f / (p * (p - 1))))
        omega = np.sqrt(jack.entries)
        if p > 1:
            off = omega[~np.eye(p, dtype=bool)]
            if np.any(off == 0.0):
                warnings.warn(
                    "degenerate pair(s) with zero jackknife variance: "
                    "their threshold is 0 and they are kept whenever |corr| > 0",
                    stacklevel=2,
                )
        out = (np.pi / 2.0) * omega * z / np.sqrt(n)
    np.fill_diagonal(out, 0.0)
    return out


def screen_edges(corr: CorrMatrix, thresholds: np.ndarray) -> EdgeSet:
    """Edges (j, k), j < k, with |corr[j, k]| strictly above thresholds[j, k]."""
    if not isinstance(corr, CorrMatrix):
        raise InvalidInputError("screen_edges expects a CorrMatrix")
    if corr.kind not in ("kendall-sine", "pearson"):
        raise InvalidInputError(f"cannot screen on kind {corr.kind!r}; use kendall-sine or pearson")
    t = np.asarray(thresholds, dtype=np.float64)
    p = corr.dim
    if t.shape != (p, p):
        raise InvalidInputError(f"threshold matrix shape {t.shape} does not match p={p}")
    mask = np.abs(corr.entries) > t
    jj, kk = np.nonzero(np.triu(mask, 1))
    return EdgeSet(p, tuple(zip(jj.tolist(), kk.tolist())))


def screen_neighborhood(corr: CorrMatrix, thresholds: np.ndarray, j: int) -> set[int]:
    """Nodes k != j with |corr[j, k]| strictly above thresholds[j, k]."""
    if not isinstance(corr, CorrMatrix):
        raise InvalidInputError("screen_neighborhood expects a CorrMatrix")
    p = corr.dim
    if not 0 <= j < p:
        raise InvalidInputError(f"node {j} out of range for p={p}")
    t = np.asarray(thresholds, dtype=np.float64)
    if t.shape != (p, p):
        raise InvalidInputError(f"threshold matrix shape {t.shape} does not match p={p}")
    keep = np.abs(corr.entries[j]) > t[j]
    keep[j] = False
    return set(np.flatnonzero(keep).tolist())


class _DisjointSet:
    def __init__(self, size: int):
        self.parent = list(range(size))
        self.rank = [0] * size

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1


def connected_components(e: EdgeSet) -> Partition:
    """Union-find partition of the nodes of ``e`` into connected components."""
    dsu = _DisjointSet(e.p)
    for j, k in e.edges:
        dsu.union(j, k)
    labels = {}
    out = []
    for node in range(e.p):
        root = dsu.find(node)
        if root not in labels:
            labels[root] = len(labels) + 1
        out.append(labels[root])
    return Partition(e.p, tuple(out))


def compare_partitions(a: Partition, b: Partition) -> bool:
    """True iff the two partitions induce the same equivalence relation."""
    if a.p != b.p:
        raise InvalidInputError(f"partition sizes differ: {a.p} vs {b.p}")
    remap: dict[int, int] = {}
    for la, lb in zip(a.component_id, b.component_id):
        if la not in remap:
            remap[la] = lb
        elif remap[la] != lb:
            return False
    return len(set(remap.values())) == len(remap)


def write_edges_tsv(path, edges: EdgeSet, values: np.ndarray | CorrMatrix) -> None:
    """Write an edge list as TSV with 1-based indices and per-edge values."""
    v = values.entries if isinstance(values, CorrMatrix) else np.asarray(values)
    if v.shape != (edges.p, edges.p):
        raise InvalidInputError("value matrix shape does not match edge set")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("j\tj'\tvalue\n")
        for j, k in edges.edges:
            fh.write(f"{j + 1}\t{k + 1}\t{v[j, k]:.17g}\n")


def read_edges_tsv(path, p: int | None = None) -> tuple[EdgeSet, dict[tuple[int, int], float]]:
    """Read an edge-list TSV; returns the edge set and the per-edge values.

    When ``p`` is omitted the node count is inferred as the largest index
    present (isolated trailing nodes cannot be recovered from the file).
    """
    pairs = []
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("j\t"):
            raise InvalidInputError(f"{path}: missing edge TSV header")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            a, b, val = line.split("\t")
            j, k = int(a) - 1, int(b) - 1
            pairs.append((j, k))
            values[(j, k)] = float(val)
    if p is None:
        p = max((k for _, k in pairs), default=0) + 1
    return EdgeSet(p, tuple(pairs)), values


def write_partition_tsv(path, part: Partition) -> None:
    """Write a node-to-component table as TSV with 1-based node indices."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("node\tcomponent\n")
        for node, label in enumerate(part.component_id):
            fh.write(f"{node + 1}\t{label}\n")


def read_partition_tsv(path) -> Partition:
    labels = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("node\t"):
            raise InvalidInputError(f"{path}: missing partition TSV header")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            node, label = line.split("\t")
            labels[int(node) - 1] = int(label)
    p = max(labels) + 1 if labels else 0
    return Partition(p, tuple(labels[i] for i in range(p)))
