"""The per-k eta-trees, the forest index over them, queries, and the
line-oriented text format.

Tree construction walks the deletion stack backwards (last deleted first, so
thresholds non-increasing) maintaining a union-find over processed vertices.
A maximal equal-threshold group that is connected becomes one node; when a
lower-threshold vertex merges components, their top nodes become children of
its node.  Subtrees rooted at nodes with threshold >= eta are exactly the
(k, eta)-cores.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .decompose import PeelStats, decompose
from .graph import CoreResult, UncertainGraph, fingerprint


class IndexFormatError(ValueError):
    """Unreadable or inconsistent index text."""


@dataclass
class EtaNode:
    node_id: int
    threshold: float
    vertices: list[int]
    parent: int | None
    children: list[int] = field(default_factory=list)


class EtaTree:
    """Threshold-labeled vertex groups for one k, parent thresholds strictly lower.

    ``vertices`` everywhere are original labels.  Roots (one per connected
    component of the k-core) have parent None.
    """

    def __init__(self, k: int, nodes: list[EtaNode]):
        self.k = k
        self.nodes = nodes
        self.vertex_to_node = {
            v: n.node_id for n in nodes for v in n.vertices
        }
        self._order: list[int] | None = None
        self._span: list[tuple[int, int]] | None = None
        self._by_threshold: list[int] | None = None

    def roots(self) -> list[int]:
        return [n.node_id for n in self.nodes if n.parent is None]

    def threshold_of(self, vertex: int) -> float:
        return self.nodes[self.vertex_to_node[vertex]].threshold

    def _ensure_query_structures(self) -> None:
        if self._order is not None:
            return
        order: list[int] = []
        span = [(0, 0)] * len(self.nodes)
        for root in self.roots():
            stack = [(root, False)]
            starts = {}
            while stack:
                nid, done = stack.pop()
                if done:
                    span[nid] = (starts[nid], len(order))
                    continue
                starts[nid] = len(order)
                order.extend(self.nodes[nid].vertices)
                stack.append((nid, True))
                for c in reversed(self.nodes[nid].children):
                    stack.append((c, False))
        self._order = order
        self._span = span
        self._by_threshold = sorted(
            range(len(self.nodes)), key=lambda i: -self.nodes[i].threshold
        )

    def query_components(self, eta: float) -> list[set[int]]:
        """Vertex sets of the maximal subtrees whose root threshold is >= eta.

        Cost is linear in the output plus the number of tree roots: only
        nodes with qualifying thresholds are inspected, and each component is
        copied out of a precomputed traversal order.
        """
        self._ensure_query_structures()
        comps = []
        for nid in self._by_threshold:
            node = self.nodes[nid]
            if node.threshold < eta:
                break
            parent = node.parent
            if parent is None or self.nodes[parent].threshold < eta:
                lo, hi = self._span[nid]
                comps.append(set(self._order[lo:hi]))
        comps.sort(key=min)
        return comps


def build_eta_tree(
    k: int,
    deletion_stack: Sequence[int],
    thresholds: Mapping[int, float],
    g: UncertainGraph,
) -> EtaTree:
    """Assemble the eta-tree for one k from a completed peel.

    ``deletion_stack`` holds each k-core vertex exactly once in deletion
    order (thresholds non-decreasing along it); ``thresholds`` maps those
    internal vertex ids to their eta-thresholds.  Node vertex lists come out
    as original labels.
    """
    if len(deletion_stack) != len(thresholds) or set(deletion_stack) != set(
        thresholds
    ):
        raise ValueError("deletion stack and threshold table disagree")

    parent_uf: dict[int, int] = {}

    def find(x: int) -> int:
        root = x
        while parent_uf[root] != root:
            root = parent_uf[root]
        while parent_uf[x] != root:
            parent_uf[x], x = root, parent_uf[x]
        return root

    thresh: list[float] = []
    verts: list[list[int]] = []
    parent: list[int | None] = []
    children: list[list[int]] = []
    dead: list[bool] = []
    comp_top: dict[int, int] = {}

    def new_node(t: float) -> int:
        thresh.append(t)
        verts.append([])
        parent.append(None)
        children.append([])
        dead.append(False)
        return len(thresh) - 1

    for v in reversed(deletion_stack):
        t = thresholds[v]
        roots = {find(w) for w, _ in g.adj[v] if w in parent_uf}
        eq_nodes = []
        child_nodes = []
        for r in roots:
            nid = comp_top[r]
            if thresh[nid] == t:
                eq_nodes.append(nid)
            else:
                child_nodes.append(nid)
        if eq_nodes:
            target = min(eq_nodes)
            for nid in eq_nodes:
                if nid == target:
                    continue
                verts[target].extend(verts[nid])
                for c in children[nid]:
                    parent[c] = target
                children[target].extend(children[nid])
                dead[nid] = True
        else:
            target = new_node(t)
        verts[target].append(v)
        for nid in sorted(child_nodes):
            parent[nid] = target
            children[target].append(nid)
        parent_uf[v] = v
        for r in roots:
            parent_uf[find(r)] = find(v)
        comp_top[find(v)] = target

    # Compact out merged-away slots, keeping creation order.
    remap: dict[int, int] = {}
    nodes: list[EtaNode] = []
    for old_id in range(len(thresh)):
        if dead[old_id]:
            continue
        remap[old_id] = len(nodes)
        nodes.append(
            EtaNode(
                node_id=len(nodes),
                threshold=thresh[old_id],
                vertices=[g.labels[u] for u in verts[old_id]],
                parent=None,
            )
        )
    for old_id, new_id in remap.items():
        p = parent[old_id]
        if p is not None:
            nodes[new_id].parent = remap[p]
    for n in nodes:
        if n.parent is not None:
            nodes[n.parent].children.append(n.node_id)
    for n in nodes:
        n.children.sort()
    return EtaTree(k, nodes)


class UcfIndex:
    """Forest of eta-trees for k in [1, k_max], tied to a graph by content hash."""

    def __init__(
        self,
        trees: dict[int, EtaTree],
        k_max: int,
        graph_fingerprint: str,
        algo: str | None = None,
    ):
        self.trees = trees
        self.k_max = k_max
        self.graph_fingerprint = graph_fingerprint
        self.algo = algo

    def query(self, k: int, eta: float) -> CoreResult:
        """All (k, eta)-cores; empty when k exceeds k_max.

        A vertex is returned iff its stored eta-threshold is >= eta (equality
        included) and it connects to its component through vertices that also
        qualify.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        if not 0.0 <= eta <= 1.0:
            raise ValueError("eta must be in [0, 1]")
        tree = self.trees.get(k)
        if tree is None:
            return CoreResult([], k, eta)
        return CoreResult(tree.query_components(eta), k, eta)

    def to_text(self) -> str:
        lines = ["UCF 1", f"kmax {self.k_max}", f"fingerprint {self.graph_fingerprint}"]
        if self.algo is not None:
            lines.append(f"algo {self.algo}")
        for k in sorted(self.trees):
            lines.append(f"tree k={k}")
            for n in self.trees[k].nodes:
                pid = "-" if n.parent is None else str(n.parent)
                vs = " ".join(str(v) for v in sorted(n.vertices))
                lines.append(
                    f"node {n.node_id} parent {pid} thres "
                    f"{format(n.threshold, '.17g')} verts {vs}"
                )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "UcfIndex":
        lines = text.splitlines()
        if not lines or lines[0] != "UCF 1":
            raise IndexFormatError("line 1: not a UCF version-1 index")
        if len(lines) < 3:
            raise IndexFormatError("truncated header")
        try:
            kmax = int(lines[1].removeprefix("kmax "))
        except ValueError:
            raise IndexFormatError(f"line 2: bad kmax line {lines[1]!r}")
        if not lines[2].startswith("fingerprint "):
            raise IndexFormatError(f"line 3: bad fingerprint line {lines[2]!r}")
        fp = lines[2].split(" ", 1)[1]

        algo = None
        trees: dict[int, EtaTree] = {}
        cur_k: int | None = None
        cur_nodes: list[EtaNode] = []

        def flush():
            if cur_k is None:
                return
            for n in cur_nodes:
                if n.parent is not None:
                    if not 0 <= n.parent < len(cur_nodes):
                        raise IndexFormatError(
                            f"tree k={cur_k}: node {n.node_id} has unknown "
                            f"parent {n.parent}"
                        )
                    cur_nodes[n.parent].children.append(n.node_id)
            for n in cur_nodes:
                n.children.sort()
            trees[cur_k] = EtaTree(cur_k, cur_nodes)

        for idx, line in enumerate(lines[3:], start=4):
            if line.startswith("algo "):
                algo = line.split(" ", 1)[1]
            elif line.startswith("tree k="):
                flush()
                try:
                    cur_k = int(line.removeprefix("tree k="))
                except ValueError:
                    raise IndexFormatError(f"line {idx}: bad tree line {line!r}")
                cur_nodes = []
            elif line.startswith("node "):
                if cur_k is None:
                    raise IndexFormatError(f"line {idx}: node outside any tree")
                parts = line.split()
                if (
                    len(parts) < 7
                    or parts[2] != "parent"
                    or parts[4] != "thres"
                    or parts[6] != "verts"
                ):
                    raise IndexFormatError(f"line {idx}: malformed node line")
                try:
                    nid = int(parts[1])
                    pid = None if parts[3] == "-" else int(parts[3])
                    t = float(parts[5])
                    vs = [int(x) for x in parts[7:]]
                except ValueError:
                    raise IndexFormatError(f"line {idx}: malformed node line")
                if nid != len(cur_nodes) or not vs:
                    raise IndexFormatError(f"line {idx}: malformed node line")
                cur_nodes.append(EtaNode(nid, t, vs, pid))
            elif line:
                raise IndexFormatError(f"line {idx}: unrecognized record {line!r}")
        flush()
        return cls(trees, kmax, fp, algo)


def serialize(index: UcfIndex) -> str:
    return index.to_text()


def deserialize(text: str) -> UcfIndex:
    return UcfIndex.from_text(text)


def build_ucf_index(
    g: UncertainGraph,
    algo: str = "opstar",
    lower: str = "both",
    audit: bool = False,
) -> tuple[UcfIndex, list[PeelStats]]:
    """Run the chosen decomposition over all k and assemble the forest."""
    results = decompose(g, algo=algo, lower=lower, audit=audit)
    trees = {
        k: build_eta_tree(k, [v for v, _ in res.stack], res.thresholds, g)
        for k, res in results.items()
    }
    index = UcfIndex(
        trees,
        k_max=max(results, default=0),
        graph_fingerprint=fingerprint(g),
        algo="ec" if algo == "ec" else None,
    )
    return index, [results[k].stats for k in sorted(results)]
