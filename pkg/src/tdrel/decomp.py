"""Tree decompositions: construction, validation, transforms, PACE I/O."""

from __future__ import annotations

import heapq
import logging
import random
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .instance import Graph, ParseError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NodeDelta:
    introduced: frozenset[int]
    removed: tuple[frozenset[int], ...]  # per child, in child order
    shared: frozenset[int]  # with the parent bag; empty at the root


@dataclass(frozen=True)
class TreeDecomposition:
    """A rooted tree of bags. Children are kept in a fixed order."""

    bags: Mapping[int, frozenset[int]]
    children: Mapping[int, tuple[int, ...]]
    root: int
    num_vertices: int
    _parent: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        bags = {k: frozenset(v) for k, v in self.bags.items()}
        kids = {k: tuple(self.children.get(k, ())) for k in bags}
        object.__setattr__(self, "bags", bags)
        object.__setattr__(self, "children", kids)
        parent = {}
        for p, cs in kids.items():
            for c in cs:
                if c not in bags:
                    raise ValueError(f"child {c} of node {p} has no bag")
                if c in parent:
                    raise ValueError(f"node {c} has two parents")
                parent[c] = p
        if self.root not in bags:
            raise ValueError(f"root {self.root} has no bag")
        object.__setattr__(self, "_parent", parent)

    @property
    def nodes(self) -> list[int]:
        return sorted(self.bags)

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags.values()), default=0) - 1

    def parent(self, node: int) -> int | None:
        return self._parent.get(node)

    def postorder(self) -> list[int]:
        out, stack = [], [(self.root, False)]
        while stack:
            node, done = stack.pop()
            if done:
                out.append(node)
                continue
            stack.append((node, True))
            stack.extend((c, False) for c in reversed(self.children[node]))
        return out

    def reachable(self) -> set[int]:
        return set(self.postorder())

    def delta(self, node: int) -> NodeDelta:
        bag = self.bags[node]
        kids = self.children[node]
        below = frozenset().union(*(self.bags[c] for c in kids))
        p = self.parent(node)
        return NodeDelta(
            introduced=bag - below,
            removed=tuple(self.bags[c] - bag for c in kids),
            shared=bag & self.bags[p] if p is not None else frozenset(),
        )

    def subtree(self, node: int) -> Iterator[int]:
        stack = [node]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(self.children[n])


@dataclass(frozen=True)
class Violation:
    kind: str  # tree | range | vertex-coverage | edge-coverage | connectedness
    message: str
    witness: object = None

    def __str__(self):
        return f"{self.kind}: {self.message}"


def validate(td: TreeDecomposition, g: Graph) -> Violation | None:
    """Return the first violated decomposition property, or None if valid."""
    seen = td.reachable()
    if seen != set(td.bags):
        stray = min(set(td.bags) - seen)
        return Violation("tree", f"node {stray} is not reachable from root {td.root}", stray)
    for node in td.nodes:
        bad = [v for v in td.bags[node] if not 1 <= v <= g.num_vertices]
        if bad:
            return Violation("range", f"bag {node} holds vertex {bad[0]} outside 1..{g.num_vertices}", (node, bad[0]))
    covered = set().union(*td.bags.values())
    for v in g.vertices:
        if v not in covered:
            return Violation("vertex-coverage", f"vertex {v} occurs in no bag", v)
    where: dict[int, list[int]] = {}
    for node in td.nodes:
        for v in td.bags[node]:
            where.setdefault(v, []).append(node)
    for u, v in sorted(g.edges):
        if not any(v in td.bags[n] for n in where[u]):
            return Violation("edge-coverage", f"edge {{{u},{v}}} is in no bag", (u, v))
    for v in sorted(where):
        tops = [n for n in where[v] if td.parent(n) is None or v not in td.bags[td.parent(n)]]
        if len(tops) != 1:
            return Violation("connectedness", f"nodes holding vertex {v} are not connected", v)
    return None


# -- construction ------------------------------------------------------------


def _fill(adj: list[set[int]], v: int) -> int:
    nb = adj[v]
    missing = sum(len(nb - adj[u]) - 1 for u in nb)
    return missing // 2


def min_fill_ordering(g: Graph, seed: int = 0) -> list[int]:
    """Greedy min-fill elimination order; ties go to a seeded random priority."""
    n = g.num_vertices
    adj = [set() for _ in range(n + 1)]
    for u, v in g.edges:
        adj[u].add(v)
        adj[v].add(u)
    rng = random.Random(seed)
    prio = list(range(n + 1))
    rng.shuffle(prio)
    fill = [0] * (n + 1)
    heap = []
    for v in g.vertices:
        fill[v] = _fill(adj, v)
        heap.append((fill[v], prio[v], v))
    heapq.heapify(heap)
    done = [False] * (n + 1)
    order = []
    while heap:
        f, _, v = heapq.heappop(heap)
        if done[v] or f != fill[v]:
            continue
        done[v] = True
        order.append(v)
        nb = adj[v]
        changed = set()
        nbl = sorted(nb)
        for i, a in enumerate(nbl):
            for b in nbl[i + 1:]:
                if b in adj[a]:
                    continue
                # every common neighbour outside N[v] loses one missing pair
                for y in adj[a] & adj[b]:
                    if y != v and y not in nb:
                        fill[y] -= 1
                        changed.add(y)
                adj[a].add(b)
                adj[b].add(a)
        for a in nb:
            adj[a].discard(v)
        adj[v] = set()
        for a in nb:
            fill[a] = _fill(adj, a)
            changed.add(a)
        for y in changed:
            heapq.heappush(heap, (fill[y], prio[y], y))
    return order


def decomposition_from_ordering(g: Graph, order: list[int]) -> tuple[dict[int, frozenset], dict[int, set]]:
    """Unrooted tree (bags, adjacency) from an elimination ordering, with
    bags contained in a neighbour's bag contracted away."""
    pos = {v: i for i, v in enumerate(order)}
    adj = g.adjacency()
    bags: dict[int, frozenset] = {}
    parent: dict[int, int] = {}
    for v in order:
        later = adj[v]
        bags[v] = frozenset(later | {v})
        for a in later:
            adj[a] |= later - {a}
            adj[a].discard(v)
        if later:
            parent[v] = min(later, key=pos.__getitem__)
    roots = [v for v in order if v not in parent]
    for r in roots[:-1]:
        parent[r] = roots[-1]
    tree = {v: set() for v in order}
    for c, p in parent.items():
        tree[c].add(p)
        tree[p].add(c)

    merged = True
    while merged:
        merged = False
        for a in sorted(tree):
            if a not in tree:
                continue
            for b in sorted(tree[a]):
                if bags[a] <= bags[b]:
                    keep, drop = b, a
                elif bags[b] <= bags[a]:
                    keep, drop = a, b
                else:
                    continue
                for x in tree.pop(drop):
                    tree[x].discard(drop)
                    if x != keep:
                        tree[x].add(keep)
                        tree[keep].add(x)
                del bags[drop]
                merged = True
                break
    return bags, tree


def _centroid(tree: dict[int, set]) -> int:
    nodes = sorted(tree)
    start = nodes[0]
    order, par = [start], {start: None}
    for n in order:
        for m in sorted(tree[n]):
            if m != par[n]:
                par[m] = n
                order.append(m)
    size = {}
    for n in reversed(order):
        size[n] = 1 + sum(size[m] for m in tree[n] if m != par[n])
    total = len(nodes)

    def balance(n):
        parts = [size[m] for m in tree[n] if m != par[n]]
        parts.append(total - size[n])
        return max(parts)

    return min(nodes, key=lambda n: (balance(n), n))


def _rooted(bags: dict, tree: dict, root: int, num_vertices: int) -> TreeDecomposition:
    """Orient an unrooted tree at ``root`` and number nodes 1..N in post-order."""
    kids: dict[int, list] = {}
    stack, seen = [root], {root}
    while stack:
        n = stack.pop()
        kids[n] = [m for m in sorted(tree[n]) if m not in seen]
        seen.update(kids[n])
        stack.extend(kids[n])
    provisional = TreeDecomposition(bags, {k: tuple(v) for k, v in kids.items()}, root, num_vertices)
    return renumber(provisional)


def renumber(td: TreeDecomposition) -> TreeDecomposition:
    """Post-order numbering 1..N (root gets N), children order preserved."""
    ids = {old: i for i, old in enumerate(td.postorder(), 1)}
    return TreeDecomposition(
        {ids[n]: td.bags[n] for n in ids},
        {ids[n]: tuple(ids[c] for c in td.children[n]) for n in ids},
        ids[td.root],
        td.num_vertices,
    )


def decompose(g: Graph, seed: int = 0) -> TreeDecomposition:
    """Heuristic tree decomposition from a min-fill elimination ordering.

    The tree is rooted at a centroid so that subtrees are balanced.
    """
    if g.num_vertices == 0:
        return TreeDecomposition({1: frozenset()}, {1: ()}, 1, 0)
    bags, tree = decomposition_from_ordering(g, min_fill_ordering(g, seed))
    return _rooted(bags, tree, _centroid(tree), g.num_vertices)


# -- transforms --------------------------------------------------------------


def _fresh(td: TreeDecomposition) -> Iterator[int]:
    nxt = max(td.bags) + 1
    while True:
        yield nxt
        nxt += 1


def limit_children(td: TreeDecomposition, k: int = 5) -> TreeDecomposition:
    """Bound every node's fan-out by ``k`` using copies of the parent bag."""
    if k < 2:
        raise ValueError("child limit must be at least 2")
    if all(len(c) <= k for c in td.children.values()):
        return td
    bags = dict(td.bags)
    kids = dict(td.children)
    fresh = _fresh(td)
    work = [n for n in td.nodes if len(kids[n]) > k]
    while work:
        node = work.pop()
        cs = kids[node]
        extra = next(fresh)
        bags[extra] = bags[node]
        kids[extra] = cs[k - 1:]
        kids[node] = cs[: k - 1] + (extra,)
        if len(kids[extra]) > k:
            work.append(extra)
    return TreeDecomposition(bags, kids, td.root, td.num_vertices)


def normalize_root(td: TreeDecomposition) -> TreeDecomposition:
    """Ensure the root bag is empty by adding an empty root if needed."""
    if not td.bags[td.root]:
        return td
    new = max(td.bags) + 1
    return TreeDecomposition(
        {**td.bags, new: frozenset()},
        {**td.children, new: (td.root,)},
        new,
        td.num_vertices,
    )


def make_nice(td: TreeDecomposition) -> TreeDecomposition:
    """Equivalent nice decomposition (leaf/introduce/remove/binary-join nodes).

    Leaves and the root have empty bags; ids are renumbered in post-order.
    """
    td = normalize_root(td)
    bags: dict[int, frozenset] = {}
    kids: dict[int, tuple] = {}
    counter = iter(range(1, 10**9))

    def new(bag, children=()):
        n = next(counter)
        bags[n] = frozenset(bag)
        kids[n] = tuple(children)
        return n

    def chain(top: int, src: frozenset, dst: frozenset) -> int:
        cur, bag = top, set(src)
        for v in sorted(src - dst):
            bag.discard(v)
            cur = new(bag, (cur,))
        for v in sorted(dst - src):
            bag.add(v)
            cur = new(bag, (cur,))
        return cur

    built: dict[int, int] = {}
    for node in td.postorder():
        bag = td.bags[node]
        if not td.children[node]:
            tops = [chain(new(()), frozenset(), bag)]
        else:
            tops = [chain(built[c], td.bags[c], bag) for c in td.children[node]]
        top = tops[0]
        for other in tops[1:]:
            top = new(bag, (top, other))
        built[node] = top
    return renumber(TreeDecomposition(bags, kids, built[td.root], td.num_vertices))


def node_type(td: TreeDecomposition, node: int) -> str:
    """leaf / intr / rem / join for nodes of a nice decomposition, else 'other'."""
    bag, cs = td.bags[node], td.children[node]
    if not cs:
        return "leaf" if not bag else "other"
    if len(cs) == 2 and td.bags[cs[0]] == bag == td.bags[cs[1]]:
        return "join"
    if len(cs) == 1:
        child = td.bags[cs[0]]
        if child < bag and len(bag) == len(child) + 1:
            return "intr"
        if bag < child and len(child) == len(bag) + 1:
            return "rem"
    return "other"


def is_nice(td: TreeDecomposition) -> bool:
    return all(node_type(td, n) != "other" for n in td.nodes)


# -- PACE format -------------------------------------------------------------


def write_td(td: TreeDecomposition) -> str:
    """PACE ``.td`` text; nodes renumbered in post-order so the root is last."""
    td = renumber(td)
    max_bag = max(len(b) for b in td.bags.values())
    lines = [f"s td {len(td.bags)} {max_bag} {td.num_vertices}"]
    for n in td.nodes:
        lines.append(" ".join(["b", str(n)] + [str(v) for v in sorted(td.bags[n])]))
    for n in td.nodes:
        for c in td.children[n]:
            lines.append(f"{n} {c}")
    return "\n".join(lines) + "\n"


def read_td(data: str | bytes, root: int | None = None) -> TreeDecomposition:
    """Parse a PACE ``.td`` file.

    PACE trees are unrooted; the root is ``root`` if given, otherwise the
    node named by a ``c root <id>`` comment, otherwise the highest node id.
    """
    text = data.decode() if isinstance(data, (bytes, bytearray)) else data
    header = None
    bags: dict[int, frozenset] = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        fields = raw.split()
        if not fields:
            continue
        if fields[0] == "c":
            if len(fields) == 3 and fields[1] == "root" and root is None:
                root = int(fields[2])
            continue
        try:
            if fields[0] == "s":
                if header is not None or len(fields) != 5 or fields[1] != "td":
                    raise ParseError(f"line {lineno}: bad solution line {raw!r}")
                header = [int(x) for x in fields[2:]]
            elif fields[0] == "b":
                if header is None:
                    raise ParseError(f"line {lineno}: bag before 's td' line")
                node = int(fields[1])
                if not 1 <= node <= header[0]:
                    raise ParseError(f"line {lineno}: bag id {node} out of range 1..{header[0]}")
                if node in bags:
                    raise ParseError(f"line {lineno}: bag {node} defined twice")
                bag = [int(x) for x in fields[2:]]
                if any(not 1 <= v <= header[2] for v in bag):
                    raise ParseError(f"line {lineno}: vertex out of range 1..{header[2]}")
                bags[node] = frozenset(bag)
            else:
                if header is None or len(fields) != 2:
                    raise ParseError(f"line {lineno}: expected a tree edge, got {raw!r}")
                a, b = int(fields[0]), int(fields[1])
                if not (1 <= a <= header[0] and 1 <= b <= header[0]):
                    raise ParseError(f"line {lineno}: edge endpoint out of range 1..{header[0]}")
                edges.append((a, b))
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"line {lineno}: non-integer field in {raw!r}") from None
    if header is None:
        raise ParseError("missing 's td' line")
    for n in range(1, header[0] + 1):
        bags.setdefault(n, frozenset())
    max_bag = max((len(b) for b in bags.values()), default=0)
    if max_bag != header[1]:
        log.warning("declared max bag size %d, actual %d", header[1], max_bag)
    if len(edges) != len(bags) - 1:
        raise ParseError(f"{len(bags)} bags need {len(bags) - 1} tree edges, found {len(edges)}")
    tree = {n: set() for n in bags}
    for a, b in edges:
        tree[a].add(b)
        tree[b].add(a)
    root = max(bags) if root is None else root
    if root not in bags:
        raise ParseError(f"root {root} is not a bag")
    kids: dict[int, tuple] = {}
    stack, seen = [root], {root}
    while stack:
        n = stack.pop()
        kids[n] = tuple(m for m in sorted(tree[n]) if m not in seen)
        seen.update(kids[n])
        stack.extend(kids[n])
    if seen != set(bags):
        raise ParseError("tree decomposition is not connected")
    return TreeDecomposition(bags, kids, root, header[2])
