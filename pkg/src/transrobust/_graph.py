"""Small exact graph routines shared by the automata modules.

Edges are ``(src, dst, weight, label)`` tuples; weights are ``Fraction`` or
``int``.  Nothing here uses floating point.
"""

from collections import defaultdict, deque
from fractions import Fraction

import networkx as nx


def successors(edges):
    out = defaultdict(list)
    for e in edges:
        out[e[0]].append(e)
    return out


def reachable(starts, edges):
    out = successors(edges)
    seen = set(starts)
    queue = deque(seen)
    while queue:
        u = queue.popleft()
        for e in out[u]:
            if e[1] not in seen:
                seen.add(e[1])
                queue.append(e[1])
    return seen


def coreachable(targets, edges):
    rev = [(e[1], e[0], e[2], e[3]) for e in edges]
    return reachable(targets, rev)


def shortest_path(starts, goals, edges):
    """BFS path (list of edges) from any start to any goal, or None."""
    goals = set(goals)
    out = successors(edges)
    parent = {s: None for s in starts}
    queue = deque(starts)
    while queue:
        u = queue.popleft()
        if u in goals:
            path = []
            while parent[u] is not None:
                e = parent[u]
                path.append(e)
                u = e[0]
            return path[::-1]
        for e in sorted(out[u], key=_edge_key):
            if e[1] not in parent:
                parent[e[1]] = e
                queue.append(e[1])
    return None


def _edge_key(e):
    return (repr(e[1]), repr(e[3]), repr(e[2]))


def strongly_connected(nodes, edges):
    """Non-trivial SCCs (those containing at least one edge) as node sets."""
    g = nx.DiGraph()
    g.add_nodes_from(nodes)
    g.add_edges_from((e[0], e[1]) for e in edges)
    result = []
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1 or any(g.has_edge(v, v) for v in comp):
            result.append(set(comp))
    return result


def min_mean_cycle(nodes, edges):
    """Karp's minimum cycle mean over the graph restricted to ``nodes``.

    Returns ``(mean, cycle)`` with ``cycle`` a list of edges forming a simple
    cycle whose mean is exactly the minimum, or ``None`` when the subgraph
    is acyclic.  The graph need not be strongly connected: each SCC is
    handled separately.
    """
    nodes = set(nodes)
    edges = [e for e in edges if e[0] in nodes and e[1] in nodes]
    best = None
    for comp in strongly_connected(nodes, edges):
        inner = [e for e in edges if e[0] in comp and e[1] in comp]
        mean = _karp(comp, inner)
        if best is None or mean < best[0]:
            best = (mean, comp, inner)
    if best is None:
        return None
    mean, comp, inner = best
    return mean, _tight_cycle(comp, inner, mean)


def _karp(comp, edges):
    order = sorted(comp, key=repr)
    n = len(order)
    src = order[0]
    # table[k][v]: minimum weight of a walk with exactly k edges from src to v
    table = [dict() for _ in range(n + 1)]
    table[0][src] = Fraction(0)
    for k in range(1, n + 1):
        prev, cur = table[k - 1], table[k]
        for u, v, w, _ in edges:
            if u in prev:
                val = prev[u] + w
                if v not in cur or val < cur[v]:
                    cur[v] = val
    best = None
    for v in table[n]:
        worst = None
        for k in range(n):
            if v in table[k]:
                cand = Fraction(table[n][v] - table[k][v], n - k)
                if worst is None or cand > worst:
                    worst = cand
        if worst is not None and (best is None or worst < best):
            best = worst
    return best


def _tight_cycle(comp, edges, mean):
    # With reduced weights w - mean every cycle is non-negative and the
    # optimal ones have weight zero; they live in the tight subgraph.
    dist = {v: Fraction(0) for v in comp}
    for _ in range(len(comp)):
        changed = False
        for u, v, w, _ in edges:
            val = dist[u] + w - mean
            if val < dist[v]:
                dist[v] = val
                changed = True
        if not changed:
            break
    tight = [e for e in edges if dist[e[0]] + e[2] - mean == dist[e[1]]]
    out = successors(tight)
    for start in sorted(comp, key=repr):
        # walk tight edges; some tight edge leaves every node on a zero cycle
        path, index = [], {}
        u = start
        while u not in index and out[u]:
            index[u] = len(path)
            e = min(out[u], key=_edge_key)
            path.append(e)
            u = e[1]
        if u in index:
            cycle = path[index[u]:]
            if sum(e[2] for e in cycle) == mean * len(cycle):
                return cycle
    # fall back to exhaustive search over tight cycles
    for cyc in simple_cycles(comp, tight):
        if sum(e[2] for e in cyc) == mean * len(cyc):
            return cyc
    raise AssertionError("no cycle attains the computed minimum mean")


def simple_cycles(nodes, edges, limit=None):
    """Yield simple cycles as edge lists (parallel edges expanded)."""
    nodes = set(nodes)
    edges = [e for e in edges if e[0] in nodes and e[1] in nodes]
    by_pair = defaultdict(list)
    for e in edges:
        by_pair[(e[0], e[1])].append(e)
    g = nx.DiGraph()
    g.add_nodes_from(nodes)
    g.add_edges_from(by_pair)
    count = 0
    for cyc in nx.simple_cycles(g):
        pairs = [(cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc))]
        for choice in _product([by_pair[p] for p in pairs]):
            yield list(choice)
            count += 1
            if limit is not None and count >= limit:
                return


def _product(lists):
    if not lists:
        yield ()
        return
    for head in lists[0]:
        for rest in _product(lists[1:]):
            yield (head,) + rest


def potentials(roots, edges):
    """Forward potentials: phi[v] = phi[u] + w along every reachable edge.

    ``roots`` maps start nodes to their values.  Returns ``(phi, conflict)``
    where ``conflict`` is the first edge violating the equation, or ``None``.
    """
    out = successors(edges)
    phi = {r: Fraction(v) for r, v in roots.items()}
    queue = deque(sorted(phi, key=repr))
    while queue:
        u = queue.popleft()
        for e in out[u]:
            val = phi[u] + e[2]
            if e[1] not in phi:
                phi[e[1]] = val
                queue.append(e[1])
            elif phi[e[1]] != val:
                return phi, e
    return phi, None
