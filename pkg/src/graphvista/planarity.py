"""Exact planarity testing via the left-right criterion.

Linear-time, dependency-free, and iterative throughout so graphs with
thousands of nodes never touch Python's recursion limit.  The test runs
two DFS passes: an orientation pass computing lowpoints and a nesting
order, then a testing pass maintaining a stack of conflict pairs of
return-edge intervals.  A conflict that cannot be resolved by swapping
interval sides certifies nonplanarity.
"""

from __future__ import annotations

from .graph import Graph


class _Interval:
    __slots__ = ("low", "high")

    def __init__(self, low=None, high=None):
        self.low = low
        self.high = high

    def empty(self):
        return self.low is None and self.high is None

    def copy(self):
        return _Interval(self.low, self.high)


class _ConflictPair:
    __slots__ = ("L", "R")

    def __init__(self, left=None, right=None):
        self.L = left if left is not None else _Interval()
        self.R = right if right is not None else _Interval()

    def swap(self):
        self.L, self.R = self.R, self.L


class _Nonplanar(Exception):
    pass


class _LeftRightTest:
    """One run of the left-right test over an integer-indexed graph."""

    def __init__(self, iadj):
        self.adj = iadj
        n = len(iadj)
        self.height = [None] * n
        self.parent_edge = [None] * n
        self.lowpt = {}
        self.lowpt2 = {}
        self.nesting_depth = {}
        self.oriented = set()
        self.out_edges = [[] for _ in range(n)]  # DFS-oriented edges per tail
        # testing state
        self.ref = {}
        self.side = {}
        self.lowpt_edge = {}
        self.stack_bottom = {}
        self.S = []

    # -- orientation phase -----------------------------------------------

    def orient_from(self, root):
        self.height[root] = 0
        stack = [(root, iter(self.adj[root]))]
        while stack:
            v, it = stack[-1]
            advanced = False
            for w in it:
                e = (v, w)
                if e in self.oriented or (w, v) in self.oriented:
                    continue
                self.oriented.add(e)
                self.out_edges[v].append(e)
                self.lowpt[e] = self.height[v]
                self.lowpt2[e] = self.height[v]
                if self.height[w] is None:  # tree edge: descend
                    self.parent_edge[w] = e
                    self.height[w] = self.height[v] + 1
                    stack.append((w, iter(self.adj[w])))
                    advanced = True
                    break
                self.lowpt[e] = self.height[w]  # back edge
                self._finish_edge(e)
            if not advanced:
                stack.pop()
                pe = self.parent_edge[v]
                if pe is not None:
                    self._finish_edge(pe)

    def _finish_edge(self, e):
        v = e[0]
        self.nesting_depth[e] = 2 * self.lowpt[e]
        if self.lowpt2[e] < self.height[v]:  # chordal edges nest inside
            self.nesting_depth[e] += 1
        pe = self.parent_edge[v]
        if pe is None:
            return
        if self.lowpt[e] < self.lowpt[pe]:
            self.lowpt2[pe] = min(self.lowpt[pe], self.lowpt2[e])
            self.lowpt[pe] = self.lowpt[e]
        elif self.lowpt[e] > self.lowpt[pe]:
            self.lowpt2[pe] = min(self.lowpt2[pe], self.lowpt[e])
        else:
            self.lowpt2[pe] = min(self.lowpt2[pe], self.lowpt2[e])

    # -- testing phase -----------------------------------------------------

    def _top(self):
        return self.S[-1] if self.S else None

    def _lowest(self, pair):
        if pair.L.empty():
            return self.lowpt[pair.R.low]
        if pair.R.empty():
            return self.lowpt[pair.L.low]
        return min(self.lowpt[pair.L.low], self.lowpt[pair.R.low])

    def _conflicting(self, interval, b):
        return (not interval.empty()) and self.lowpt[interval.high] > self.lowpt[b]

    def test_from(self, root, ordered):
        # frames: [v, edge index, parent_edge]; post-processing of a tree
        # edge happens when its child frame completes.
        stack = [[root, 0]]
        while stack:
            frame = stack[-1]
            v, i = frame
            edges_v = ordered[v]
            if i < len(edges_v):
                frame[1] += 1
                ei = edges_v[i]
                w = ei[1]
                self.stack_bottom[ei] = self._top()
                if ei == self.parent_edge[w]:
                    stack.append([w, 0])
                    continue  # constraints integrated after child completes
                self.lowpt_edge[ei] = ei
                self.S.append(_ConflictPair(right=_Interval(ei, ei)))
                self._integrate(v, ei, edges_v)
                continue
            # all outgoing edges handled: leave v
            stack.pop()
            pe = self.parent_edge[v]
            if pe is not None:
                u = pe[0]
                self._trim_back_edges(u)
                if self.lowpt[pe] < self.height[u] and self.S:
                    hl = self._top().L.high
                    hr = self._top().R.high
                    if hl is not None and (hr is None or self.lowpt[hl] > self.lowpt[hr]):
                        self.ref[pe] = hl
                    else:
                        self.ref[pe] = hr
                # integrate pe's constraints into the parent's frame
                if stack:
                    self._integrate(u, pe, ordered[u])

    def _integrate(self, v, ei, edges_v):
        """Fold the return edges of ei into the conflict-pair stack."""
        pe = self.parent_edge[v]
        if self.lowpt[ei] >= self.height[v]:
            return  # no return edge
        if ei == edges_v[0]:
            self.lowpt_edge[pe] = self.lowpt_edge[ei]
        else:
            self._add_constraints(ei, pe)

    def _add_constraints(self, ei, e):
        P = _ConflictPair()
        # merge return edges of ei into P.R
        while True:
            Q = self.S.pop()
            if not Q.L.empty():
                Q.swap()
            if not Q.L.empty():
                raise _Nonplanar
            if self.lowpt[Q.R.low] > self.lowpt[e]:
                if P.R.empty():
                    P.R.high = Q.R.high
                else:
                    self.ref[P.R.low] = Q.R.high
                P.R.low = Q.R.low
            else:  # align below lowpt(e)
                self.ref[Q.R.low] = self.lowpt_edge[e]
            if self._top() is self.stack_bottom[ei]:
                break
        # merge conflicting return edges of earlier siblings into P.L
        while self._conflicting(self._top().L, ei) or self._conflicting(self._top().R, ei):
            Q = self.S.pop()
            if self._conflicting(Q.R, ei):
                Q.swap()
            if self._conflicting(Q.R, ei):
                raise _Nonplanar
            # the part of Q.R below lowpt(ei) is merged into P.R
            self.ref[P.R.low] = Q.R.high
            if Q.R.low is not None:
                P.R.low = Q.R.low
            if P.L.empty():
                P.L.high = Q.L.high
            else:
                self.ref[P.L.low] = Q.L.high
            P.L.low = Q.L.low
        if not (P.L.empty() and P.R.empty()):
            self.S.append(P)

    def _trim_back_edges(self, u):
        hu = self.height[u]
        # drop entire conflict pairs that end at the parent
        while self.S and self._lowest(self.S[-1]) == hu:
            P = self.S.pop()
            if P.L.low is not None:
                self.side[P.L.low] = -1
        if not self.S:
            return
        # trim one-sided remnants inside the topmost pair
        P = self.S.pop()
        while P.L.high is not None and P.L.high[1] == u:
            P.L.high = self.ref.get(P.L.high)
        if P.L.high is None and P.L.low is not None:
            self.ref[P.L.low] = P.R.low
            self.side[P.L.low] = -1
            P.L.low = None
        while P.R.high is not None and P.R.high[1] == u:
            P.R.high = self.ref.get(P.R.high)
        if P.R.high is None and P.R.low is not None:
            self.ref[P.R.low] = P.L.low
            self.side[P.R.low] = -1
            P.R.low = None
        self.S.append(P)

    def run(self):
        n = len(self.adj)
        roots = []
        for v in range(n):
            if self.height[v] is None:
                roots.append(v)
                self.orient_from(v)
        ordered = [
            sorted(self.out_edges[v], key=lambda e: self.nesting_depth[e])
            for v in range(n)
        ]
        try:
            for v in roots:
                self.S.clear()
                self.test_from(v, ordered)
        except _Nonplanar:
            return False
        return True


def is_planar(g: Graph) -> bool:
    """Exact planarity of ``g``.

    Edge counts above the Euler bound 3|V| - 6 are rejected immediately;
    everything else goes through the left-right test.
    """
    n, m = g.n, g.m
    if n <= 4 or m <= 3:
        return True
    if m > 3 * n - 6:
        return False
    return _LeftRightTest(g.int_adjacency()).run()
