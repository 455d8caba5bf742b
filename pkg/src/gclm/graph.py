"""Mixed graphs, treks and the marginalization projection.

Vertices are 0-based integers inside the library.  A directed edge ``(i, j)``
means ``i -> j`` and corresponds to a nonzero ``B[j, i]``; a bidirected edge
``(i, j)`` with ``i <= j`` corresponds to a nonzero ``C[i, j]``.
"""
from dataclasses import dataclass
from itertools import product
from math import factorial

import numpy as np

from .errors import DimensionMismatch, MarginalNotUnique, SingularLyapunov, ValidationError
from .lyapunov import as_square, as_symmetric, check_mat0, schur_decompose, solve_lyapunov

__all__ = [
    "MixedGraph",
    "Trek",
    "compatibility_graph",
    "enumerate_treks",
    "trek_weight",
    "trek_kappa",
    "sigma_partial_series",
    "sigma_trek_sum",
    "trek_exists",
    "trek_reachability",
    "marginalize",
    "project_graph",
    "permute_model",
]


@dataclass(frozen=True)
class MixedGraph:
    """Graph on vertices ``0..p-1`` with directed and bidirected edges.

    Self-loops are allowed in both edge sets, and a pair of vertices may be
    joined by both a directed and a bidirected edge.
    """

    p: int
    directed: frozenset = frozenset()
    bidirected: frozenset = frozenset()

    def __post_init__(self):
        if self.p < 1:
            raise ValidationError("a mixed graph needs at least one vertex")
        directed = frozenset((int(i), int(j)) for i, j in self.directed)
        bidirected = frozenset((min(int(i), int(j)), max(int(i), int(j))) for i, j in self.bidirected)
        for i, j in directed | bidirected:
            if not (0 <= i < self.p and 0 <= j < self.p):
                raise ValidationError(f"edge ({i}, {j}) has an endpoint outside 0..{self.p - 1}")
        object.__setattr__(self, "directed", directed)
        object.__setattr__(self, "bidirected", bidirected)

    def parents(self, j):
        return sorted(i for i, h in self.directed if h == j)

    def children(self, i):
        return sorted(h for g, h in self.directed if g == i)

    def spouses(self, k):
        """Vertices joined to ``k`` by a bidirected edge (``k`` itself if it has a loop)."""
        out = set()
        for a, b in self.bidirected:
            if a == k:
                out.add(b)
            if b == k:
                out.add(a)
        return sorted(out)

    def adjacency(self):
        """Boolean ``A`` with ``A[i, j]`` true iff ``i -> j``."""
        A = np.zeros((self.p, self.p), dtype=bool)
        for i, j in self.directed:
            A[i, j] = True
        return A

    def bidirected_matrix(self):
        M = np.zeros((self.p, self.p), dtype=bool)
        for i, j in self.bidirected:
            M[i, j] = M[j, i] = True
        return M

    def drift_support(self):
        """Boolean pattern of ``B`` allowed by the directed part (``B[j, i]`` for ``i -> j``)."""
        return self.adjacency().T

    def induced(self, vertices):
        """Subgraph on ``vertices``, relabeled ``0..len(vertices)-1`` in the given order."""
        index = {v: n for n, v in enumerate(vertices)}
        directed = {(index[i], index[j]) for i, j in self.directed if i in index and j in index}
        bidirected = {(index[i], index[j]) for i, j in self.bidirected if i in index and j in index}
        return MixedGraph(len(vertices), frozenset(directed), frozenset(bidirected))

    def is_subgraph_of(self, other):
        return self.p == other.p and self.directed <= other.directed and self.bidirected <= other.bidirected


@dataclass(frozen=True)
class Trek:
    """A trek ``i <- ... <- k <-> l -> ... -> j``.

    ``left`` is the directed walk ``(k, ..., i)`` and ``right`` the walk
    ``(l, ..., j)``; the bridge is the bidirected edge ``{k, l}``.
    """

    left: tuple
    right: tuple

    @property
    def source(self):
        return self.left[-1]

    @property
    def target(self):
        return self.right[-1]

    @property
    def bridge(self):
        return (self.left[0], self.right[0])

    @property
    def n(self):
        return len(self.left) - 1

    @property
    def m(self):
        return len(self.right) - 1

    def edges(self):
        """Directed edges ``(g, h)`` traversed on both sides, with multiplicity."""
        walk = list(zip(self.left[:-1], self.left[1:])) + list(zip(self.right[:-1], self.right[1:]))
        return walk

    def reverse(self):
        return Trek(left=self.right, right=self.left)

    def is_valid(self, G):
        k, l = self.bridge
        if (min(k, l), max(k, l)) not in G.bidirected:
            return False
        return all(e in G.directed for e in self.edges())


def compatibility_graph(B, C, zero_tol=0.0):
    """Smallest mixed graph compatible with ``(B, C)``.

    Contains ``i -> j`` when ``|B[j, i]| > zero_tol`` and ``i <-> j`` when
    ``|C[i, j]| > zero_tol``.
    """
    B = as_square(B, "B")
    C = as_square(C, "C")
    if B.shape != C.shape:
        raise DimensionMismatch(f"B is {B.shape} but C is {C.shape}")
    if zero_tol < 0:
        raise ValidationError("zero_tol must be non-negative")
    rows, cols = np.nonzero(np.abs(B) > zero_tol)
    directed = {(int(j), int(i)) for i, j in zip(rows, cols)}
    rows, cols = np.nonzero(np.abs(C) > zero_tol)
    bidirected = {(int(i), int(j)) for i, j in zip(rows, cols) if i <= j}
    return MixedGraph(B.shape[0], frozenset(directed), frozenset(bidirected))


def _walks_ending_at(G, end, length):
    """All directed walks with ``length`` edges ending at ``end``, as vertex tuples."""
    walks = [(end,)]
    for _ in range(length):
        walks = [(g,) + w for w in walks for g in G.parents(w[0])]
    return walks


def enumerate_treks(G, i, j, max_len):
    """All treks from ``i`` to ``j`` with ``n + m <= max_len``.

    Walks may revisit vertices, so the count grows exponentially with
    ``max_len`` on graphs with cycles.
    """
    if max_len < 0:
        raise ValidationError("max_len must be non-negative")
    left_cache = {}
    right_cache = {}
    treks = []
    for n in range(max_len + 1):
        left_cache.setdefault(n, _walks_ending_at(G, i, n))
        for m in range(max_len - n + 1):
            right_cache.setdefault(m, _walks_ending_at(G, j, m))
            for left in left_cache[n]:
                k = left[0]
                spouses = set(G.spouses(k))
                for right in right_cache[m]:
                    if right[0] in spouses:
                        treks.append(Trek(left=left, right=right))
    return treks


def trek_weight(B, C, trek):
    """``C[k, l]`` times ``B[h, g]`` for every directed edge ``g -> h`` on the trek."""
    k, l = trek.bridge
    w = C[k, l]
    for g, h in trek.edges():
        w *= B[h, g]
    return float(w)


def trek_kappa(s, trek=None, n=None, m=None):
    """``s**(n+m+1) / ((n+m+1) n! m!)`` for a trek (or explicit side lengths)."""
    if trek is not None:
        n, m = trek.n, trek.m
    if s < 0:
        raise ValidationError("s must be non-negative")
    order = n + m + 1
    return s**order / (order * factorial(n) * factorial(m))


def sigma_partial_series(B, C, s, max_len):
    """Truncated trek expansion of ``int_0^s exp(uB) C exp(uB') du``.

    Sums ``kappa(s, n, m) * B^n C (B')^m`` over ``n + m <= max_len``, which
    groups the trek sum of every entry by the side lengths ``(n, m)``.
    """
    B = as_square(B, "B")
    C = as_symmetric(C, "C")
    if s < 0:
        raise ValidationError("s must be non-negative")
    p = B.shape[0]
    # powers[n] = (s B)^n / n!, so the (n, m) term is powers[n] C powers[m]' * s / (n+m+1)
    powers = [np.eye(p)]
    for n in range(1, max_len + 1):
        powers.append(powers[-1] @ B * (s / n))
    out = np.zeros((p, p))
    for n in range(max_len + 1):
        left = powers[n] @ C
        for m in range(max_len - n + 1):
            out += (s / (n + m + 1)) * (left @ powers[m].T)
    return 0.5 * (out + out.T)


def sigma_trek_sum(B, C, s, max_len, G=None):
    """Same truncation as :func:`sigma_partial_series`, summed trek by trek.

    Exponential cost; intended for cross-checking on tiny graphs.
    """
    B = as_square(B, "B")
    C = as_symmetric(C, "C")
    if G is None:
        G = compatibility_graph(B, C)
    p = B.shape[0]
    out = np.zeros((p, p))
    for i, j in product(range(p), repeat=2):
        out[i, j] = sum(trek_kappa(s, t) * trek_weight(B, C, t) for t in enumerate_treks(G, i, j, max_len))
    return out


def _ancestor_matrix(G):
    """``anc[u, v]`` true iff there is a directed walk (possibly empty) from ``u`` to ``v``."""
    reach = np.eye(G.p, dtype=bool) | G.adjacency()
    # transitive closure by repeated squaring
    while True:
        nxt = reach | ((reach.astype(np.int64) @ reach.astype(np.int64)) > 0)
        if np.array_equal(nxt, reach):
            return reach
        reach = nxt


def trek_reachability(G):
    """Boolean ``T`` with ``T[i, j]`` true iff some trek runs from ``i`` to ``j``.

    A trek exists iff there are ``u <-> v`` with ``u`` an ancestor of ``i`` and
    ``v`` an ancestor of ``j`` (ancestors include the vertex itself).
    """
    anc = _ancestor_matrix(G).astype(np.int64)
    bi = G.bidirected_matrix().astype(np.int64)
    return (anc.T @ bi @ anc) > 0


def trek_exists(G, i, j):
    return bool(trek_reachability(G)[i, j])


def project_graph(G, keep):
    """Projection of ``G`` onto its first ``keep`` vertices.

    Keeps every edge among retained vertices and adds ``i <-> j`` whenever a
    removed vertex ``k`` gives a trek ``i <- k ~> j`` or ``i ~> k -> j``.
    Trek existence is decided by reachability, so arbitrarily long treks
    through cycles are accounted for.
    """
    if not 1 <= keep <= G.p:
        raise ValidationError(f"keep must be in 1..{G.p}, got {keep}")
    base = G.induced(range(keep))
    if keep == G.p:
        return base
    treks = trek_reachability(G)
    adj = G.adjacency()
    removed = np.arange(keep, G.p)
    # via[i, j]: some removed k with k -> i and a trek k ~> j
    edge_from_removed = adj[np.ix_(removed, np.arange(keep))].astype(np.int64)
    trek_from_removed = treks[np.ix_(removed, np.arange(keep))].astype(np.int64)
    via = (edge_from_removed.T @ trek_from_removed) > 0
    # i ~> k -> j is the mirror image of j <- k <~ i
    via = via | via.T
    new = {(int(i), int(j)) for i, j in zip(*np.nonzero(via)) if i <= j}
    return MixedGraph(keep, base.directed, base.bidirected | frozenset(new))


def marginalize(B, C, keep):
    """Marginal Lyapunov equation for the first ``keep`` coordinates.

    Returns ``(B11, Ctilde, Sigma11)`` with
    ``B11 @ Sigma11 + Sigma11 @ B11.T + Ctilde = 0`` where
    ``Ctilde = B12 @ Sigma21 + Sigma12 @ B12.T + C11``.

    Raises
    ------
    MarginalNotUnique
        If ``B11`` has two eigenvalues summing to zero.
    """
    B = as_square(B, "B")
    C = as_symmetric(C, "C")
    if B.shape != C.shape:
        raise DimensionMismatch(f"B is {B.shape} but C is {C.shape}")
    p = B.shape[0]
    if not 1 <= keep <= p:
        raise ValidationError(f"keep must be in 1..{p}, got {keep}")
    Sigma = solve_lyapunov(B, C)
    B11 = B[:keep, :keep]
    try:
        check_mat0(schur_decompose(B11).eigenvalues)
    except SingularLyapunov as exc:
        raise MarginalNotUnique(f"retained block B11 is not in Mat0: {exc}") from exc
    B12 = B[:keep, keep:]
    S12 = Sigma[:keep, keep:]
    Ct = B12 @ S12.T + S12 @ B12.T + C[:keep, :keep]
    Ct = 0.5 * (Ct + Ct.T)
    return B11.copy(), Ct, Sigma[:keep, :keep].copy()


def permute_model(B, C, order):
    """Symmetric permutation putting vertices ``order`` first (used for arbitrary keep sets)."""
    order = list(order)
    B = np.asarray(B, dtype=float)
    p = B.shape[0]
    rest = [v for v in range(p) if v not in set(order)]
    perm = order + rest
    if sorted(perm) != list(range(p)):
        raise ValidationError("keep list must contain distinct vertices")
    idx = np.ix_(perm, perm)
    return B[idx], np.asarray(C, dtype=float)[idx], perm
