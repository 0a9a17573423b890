"""Constrained minimum-cost multicut: instances, checks, exact oracle and CKLJ.

Edge costs follow the log-odds convention: a positive cost means the
endpoints are similar, so cutting that edge is expensive. The objective is
the sum of costs over cut edges and is minimized.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Union

import networkx as nx

# gains below this are treated as zero; keeps the local search from cycling on rounding noise
GAIN_TOL = 1e-10


class MulticutError(ValueError):
    pass


class IncompleteLabeling(MulticutError):
    pass


class TooLarge(MulticutError):
    pass


class InfeasibleInit(MulticutError):
    pass


class MalformedInstance(MulticutError):
    pass


def _pair(u: int, v: int) -> Tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: Tuple[Tuple[int, int, float], ...] = ()
    constraints: FrozenSet[Tuple[int, int]] = frozenset()

    def __post_init__(self):
        if self.n_vertices < 0:
            raise MulticutError("n_vertices must be >= 0")
        edges = tuple((int(u), int(v), float(c)) for u, v, c in self.edges)
        seen = set()
        for u, v, c in edges:
            if u == v:
                raise MulticutError(f"self-loop on vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise MulticutError(f"edge ({u}, {v}) outside 0..{self.n_vertices - 1}")
            if not math.isfinite(c):
                raise MulticutError(f"edge ({u}, {v}) has non-finite cost {c}")
            key = _pair(u, v)
            if key in seen:
                raise MulticutError(f"duplicate edge {key}")
            seen.add(key)
        cons = set()
        for u, v in self.constraints:
            if u == v:
                raise MulticutError(f"constraint pairs vertex {u} with itself")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise MulticutError(f"constraint ({u}, {v}) outside 0..{self.n_vertices - 1}")
            cons.add(_pair(int(u), int(v)))
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "constraints", frozenset(cons))

    @cached_property
    def adjacency(self) -> List[Dict[int, float]]:
        adj: List[Dict[int, float]] = [{} for _ in range(self.n_vertices)]
        for u, v, c in self.edges:
            adj[u][v] = c
            adj[v][u] = c
        return adj

    @cached_property
    def partners(self) -> List[FrozenSet[int]]:
        """Per-vertex set of cannot-link partners."""
        out: List[Set[int]] = [set() for _ in range(self.n_vertices)]
        for u, v in self.constraints:
            out[u].add(v)
            out[v].add(u)
        return [frozenset(s) for s in out]


@dataclass(frozen=True)
class Decomposition:
    labels: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(int(x) for x in self.labels))

    def __len__(self) -> int:
        return len(self.labels)

    def components(self) -> List[List[int]]:
        """Vertex lists ordered by smallest member."""
        groups: Dict[int, List[int]] = {}
        for v, lab in enumerate(self.labels):
            groups.setdefault(lab, []).append(v)
        return sorted(groups.values(), key=lambda m: m[0])

    def canonical(self) -> "Decomposition":
        """Relabel so components are numbered 0, 1, ... by smallest member."""
        mapping: Dict[int, int] = {}
        out = []
        for lab in self.labels:
            if lab not in mapping:
                mapping[lab] = len(mapping)
            out.append(mapping[lab])
        return Decomposition(tuple(out))

    @property
    def n_components(self) -> int:
        return len(set(self.labels))


@dataclass(frozen=True)
class SolveReport:
    objective: float
    n_components: int
    n_outer_passes: int
    transformations_applied: int


def _check_labels(g: Graph, d: Decomposition) -> None:
    if len(d.labels) != g.n_vertices:
        raise IncompleteLabeling(f"labeling covers {len(d.labels)} of {g.n_vertices} vertices")


def objective(g: Graph, d: Decomposition) -> float:
    _check_labels(g, d)
    lab = d.labels
    return math.fsum(c for u, v, c in g.edges if lab[u] != lab[v])


def _connected(adj: Sequence[Dict[int, float]], vertices: Set[int]) -> bool:
    if len(vertices) <= 1:
        return True
    start = next(iter(vertices))
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for u in adj[v]:
            if u in vertices and u not in seen:
                seen.add(u)
                queue.append(u)
    return len(seen) == len(vertices)


def feasible(g: Graph, d: Decomposition) -> bool:
    _check_labels(g, d)
    lab = d.labels
    if any(lab[u] == lab[v] for u, v in g.constraints):
        return False
    adj = g.adjacency
    return all(_connected(adj, set(comp)) for comp in d.components())


def edge_labels(g: Graph, d: Decomposition) -> Tuple[int, ...]:
    """0/1 cut indicator per edge of ``g`` (1 = cut), in edge order."""
    _check_labels(g, d)
    return tuple(int(d.labels[u] != d.labels[v]) for u, v, _ in g.edges)


def check_cycle_inequalities(
    g: Graph, y: Union[Decomposition, Sequence[int]], max_cycle_len: int
) -> bool:
    """True iff no cycle of length <= ``max_cycle_len`` has exactly one cut edge.

    ``y`` is either a decomposition (edge labels are derived from it) or an
    explicit 0/1 sequence aligned with ``g.edges``.
    """
    if isinstance(y, Decomposition):
        y = edge_labels(g, y)
    if len(y) != len(g.edges):
        raise MulticutError(f"{len(y)} edge labels for {len(g.edges)} edges")
    label = {_pair(u, v): int(t) for (u, v, _), t in zip(g.edges, y)}
    nxg = nx.Graph()
    nxg.add_nodes_from(range(g.n_vertices))
    nxg.add_edges_from((u, v) for u, v, _ in g.edges)
    for cycle in nx.simple_cycles(nxg, length_bound=max_cycle_len):
        if len(cycle) < 3:
            continue
        ys = [label[_pair(cycle[k], cycle[(k + 1) % len(cycle)])] for k in range(len(cycle))]
        total = sum(ys)
        # y_e <= sum of the others fails only when y_e = 1 and every other edge is 0
        if any(t > total - t for t in ys):
            return False
    return True


def _restricted_growth(g: Graph) -> Iterator[Tuple[List[int], float]]:
    """Yield constraint-respecting partitions in lexicographic label order with their objective."""
    n = g.n_vertices
    lower = [[(u, c) for u, c in g.adjacency[v].items() if u < v] for v in range(n)]
    lower_partners = [[u for u in g.partners[v] if u < v] for v in range(n)]
    labels = [0] * n

    def rec(i: int, n_blocks: int, cost: float):
        if i == n:
            yield labels, cost
            return
        for lab in range(n_blocks + 1):
            if any(labels[u] == lab for u in lower_partners[i]):
                continue
            labels[i] = lab
            added = sum(c for u, c in lower[i] if labels[u] != lab)
            yield from rec(i + 1, max(n_blocks, lab + 1), cost + added)

    if n == 0:
        yield [], 0.0
        return
    yield from rec(0, 0, 0.0)


def brute_force_optimum(g: Graph, cap: int = 10) -> Tuple[Decomposition, float]:
    """Exact optimum by enumerating every set partition.

    Among equal objectives the lexicographically smallest canonical label
    vector wins.
    """
    if g.n_vertices > cap:
        raise TooLarge(f"{g.n_vertices} vertices exceeds the enumeration cap of {cap}")
    adj = g.adjacency
    best_labels: Optional[Tuple[int, ...]] = None
    best = math.inf
    for labels, cost in _restricted_growth(g):
        if cost >= best - GAIN_TOL:
            continue
        groups: Dict[int, Set[int]] = {}
        for v, lab in enumerate(labels):
            groups.setdefault(lab, set()).add(v)
        if all(_connected(adj, comp) for comp in groups.values()):
            best, best_labels = cost, tuple(labels)
    assert best_labels is not None  # all-singletons is always feasible
    d = Decomposition(best_labels)
    return d, objective(g, d)


class _CKLJ:
    """Mutable search state for one :func:`cklj_solve` call."""

    def __init__(self, g: Graph, labels: List[int], check: bool):
        self.g = g
        self.adj = g.adjacency
        self.partners = g.partners
        self.label = labels
        self.members: Dict[int, Set[int]] = {}
        for v, lab in enumerate(labels):
            self.members.setdefault(lab, set()).add(v)
        self.next_label = max(labels, default=-1) + 1
        self.obj = objective(g, Decomposition(tuple(labels)))
        self.check = check
        self.passes = 0
        self.applied = 0

    def _accept(self, gain: float) -> None:
        assert gain > 0, f"non-improving transformation accepted (gain={gain})"
        self.obj -= gain
        self.applied += 1
        if self.check:
            d = Decomposition(tuple(self.label))
            actual = objective(self.g, d)
            assert abs(actual - self.obj) < 1e-7, (actual, self.obj)
            assert feasible(self.g, d)

    def _order(self) -> List[int]:
        return sorted(self.members, key=lambda c: min(self.members[c]))

    def _totals(self, a: int) -> Dict[int, float]:
        totals: Dict[int, float] = {}
        for v in self.members[a]:
            for u, c in self.adj[v].items():
                b = self.label[u]
                if b != a:
                    totals[b] = totals.get(b, 0.0) + c
        return totals

    def _neighbors(self, a: int) -> List[int]:
        """Adjacent components, heaviest total connecting cost first."""
        totals = self._totals(a)
        return sorted(totals, key=lambda b: (-totals[b], min(self.members[b])))

    def _greedy_order(self) -> List[int]:
        """Components whose strongest connection is heaviest go first."""
        strongest = {a: max(self._totals(a).values(), default=-math.inf) for a in self.members}
        return sorted(self.members, key=lambda a: (-strongest[a], min(self.members[a])))

    def run(self) -> None:
        while True:
            self.passes += 1
            improved = False
            for a in self._greedy_order():
                if a not in self.members:
                    continue
                for b in self._neighbors(a):
                    if a not in self.members:
                        break
                    if b not in self.members:
                        continue
                    if self._update_bipartition(a, b) or self._evicting_join(a, b):
                        improved = True
            if self._split_pass():
                improved = True
            if not improved:
                return

    def _update_bipartition(self, a: int, b: int) -> bool:
        adj, partners = self.adj, self.partners
        sets = [set(self.members[a]), set(self.members[b])]
        side = {v: 0 for v in sets[0]}
        side.update((v, 1) for v in sets[1])

        join_gain = math.fsum(c for v in sets[0] for u, c in adj[v].items() if side.get(u) == 1)
        small, large = sorted(sets, key=len)
        join_ok = not any(partners[v] & large for v in small)

        moved: Set[int] = set()
        seq: List[int] = []
        cumulative = best = 0.0
        best_len = 0
        for _ in range(len(side)):
            candidates = []
            for v in sorted(side):
                if v in moved:
                    continue
                s = side[v]
                to_other = to_own = 0.0
                touches_other = False
                for u, c in adj[v].items():
                    su = side.get(u)
                    if su is None:
                        continue
                    if su == s:
                        to_own += c
                    else:
                        to_other += c
                        touches_other = True
                if not touches_other or partners[v] & sets[1 - s]:
                    continue
                candidates.append((-(to_other - to_own), v))
            chosen = None
            for neg_gain, v in sorted(candidates):
                if _connected(adj, sets[side[v]] - {v}):
                    chosen = (-neg_gain, v)
                    break
            if chosen is None:
                break
            gain, v = chosen
            s = side[v]
            sets[s].discard(v)
            sets[1 - s].add(v)
            side[v] = 1 - s
            moved.add(v)
            seq.append(v)
            cumulative += gain
            if cumulative > best + GAIN_TOL:
                best, best_len = cumulative, len(seq)

        if join_ok and join_gain > GAIN_TOL and join_gain >= best - GAIN_TOL:
            for v in self.members[b]:
                self.label[v] = a
            self.members[a] |= self.members.pop(b)
            self._accept(join_gain)
            return True
        if best_len == 0:
            return False
        ids = (a, b)
        for v in seq[:best_len]:
            src = self.label[v]
            dst = ids[1] if src == ids[0] else ids[0]
            self.members[src].discard(v)
            self.members[dst].add(v)
            self.label[v] = dst
        for c in ids:
            if not self.members[c]:
                del self.members[c]
        self._accept(best)
        return True

    def _cost_between(self, xs: Set[int], ys: Set[int]) -> float:
        if len(xs) > len(ys):
            xs, ys = ys, xs
        return math.fsum(c for v in xs for u, c in self.adj[v].items() if u in ys)

    def _pieces(self, vertices: Set[int]) -> List[Set[int]]:
        """Connected parts of the subgraph induced by ``vertices``."""
        left = set(vertices)
        out = []
        while left:
            start = min(left)
            piece = {start}
            queue = deque([start])
            while queue:
                v = queue.popleft()
                for u in self.adj[v]:
                    if u in left and u not in piece:
                        piece.add(u)
                        queue.append(u)
            left -= piece
            out.append(piece)
        return out

    def _eviction_plan(self, x: int, y: int):
        """Join x into y after moving x's vertices that conflict with y elsewhere.

        Each connected piece of the evicted set joins its best compatible
        neighbouring component, or stays on its own. Returns (gain, core,
        [(piece, target label or None)]) or None when not applicable.
        """
        xs, ys = self.members[x], self.members[y]
        evicted = {v for v in xs if self.partners[v] & ys}
        core = xs - evicted
        if not evicted or not core or not _connected(self.adj, core | ys):
            return None
        gain = self._cost_between(core, ys) - self._cost_between(core, evicted)
        plan = []
        for piece in self._pieces(evicted):
            totals: Dict[int, float] = {}
            for v in piece:
                for u, c in self.adj[v].items():
                    z = self.label[u]
                    if z != x and z != y:
                        totals[z] = totals.get(z, 0.0) + c
            target = None
            for z in sorted(totals, key=lambda z: (-totals[z], min(self.members[z]))):
                if totals[z] <= GAIN_TOL:
                    break
                if not any(self.partners[v] & self.members[z] for v in piece):
                    target = z
                    gain += totals[z]
                    break
            plan.append((piece, target))
        return gain, core, plan

    def _evicting_join(self, a: int, b: int) -> bool:
        best = None
        for x, y in ((a, b), (b, a)):
            plan = self._eviction_plan(x, y)
            if plan is not None and plan[0] > GAIN_TOL and (best is None or plan[0] > best[0][0] + GAIN_TOL):
                best = (plan, x, y)
        if best is None:
            return False
        (gain, core, plan), x, y = best
        for piece, target in plan:
            if target is None:
                target = self.next_label
                self.next_label += 1
                self.members[target] = set()
            for v in piece:
                self.label[v] = target
            self.members[target] |= piece
        for v in core:
            self.label[v] = y
        self.members[y] |= core
        del self.members[x]
        self._accept(gain)
        return True

    def _split_pass(self) -> bool:
        improved = False
        for c in self._order():
            for v in sorted(self.members[c]):
                comp = self.members.get(c)
                if comp is None or len(comp) < 2:
                    break
                gain = -math.fsum(w for u, w in self.adj[v].items() if self.label[u] == c)
                if gain > GAIN_TOL and _connected(self.adj, comp - {v}):
                    comp.discard(v)
                    self.label[v] = self.next_label
                    self.members[self.next_label] = {v}
                    self.next_label += 1
                    self._accept(gain)
                    improved = True
        return improved


def cklj_solve(
    g: Graph, init: Optional[Decomposition] = None, *, check: bool = False
) -> Tuple[Decomposition, SolveReport]:
    """Constrained Kernighan-Lin with joins.

    Starts from ``init`` (all singletons by default) and applies improving
    moves, joins and splits until a full pass changes nothing. Every
    intermediate state stays connected and respects the cannot-link pairs.
    With ``check=True`` the objective and feasibility are re-verified after
    each accepted transformation.
    """
    if init is None:
        labels = list(range(g.n_vertices))
    else:
        if len(init.labels) != g.n_vertices or not feasible(g, init):
            raise InfeasibleInit("initial decomposition is not feasible for this graph")
        labels = list(init.labels)
    solver = _CKLJ(g, labels, check)
    solver.run()
    d = Decomposition(tuple(solver.label)).canonical()
    report = SolveReport(
        objective=objective(g, d),
        n_components=d.n_components,
        n_outer_passes=solver.passes,
        transformations_applied=solver.applied,
    )
    return d, report


def read_instance(path) -> Graph:
    """Parse the ``p mc`` / ``e`` / ``c`` instance format (0-based vertex ids)."""
    header = None
    edges: List[Tuple[int, int, float]] = []
    constraints: List[Tuple[int, int]] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            parts = raw.split()
            if not parts or parts[0].startswith("#"):
                continue
            try:
                if parts[0] == "p" and len(parts) == 5 and parts[1] == "mc":
                    header = tuple(int(x) for x in parts[2:])
                elif parts[0] == "e" and len(parts) == 4 and header is not None:
                    edges.append((int(parts[1]), int(parts[2]), float(parts[3])))
                elif parts[0] == "c" and len(parts) == 3 and header is not None:
                    constraints.append((int(parts[1]), int(parts[2])))
                else:
                    raise ValueError(raw.strip())
            except ValueError as exc:
                raise MalformedInstance(f"{path}:{lineno}: cannot parse {raw.strip()!r}") from exc
    if header is None:
        raise MalformedInstance(f"{path}: missing 'p mc' header")
    n, n_edges, n_cons = header
    if len(edges) != n_edges or len(constraints) != n_cons:
        raise MalformedInstance(
            f"{path}: header declares {n_edges} edges/{n_cons} constraints, "
            f"found {len(edges)}/{len(constraints)}"
        )
    try:
        return Graph(n, tuple(edges), frozenset(constraints))
    except MulticutError as exc:
        raise MalformedInstance(f"{path}: {exc}") from exc


def format_instance(g: Graph) -> str:
    lines = [f"p mc {g.n_vertices} {len(g.edges)} {len(g.constraints)}"]
    lines += [f"e {u} {v} {c!r}" for u, v, c in g.edges]
    lines += [f"c {u} {v}" for u, v in sorted(g.constraints)]
    return "\n".join(lines) + "\n"


def write_instance(g: Graph, path) -> None:
    Path(path).write_text(format_instance(g))


def format_solution(d: Decomposition, value: float) -> str:
    lines = [f"{v} {lab}" for v, lab in enumerate(d.labels)]
    lines.append(f"objective {value!r}")
    return "\n".join(lines) + "\n"


def graph_from_edges(
    n_vertices: int, edges: Iterable[Tuple[int, int, float]], constraints: Iterable[Tuple[int, int]] = ()
) -> Graph:
    return Graph(n_vertices, tuple(edges), frozenset(constraints))
