"""Finite quivers and their paths.

Paths compose right to left: in a stored arrow tuple (a_m, ..., a_1) the
rightmost arrow is traversed first, so the label "ba" means "a, then b".
"""

from .errors import InputError, NotSimplyLaced


class Quiver:
    def __init__(self, vertices, arrows):
        """arrows: iterable of (label, source, target)."""
        self.vertices = list(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise InputError("duplicate vertex labels")
        vset = set(self.vertices)
        self.arrows = []
        seen = set()
        for label, s, t in arrows:
            if label in seen:
                raise InputError(f"duplicate arrow label {label!r}")
            seen.add(label)
            if s not in vset or t not in vset:
                raise InputError(f"arrow {label!r} endpoints {s!r}->{t!r} not in vertex set")
            self.arrows.append((label, s, t))
        self._by_label = {a[0]: a for a in self.arrows}
        self._out = {v: [] for v in self.vertices}
        self._into = {v: [] for v in self.vertices}
        for label, s, t in self.arrows:
            self._out[s].append(label)
            self._into[t].append(label)

    def source(self, label):
        return self._by_label[label][1]

    def target(self, label):
        return self._by_label[label][2]

    def arrows_from(self, v):
        return list(self._out[v])

    def arrows_into(self, v):
        return list(self._into[v])

    def arrow_between(self, s, t):
        """The unique arrow s -> t in a simply laced quiver, or None."""
        for label in self._out[s]:
            if self.target(label) == t:
                return label
        return None

    def check_simply_laced(self):
        pairs = set()
        for label, s, t in self.arrows:
            if s == t:
                raise NotSimplyLaced(f"loop {label!r} at {s!r}")
            if (s, t) in pairs:
                raise NotSimplyLaced(f"parallel arrows {s!r}->{t!r}")
            pairs.add((s, t))

    def is_simply_laced(self) -> bool:
        try:
            self.check_simply_laced()
        except NotSimplyLaced:
            return False
        return True

    def __repr__(self):
        return f"<Quiver {len(self.vertices)} vertices, {len(self.arrows)} arrows>"


class QPath:
    """A path of a quiver: either a vertex (length 0) or composable arrows.

    arrows are stored in composition order (last traversed first); source and
    target are cached at construction.
    """

    __slots__ = ("quiver", "arrows", "vertex", "source", "target", "length", "is_cycle")

    def __init__(self, quiver: Quiver, arrows=(), vertex=None):
        self.quiver = quiver
        self.arrows = tuple(arrows)
        if not self.arrows:
            if vertex is None or vertex not in set(quiver.vertices):
                raise InputError(f"length-0 path needs a quiver vertex, got {vertex!r}")
            self.vertex = vertex
            self.source = self.target = vertex
        else:
            for left, right in zip(self.arrows, self.arrows[1:]):
                if quiver.source(left) != quiver.target(right):
                    raise InputError(
                        f"arrows {right!r} then {left!r} are not composable"
                    )
            self.vertex = None
            self.source = quiver.source(self.arrows[-1])
            self.target = quiver.target(self.arrows[0])
        self.length = len(self.arrows)
        self.is_cycle = self.source == self.target

    @classmethod
    def at_vertex(cls, quiver, v):
        return cls(quiver, (), v)

    def label(self) -> str:
        if not self.arrows:
            return str(self.vertex)
        return "".join(str(a) for a in self.arrows)

    def then(self, arrow_label):
        """Extend by an arrow traversed after this path (prepended in storage)."""
        return QPath(self.quiver, (arrow_label,) + self.arrows)

    def before(self, arrow_label):
        """Extend by an arrow traversed before this path."""
        return QPath(self.quiver, self.arrows + (arrow_label,))

    def concat(self, other):
        """self after other (self . other); sources/targets must match."""
        if self.source != other.target:
            raise InputError(
                f"paths not composable: {self.label()} after {other.label()}"
            )
        if not self.arrows:
            return other
        if not other.arrows:
            return self
        return QPath(self.quiver, self.arrows + other.arrows)

    def vertex_sequence(self):
        """Vertices visited, from source to target (length+1 entries)."""
        seq = [self.source]
        for a in reversed(self.arrows):
            seq.append(self.quiver.target(a))
        return seq

    def sort_key(self):
        if not self.arrows:
            return (0, (str(self.vertex),))
        return (self.length, tuple(str(a) for a in self.arrows))

    def key(self):
        return (self.vertex, self.arrows)

    def __eq__(self, other):
        return isinstance(other, QPath) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"<QPath {self.label()}: {self.source}->{self.target}>"


def enumerate_paths(quiver: Quiver, n_max: int):
    """All paths of length <= n_max, split into (cycles, non_cycles).

    Vertices count as length-0 cycles.  Both lists are sorted by
    (length, arrow labels) so downstream bases are reproducible.
    """
    quiver.check_simply_laced()
    cycles, non_cycles = [], []
    frontier = [QPath.at_vertex(quiver, v) for v in sorted(quiver.vertices, key=str)]
    cycles.extend(frontier)
    for _ in range(n_max):
        nxt = []
        for p in frontier:
            for label in sorted(quiver.arrows_from(p.target), key=str):
                nxt.append(p.then(label))
        for p in nxt:
            (cycles if p.is_cycle else non_cycles).append(p)
        frontier = nxt
    cycles.sort(key=QPath.sort_key)
    non_cycles.sort(key=QPath.sort_key)
    return cycles, non_cycles
