"""Trajectories: paths decorated with waiting times, and their successors.

A trajectory of duration n over a length-m path spends p_i units waiting at
the i-th visited vertex (p_1 at the source, p_{m+1} at the target), with
n = m + sum(p_i).  Its evaluation at a Q-set is the tensor product of one
algebra factor per waiting unit and one bimodule factor per arrow, laid out
left to right from the target side to the source side, matching the order in
which cochain arguments are written.
"""

from .quiver import QPath
from .errors import InputError


class Trajectory:
    __slots__ = ("path", "waiting")

    def __init__(self, path: QPath, waiting):
        self.path = path
        self.waiting = tuple(waiting)
        if len(self.waiting) != path.length + 1:
            raise InputError(
                f"need {path.length + 1} waiting times for a length-{path.length} path,"
                f" got {len(self.waiting)}"
            )
        if any(p < 0 for p in self.waiting):
            raise InputError("negative waiting time")

    @property
    def duration(self) -> int:
        return self.path.length + sum(self.waiting)

    def key(self):
        return (self.path.key(), self.waiting)

    def __eq__(self, other):
        return isinstance(other, Trajectory) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"<Trajectory {self.label()}>"

    def label(self) -> str:
        verts = self.path.vertex_sequence()
        parts = []
        arrows = self.path.arrows  # composition order: index 0 acts last
        m = self.path.length
        parts.append(f"{verts[m]}^{self.waiting[m]}")
        for i, a in enumerate(arrows):
            parts.append(str(a))
            parts.append(f"{verts[m - 1 - i]}^{self.waiting[m - 1 - i]}")
        return ",".join(parts)

    def slots(self):
        """Tensor slot descriptors, leftmost first.

        Each slot is ('A', vertex) for one waiting unit or ('M', arrow_label).
        """
        verts = self.path.vertex_sequence()
        m = self.path.length
        out = [("A", verts[m])] * self.waiting[m]
        for i, a in enumerate(self.path.arrows):
            out.append(("M", a))
            v = verts[m - 1 - i]
            out.extend([("A", v)] * self.waiting[m - 1 - i])
        return out

    # -- successors ----------------------------------------------------------

    def succ_waiting(self):
        """tau_0^+: one trajectory per waiting slot, that slot increased by 1.

        Returns [(block_index, trajectory)] with block_index the 1-based
        waiting position (1 = source side, m+1 = target side).
        """
        out = []
        for i in range(len(self.waiting)):
            w = list(self.waiting)
            w[i] += 1
            out.append((i + 1, Trajectory(self.path, w)))
        return out

    def succ_arrow(self):
        """tau_1^+: extend the path by one arrow after or before.

        Returns [(side, arrow, trajectory)] with side 'after' (arrow leaves
        the target) or 'before' (arrow enters the source).
        """
        q = self.path.quiver
        out = []
        for c in sorted(q.arrows_from(self.path.target), key=str):
            out.append(("after", c, Trajectory(self.path.then(c), self.waiting + (0,))))
        for c in sorted(q.arrows_into(self.path.source), key=str):
            out.append(("before", c, Trajectory(self.path.before(c), (0,) + self.waiting)))
        return out

    def succ_parallel(self):
        """tau_2^+: replace one slot by a length-2 parallel path.

        An arrow slot a_i is replaced by the parallel path a''a' when arrows
        s(a_i) -> w -> t(a_i) exist; a waiting unit at vertex v is replaced by
        a length-2 cycle through v, splitting the remaining waits around it.
        Each element records (position_info, (a2, a1), trajectory).
        """
        q = self.path.quiver
        out = []
        arrows = self.path.arrows
        m = self.path.length
        verts = self.path.vertex_sequence()
        # arrow replacements: a_i parallel to a''a' (a' first)
        for idx, a in enumerate(arrows):
            s, t = q.source(a), q.target(a)
            for w in sorted(q.vertices, key=str):
                if w in (s, t):
                    continue
                a1 = q.arrow_between(s, w)
                a2 = q.arrow_between(w, t)
                if a1 is None or a2 is None:
                    continue
                new_arrows = arrows[:idx] + (a2, a1) + arrows[idx + 1:]
                # the new intermediate vertex waits zero
                wi = list(self.waiting)
                pos = m - idx  # waiting index just below the replaced arrow
                new_wait = wi[:pos] + [0] + wi[pos:]
                out.append((("arrow", idx), (a2, a1), Trajectory(QPath(q, new_arrows), new_wait)))
        # waiting replacements: one unit at vertex v becomes a 2-cycle at v
        for wi_idx in range(m + 1):
            p = self.waiting[wi_idx]
            if p == 0:
                continue
            v = verts[wi_idx]
            for w in sorted(q.vertices, key=str):
                if w == v:
                    continue
                a1 = q.arrow_between(v, w)
                a2 = q.arrow_between(w, v)
                if a1 is None or a2 is None:
                    continue
                insert_at = m - wi_idx  # arrow position in composition order
                new_arrows = arrows[:insert_at] + (a2, a1) + arrows[insert_at:]
                for below in range(p):
                    above = p - 1 - below
                    wlist = list(self.waiting)
                    wlist[wi_idx:wi_idx + 1] = [below, 0, above]
                    out.append(
                        (("wait", wi_idx, below), (a2, a1),
                         Trajectory(QPath(q, new_arrows), wlist))
                    )
        return out

    def successors(self):
        """The three successor sets (tau_0^+, tau_1^+, tau_2^+)."""
        return self.succ_waiting(), self.succ_arrow(), self.succ_parallel()


def trajectories(path: QPath, n: int):
    """All trajectories of duration n over path, lex-ordered by waiting tuple."""
    m = path.length
    total = n - m
    if total < 0:
        return []
    out = []
    for comp in _compositions(total, m + 1):
        out.append(Trajectory(path, comp))
    out.sort(key=lambda t: t.waiting)
    return out


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def evaluate(traj: Trajectory, qset):
    """Evaluation at a Q-set: (total dim, slot dims, slot descriptors).

    Basis tuples enumerate in row-major order, leftmost slot slowest.
    """
    dims = []
    for kind, key in traj.slots():
        if kind == "A":
            dims.append(qset.algebra_at[key].dim)
        else:
            dims.append(qset.bimodule_at[key].dim)
    total = 1
    for d in dims:
        total *= d
    return total, dims, traj.slots()
