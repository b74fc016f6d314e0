"""Finite-dimensional associative unital algebras with a chosen basis.

An algebra is given by structure constants, unit coordinates and a complete
system of orthogonal idempotents.  Everything is validated exhaustively at
construction: associativity on basis triples, unit axioms, idempotency,
orthogonality and completeness of the system.
"""

from .errors import BadSystem, BadUnit, InputError, NotAssociative, NotInSystem
from .fields import QQ
from .quiver import Quiver


def _vec_add(field, acc, vec, scale):
    if not scale:
        return
    for k, v in vec.items():
        w = field.add(acc.get(k, field.zero), field.mul(v, scale))
        if w:
            acc[k] = w
        elif k in acc:
            del acc[k]


class FinDimAlgebra:
    """Associative unital algebra by basis and structure constants.

    table[i][j] is the coordinate dict of b_i * b_j; unit and system elements
    are coordinate dicts as well.
    """

    def __init__(self, field, labels, table, unit, system, validate=True):
        self.field = field
        self.labels = [str(x) for x in labels]
        self.dim = len(self.labels)
        if len(table) != self.dim or any(len(row) != self.dim for row in table):
            raise InputError("structure constant table has wrong shape")
        self.table = [
            [{k: v for k, v in cell.items() if v} for cell in row] for row in table
        ]
        self.unit = {k: v for k, v in unit.items() if v}
        self.system = [{k: v for k, v in e.items() if v} for e in system]
        if validate:
            self._validate()

    # -- products ------------------------------------------------------------

    def mul_basis(self, i: int, j: int) -> dict:
        return self.table[i][j]

    def mul(self, u: dict, v: dict) -> dict:
        out = {}
        f = self.field
        for i, a in u.items():
            if not a:
                continue
            for j, b in v.items():
                c = f.mul(a, b)
                if c:
                    _vec_add(f, out, self.table[i][j], c)
        return out

    def left_mult_matrix(self, u: dict):
        """Columns are u * b_j, as a dict (row, col) -> scalar."""
        f = self.field
        out = {}
        for j in range(self.dim):
            col = {}
            for i, a in u.items():
                _vec_add(f, col, self.table[i][j], a)
            for r, v in col.items():
                out[(r, j)] = v
        return out

    # -- validation ----------------------------------------------------------

    def _validate(self):
        f = self.field
        for i in range(self.dim):
            ei = {i: f.one}
            if self.mul(self.unit, ei) != ei or self.mul(ei, self.unit) != ei:
                raise BadUnit(f"unit does not fix basis element {self.labels[i]}")
        for i in range(self.dim):
            for j in range(self.dim):
                ij = self.table[i][j]
                for l in range(self.dim):
                    left = self.mul(ij, {l: f.one})
                    right = self.mul({i: f.one}, self.table[j][l])
                    if left != right:
                        raise NotAssociative(i, j, l)
        total = {}
        for idx, e in enumerate(self.system):
            if self.mul(e, e) != e:
                raise BadSystem(f"element {idx} is not idempotent")
            _vec_add(f, total, e, f.one)
        for idx, e in enumerate(self.system):
            for jdx, e2 in enumerate(self.system):
                if idx != jdx and self.mul(e, e2):
                    raise BadSystem(f"elements {idx} and {jdx} are not orthogonal")
        if total != self.unit:
            raise BadSystem("system does not sum to the unit")

    # -- misc ----------------------------------------------------------------

    def basis_vector(self, i: int) -> dict:
        return {i: self.field.one}

    def coords_label(self, i: int) -> str:
        return self.labels[i]

    def __eq__(self, other):
        return (
            isinstance(other, FinDimAlgebra)
            and self.field == other.field
            and self.labels == other.labels
            and self.table == other.table
            and self.unit == other.unit
            and self.system == other.system
        )

    def __repr__(self):
        return f"<FinDimAlgebra dim={self.dim} over {self.field}>"


def algebra_from_structure_constants(field, labels, table, unit, system) -> FinDimAlgebra:
    return FinDimAlgebra(field, labels, table, unit, system)


# -- stock constructions -----------------------------------------------------


def field_algebra(field=QQ, label="1") -> FinDimAlgebra:
    one = field.one
    return FinDimAlgebra(field, [label], [[{0: one}]], {0: one}, [{0: one}])


def product_algebra(*factors) -> FinDimAlgebra:
    """Direct product; the system is the concatenation of the factor systems."""
    if not factors:
        raise InputError("empty product")
    field = factors[0].field
    labels, offsets, acc = [], [], 0
    for idx, alg in enumerate(factors):
        if alg.field != field:
            raise InputError("product factors over different fields")
        offsets.append(acc)
        labels.extend(f"{lab}({idx})" for lab in alg.labels)
        acc += alg.dim
    dim = acc

    def shift(vec, off):
        return {k + off: v for k, v in vec.items()}

    table = [[{} for _ in range(dim)] for _ in range(dim)]
    unit = {}
    system = []
    for alg, off in zip(factors, offsets):
        for i in range(alg.dim):
            for j in range(alg.dim):
                table[off + i][off + j] = shift(alg.table[i][j], off)
        unit.update(shift(alg.unit, off))
        system.extend(shift(e, off) for e in alg.system)
    return FinDimAlgebra(field, labels, table, unit, system)


def truncated_polynomial(field=QQ, n=2, var="t") -> FinDimAlgebra:
    """k[t]/t^n with basis 1, t, ..., t^(n-1)."""
    if n < 1:
        raise InputError("need n >= 1")
    one = field.one
    labels = ["1"] + [f"{var}^{i}" if i > 1 else var for i in range(1, n)]
    table = [
        [({i + j: one} if i + j < n else {}) for j in range(n)] for i in range(n)
    ]
    return FinDimAlgebra(field, labels, table, {0: one}, [{0: one}])


def peirce_quiver(algebra: FinDimAlgebra, system=None, vertex_labels=None) -> Quiver:
    """Quiver on the idempotent system: an arrow x -> y iff e_y * L * e_x != 0.

    Simply laced by construction (at most one arrow per ordered pair, no
    loops).
    """
    if system is None:
        system = algebra.system
    else:
        for e in system:
            if e not in algebra.system:
                raise NotInSystem("idempotent not in the algebra's declared system")
    n = len(system)
    if vertex_labels is None:
        vertex_labels = [f"e{i}" for i in range(n)]
    arrows = []
    f = algebra.field
    for xi in range(n):
        for yi in range(n):
            if xi == yi:
                continue
            nonzero = False
            for b in range(algebra.dim):
                mid = algebra.mul(system[yi], algebra.mul({b: f.one}, system[xi]))
                if mid:
                    nonzero = True
                    break
            if nonzero:
                arrows.append(
                    (f"{vertex_labels[xi]}>{vertex_labels[yi]}",
                     vertex_labels[xi], vertex_labels[yi])
                )
    return Quiver(vertex_labels, arrows)


def corner_dims(algebra: FinDimAlgebra, system=None):
    """dim e_y * L * e_x for every ordered pair of system idempotents."""
    from .sparse import SparseMatrix, rank as _rank

    if system is None:
        system = algebra.system
    f = algebra.field
    n = len(system)
    out = {}
    for xi in range(n):
        for yi in range(n):
            cols = []
            for b in range(algebra.dim):
                v = algebra.mul(system[yi], algebra.mul({b: f.one}, system[xi]))
                cols.append(v)
            m = SparseMatrix(
                f, algebra.dim, algebra.dim,
                [(r, j, val) for j, col in enumerate(cols) for r, val in col.items()],
            )
            out[(xi, yi)] = _rank(m)
    return out
