"""Exact sparse linear algebra over the rationals and prime fields.

Matrices are immutable-after-build sparse maps (row, col) -> scalar.  Rank,
kernel and echelon computations run on integer row data: over the rationals
each row is scaled to integers (this never changes rank, row space or
kernel), updates use the fraction-free two-term rule with gcd normalization,
so no rational arithmetic happens inside the elimination loop.

Pivoting: singleton rows and columns are consumed first (they cost no fill),
then a Markowitz-style rule picks the sparsest column and within it the
sparsest row.  All ties break by smallest index, so every result is
deterministic.
"""

from fractions import Fraction
from heapq import heappush, heappop
from math import gcd

from .errors import CompositionNotZero, InputError


class SparseMatrix:
    """Sparse matrix over an exact field.

    entries maps (row, col) to a nonzero field scalar.  Treat instances as
    immutable once built; derived caches assume it.
    """

    def __init__(self, field, rows: int, cols: int, entries=None):
        if rows < 0 or cols < 0:
            raise InputError(f"negative matrix shape {rows}x{cols}")
        self.field = field
        self.rows = rows
        self.cols = cols
        self.entries = {}
        self._cols_cache = None
        if entries:
            items = entries.items() if isinstance(entries, dict) else entries
            for item in items:
                if isinstance(entries, dict):
                    (r, c), v = item
                else:
                    r, c, v = item
                self._put(r, c, v)

    def _put(self, r, c, v):
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise InputError(f"entry ({r},{c}) outside {self.rows}x{self.cols}")
        if v:
            key = (r, c)
            if key in self.entries:
                w = self.field.add(self.entries[key], v)
                if w:
                    self.entries[key] = w
                else:
                    del self.entries[key]
            else:
                self.entries[key] = v

    @classmethod
    def from_entries(cls, field, rows, cols, triples):
        return cls(field, rows, cols, triples)

    @classmethod
    def identity(cls, field, n):
        return cls(field, n, n, [(i, i, field.one) for i in range(n)])

    @classmethod
    def zeros(cls, field, rows, cols):
        return cls(field, rows, cols)

    # -- basic queries -------------------------------------------------------

    def nnz(self) -> int:
        return len(self.entries)

    def dense_size(self) -> int:
        return self.rows * self.cols

    def entry(self, r, c):
        return self.entries.get((r, c), self.field.zero)

    def is_zero(self) -> bool:
        return not self.entries

    def __eq__(self, other):
        return (
            isinstance(other, SparseMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __repr__(self):
        return f"<SparseMatrix {self.rows}x{self.cols} nnz={len(self.entries)} over {self.field}>"

    def columns(self):
        """Column-major view: dict col -> list of (row, val)."""
        if self._cols_cache is None:
            cols = {}
            for (r, c), v in self.entries.items():
                cols.setdefault(c, []).append((r, v))
            for lst in cols.values():
                lst.sort()
            self._cols_cache = cols
        return self._cols_cache

    def column(self, j) -> dict:
        return {r: v for r, v in self.columns().get(j, [])}

    def row_dicts(self):
        rows = {}
        for (r, c), v in self.entries.items():
            rows.setdefault(r, {})[c] = v
        return rows

    # -- arithmetic ----------------------------------------------------------

    def transpose(self):
        return SparseMatrix(
            self.field, self.cols, self.rows, [(c, r, v) for (r, c), v in self.entries.items()]
        )

    def add(self, other):
        self._check_shape(other, same=True)
        out = SparseMatrix(self.field, self.rows, self.cols, dict(self.entries))
        for (r, c), v in other.entries.items():
            out._put(r, c, v)
        out._cols_cache = None
        return out

    def scale(self, s):
        s = self.field.of(s)
        if not s:
            return SparseMatrix.zeros(self.field, self.rows, self.cols)
        mul = self.field.mul
        return SparseMatrix(
            self.field, self.rows, self.cols,
            [(r, c, mul(v, s)) for (r, c), v in self.entries.items()],
        )

    def neg(self):
        neg = self.field.neg
        return SparseMatrix(
            self.field, self.rows, self.cols,
            [(r, c, neg(v)) for (r, c), v in self.entries.items()],
        )

    def sub(self, other):
        return self.add(other.neg())

    def matvec(self, vec: dict) -> dict:
        """Apply to a sparse vector indexed by columns."""
        f = self.field
        out = {}
        cols = self.columns()
        for j, x in vec.items():
            if not x:
                continue
            for r, v in cols.get(j, ()):
                w = f.add(out.get(r, f.zero), f.mul(v, x))
                if w:
                    out[r] = w
                elif r in out:
                    del out[r]
        return out

    def matmul(self, other):
        if self.cols != other.rows:
            raise InputError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        f = self.field
        mycols = self.columns()
        out = {}
        for (r, c), v in other.entries.items():
            for rr, vv in mycols.get(r, ()):
                key = (rr, c)
                w = f.add(out.get(key, f.zero), f.mul(vv, v))
                if w:
                    out[key] = w
                elif key in out:
                    del out[key]
        return SparseMatrix(f, self.rows, other.cols, out)

    def to_dense(self):
        dense = [[self.field.zero] * self.cols for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            dense[r][c] = v
        return dense

    def _check_shape(self, other, same=False):
        if same and (self.rows != other.rows or self.cols != other.cols):
            raise InputError(
                f"shape mismatch {self.rows}x{self.cols} vs {other.rows}x{other.cols}"
            )


def block_matrix(field, row_dims, col_dims, blocks):
    """Assemble from a dict (i, j) -> SparseMatrix with given block dimensions."""
    row_off, acc = [], 0
    for d in row_dims:
        row_off.append(acc)
        acc += d
    total_rows = acc
    col_off, acc = [], 0
    for d in col_dims:
        col_off.append(acc)
        acc += d
    total_cols = acc
    triples = []
    for (i, j), m in blocks.items():
        if m.rows != row_dims[i] or m.cols != col_dims[j]:
            raise InputError(f"block ({i},{j}) has shape {m.rows}x{m.cols}")
        ro, co = row_off[i], col_off[j]
        triples.extend((r + ro, c + co, v) for (r, c), v in m.entries.items())
    return SparseMatrix(field, total_rows, total_cols, triples)


# -- integer row preparation -------------------------------------------------


def _integer_rows(matrix: SparseMatrix):
    """Row-major copy with rows scaled to content-1 integers (QQ) or ints mod p.

    Row scaling preserves rank, row space and kernel, which is all the
    elimination engine is used for.
    """
    rows = {}
    for (r, c), v in matrix.entries.items():
        rows.setdefault(r, {})[c] = v
    p = matrix.field.p
    out = {}
    for r, row in rows.items():
        if p is not None:
            cleaned = {c: v % p for c, v in row.items() if v % p}
            if cleaned:
                out[r] = cleaned
            continue
        denlcm = 1
        for v in row.values():
            d = v.denominator
            denlcm = denlcm * d // gcd(denlcm, d)
        ints = {c: int(v * denlcm) for c, v in row.items()}
        g = 0
        for v in ints.values():
            g = gcd(g, v)
        if g > 1:
            ints = {c: v // g for c, v in ints.items()}
        if ints:
            out[r] = ints
    return out


def _normalize_int_row(row: dict):
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return row
    if g > 1:
        for c in row:
            row[c] //= g
    return row


class _Eliminator:
    """Shared engine for rank / row-echelon over integer row data.

    keep=True records the pivot rows (in elimination order) so callers can
    back-substitute for kernels or reduce vectors against the row space.
    """

    def __init__(self, rows, p, keep=False, max_rank=None):
        self.p = p
        self.keep = keep
        self.rows = rows
        self.max_rank = max_rank if max_rank is not None else len(rows)
        self.col_rows = {}
        for r, row in rows.items():
            for c in row:
                self.col_rows.setdefault(c, set()).add(r)
        self.pivots = []  # list of (col, rowdict) in elimination order
        self.rank = 0
        self.col_heap = []
        self.row_heap = []
        for c, s in self.col_rows.items():
            heappush(self.col_heap, (len(s), c))
        for r, row in rows.items():
            heappush(self.row_heap, (len(row), r))

    def run(self):
        while self.rows and self.rank < self.max_rank:
            pick = self._next_pivot()
            if pick is None:
                break
            self._eliminate(*pick)
        return self.rank

    def _next_pivot(self):
        # stale heap entries are skipped on pop; push-on-update keeps both heaps lazily correct
        while self.col_heap:
            cnt, c = self.col_heap[0]
            live = self.col_rows.get(c)
            if not live:
                heappop(self.col_heap)
                continue
            if cnt != len(live):
                heappop(self.col_heap)
                heappush(self.col_heap, (len(live), c))
                continue
            if cnt == 1:
                (r,) = live
                return r, c
            break
        while self.row_heap:
            size, r = self.row_heap[0]
            row = self.rows.get(r)
            if row is None:
                heappop(self.row_heap)
                continue
            if size != len(row):
                heappop(self.row_heap)
                heappush(self.row_heap, (len(row), r))
                continue
            if size == 1:
                (c,) = row
                return r, c
            break
        if not self.col_heap:
            return None
        _, c = self.col_heap[0]
        live = sorted(self.col_rows[c])
        r = min(live, key=lambda rr: (len(self.rows[rr]), rr))
        return r, c

    def _eliminate(self, r, c):
        prow = self.rows.pop(r)
        v = prow[c]
        for cc in prow:
            s = self.col_rows.get(cc)
            if s is not None:
                s.discard(r)
                if not s:
                    del self.col_rows[cc]
        targets = self.col_rows.pop(c, ())
        p = self.p
        for rr in list(targets):
            row = self.rows[rr]
            w = row.pop(c)
            if p is None:
                g = gcd(v, w)
                a, b = v // g, -(w // g)
                if a == 1:
                    for cc, pv in prow.items():
                        if cc == c:
                            continue
                        nv = row.get(cc, 0) + b * pv
                        self._set(row, rr, cc, nv)
                else:
                    for cc in list(row):
                        row[cc] *= a
                    for cc, pv in prow.items():
                        if cc == c:
                            continue
                        nv = row.get(cc, 0) + b * pv
                        self._set(row, rr, cc, nv)
                _normalize_int_row(row)
            else:
                factor = (w * pow(v, -1, p)) % p
                for cc, pv in prow.items():
                    if cc == c:
                        continue
                    nv = (row.get(cc, 0) - factor * pv) % p
                    self._set(row, rr, cc, nv)
            if not row:
                del self.rows[rr]
            else:
                heappush(self.row_heap, (len(row), rr))
        self.rank += 1
        if self.keep:
            self.pivots.append((c, prow))

    def _set(self, row, rr, cc, nv):
        if nv:
            had = cc in row
            row[cc] = nv
            if not had:
                self.col_rows.setdefault(cc, set()).add(rr)
                heappush(self.col_heap, (len(self.col_rows[cc]), cc))
        else:
            if cc in row:
                del row[cc]
                s = self.col_rows.get(cc)
                if s is not None:
                    s.discard(rr)
                    if not s:
                        del self.col_rows[cc]


def rank(matrix: SparseMatrix) -> int:
    rows = _integer_rows(matrix)
    if not rows:
        return 0
    elim = _Eliminator(rows, matrix.field.p, keep=False, max_rank=min(matrix.rows, matrix.cols))
    return elim.run()


def row_echelon(matrix: SparseMatrix):
    """Pivot rows of the row space, in elimination order: list of (col, rowdict)."""
    rows = _integer_rows(matrix)
    elim = _Eliminator(rows, matrix.field.p, keep=True)
    elim.run()
    return elim.pivots


def kernel_basis(matrix: SparseMatrix):
    vecs, _ = _kernel_with_free(matrix)
    return vecs


def _kernel_with_free(matrix: SparseMatrix):
    """Basis of the right kernel, one vector per free column.

    Each vector carries entry 1 (after integer normalization: a positive
    integer) at its own free column and 0 at every other free column, so the
    basis is in reduced echelon form with respect to the free columns and is
    fully deterministic.
    """
    f = matrix.field
    pivots = row_echelon(matrix)
    pivot_cols = [c for c, _ in pivots]
    pivot_set = set(pivot_cols)
    free_cols = [c for c in range(matrix.cols) if c not in pivot_set]
    basis = []
    for fc in free_cols:
        vec = {fc: f.one if f.p else Fraction(1)}
        # rows were produced in elimination order; each is zero on earlier
        # pivot columns, so solving in reverse order is pure back-substitution
        for c, row in reversed(pivots):
            s = f.zero
            for cc, v in row.items():
                if cc == c:
                    continue
                x = vec.get(cc)
                if x:
                    s = f.add(s, f.mul(f.of(v) if f.p is None else v % f.p, x))
            if s:
                piv = f.of(row[c]) if f.p is None else row[c] % f.p
                vec[c] = f.neg(f.mul(s, f.inv(piv)))
        if f.p is None:
            denlcm = 1
            for v in vec.values():
                denlcm = denlcm * v.denominator // gcd(denlcm, v.denominator)
            ints = {c: int(v * denlcm) for c, v in vec.items()}
            g = 0
            for v in ints.values():
                g = gcd(g, v)
            if g > 1:
                ints = {c: v // g for c, v in ints.items()}
            if ints.get(fc, 0) < 0:
                ints = {c: -v for c, v in ints.items()}
            vec = {c: Fraction(v) for c, v in ints.items() if v}
        basis.append(vec)
    return basis, free_cols


class Subspace:
    """A subspace of k^n held as echelon rows with recorded pivots.

    Vectors reduce uniquely against the space: the remainder is the canonical
    representative vanishing on every pivot coordinate, so `reduce` doubles as
    a membership test and as quotient coordinates.
    """

    def __init__(self, field, ambient: int, pivots):
        self.field = field
        self.ambient = ambient
        self.pivots = pivots  # list of (coord, rowdict) in reduction order

    @classmethod
    def from_vectors(cls, field, ambient, vectors):
        """Span of sparse vectors (dicts coord -> scalar)."""
        m = SparseMatrix(
            field, len(vectors), ambient,
            [(i, c, v) for i, vec in enumerate(vectors) for c, v in vec.items() if v],
        )
        return cls(field, ambient, row_echelon(m))

    @classmethod
    def image(cls, matrix: SparseMatrix):
        """Column space, via row echelon of the transpose."""
        return cls(matrix.field, matrix.rows, row_echelon(matrix.transpose()))

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def basis_vectors(self):
        f = self.field
        out = []
        for _, row in self.pivots:
            if f.p is None:
                out.append({c: Fraction(v) for c, v in row.items()})
            else:
                out.append({c: v % f.p for c, v in row.items()})
        return out

    def reduce(self, vec: dict):
        """Return (coeffs, remainder): vec = sum coeffs[k] * pivot_row[k] + remainder."""
        f = self.field
        vec = {c: v for c, v in vec.items() if v}
        coeffs = []
        for c, row in self.pivots:
            x = vec.get(c)
            if not x:
                coeffs.append(f.zero)
                continue
            piv = f.of(row[c]) if f.p is None else row[c] % f.p
            t = f.mul(x, f.inv(piv))
            coeffs.append(t)
            for cc, v in row.items():
                sv = f.of(v) if f.p is None else v % f.p
                w = f.sub(vec.get(cc, f.zero), f.mul(t, sv))
                if w:
                    vec[cc] = w
                elif cc in vec:
                    del vec[cc]
        return coeffs, vec

    def contains(self, vec: dict) -> bool:
        _, rem = self.reduce(vec)
        return not rem

    def contains_space(self, other) -> bool:
        return all(self.contains(v) for v in other.basis_vectors())

    def extended(self, vec: dict):
        """Span plus one vector already reduced against this space.

        The caller must pass a vector vanishing on every current pivot
        coordinate (e.g. a nonzero remainder from reduce).
        """
        vec = {c: v for c, v in vec.items() if v}
        if not vec:
            return self
        f = self.field
        if f.p is None:
            denom = 1
            for v in vec.values():
                denom = denom * Fraction(v).denominator // gcd(denom, Fraction(v).denominator)
            ints = {c: int(Fraction(v) * denom) for c, v in vec.items()}
            g = 0
            for v in ints.values():
                g = gcd(g, v)
            ints = {c: v // g for c, v in ints.items()}
        else:
            ints = {c: v % f.p for c, v in vec.items()}
        coord = min(vec)
        return Subspace(f, self.ambient, self.pivots + [(coord, ints)])


def solve_homogeneous(matrix: SparseMatrix) -> Subspace:
    """Solution space of M x = 0 as a Subspace of k^cols."""
    f = matrix.field
    vecs, free_cols = _kernel_with_free(matrix)
    # kernel vectors are already mutually reduced at their free columns
    pivots = []
    for fc, v in zip(free_cols, vecs):
        ints = {c: (x % f.p if f.p else int(x)) for c, x in v.items()}
        pivots.append((fc, ints))
    return Subspace(f, matrix.cols, pivots)


def composition_is_zero(d_out: SparseMatrix, d_in: SparseMatrix) -> None:
    prod = d_out.matmul(d_in)
    if not prod.is_zero():
        key = sorted(prod.entries)[0]
        raise CompositionNotZero((key[0], key[1], prod.entries[key]))


def homology_dim(d_out: SparseMatrix, d_in: SparseMatrix) -> int:
    """dim ker(d_out) - rank(d_in) for consecutive maps with d_out . d_in = 0."""
    if d_out.cols != d_in.rows:
        raise InputError(
            f"differentials do not chain: {d_out.rows}x{d_out.cols} after {d_in.rows}x{d_in.cols}"
        )
    composition_is_zero(d_out, d_in)
    return (d_out.cols - rank(d_out)) - rank(d_in)
