"""Bound-quiver presentations via terminating rewriting on paths.

Words are arrow tuples in composition order (rightmost arrow acts first),
so the displayed name of a path is just the concatenation of its arrow
labels.  A rule replaces a leading word of length >= 2 by a linear
combination of strictly smaller parallel paths (length-lex on labels), which
forces termination; confluence up to the cap is checked by resolving every
overlap of leading words.
"""

from .errors import InfiniteDimensional, InputError, NotConfluent
from .fields import QQ
from .quiver import Quiver
from .algebras import FinDimAlgebra


def _word_key(word):
    return (len(word), tuple(str(a) for a in word))


class RewritePresentation:
    def __init__(self, quiver: Quiver, rules, cap: int = 10, field=QQ):
        """rules: list of (leading word tuple, {word tuple: coefficient})."""
        self.quiver = quiver
        self.cap = cap
        self.field = field
        self.rules = []
        for lead, combo in rules:
            lead = tuple(lead)
            if len(lead) < 2:
                raise InputError(f"leading word {lead} must have length >= 2")
            self._check_path(lead)
            clean = {}
            for w, c in combo.items():
                w = tuple(w)
                c = field.of(c)
                if not c:
                    continue
                self._check_path(w)
                if self._endpoints(w) != self._endpoints(lead):
                    raise InputError(f"replacement {w} not parallel to {lead}")
                if _word_key(w) >= _word_key(lead):
                    raise InputError(
                        f"replacement {w} not smaller than leading word {lead};"
                        " rewriting would not terminate"
                    )
                clean[w] = c
            self.rules.append((lead, clean))
        self.rules.sort(key=lambda r: _word_key(r[0]))
        leads = [lead for lead, _ in self.rules]
        if len(set(leads)) != len(leads):
            raise InputError("duplicate leading words in rules")
        self._nf_cache = {}

    def _check_path(self, word):
        q = self.quiver
        for left, right in zip(word, word[1:]):
            if q.source(left) != q.target(right):
                raise InputError(f"word {word} is not a path")

    def _endpoints(self, word):
        q = self.quiver
        return (q.source(word[-1]), q.target(word[0]))

    # -- rewriting -----------------------------------------------------------

    def _find_redex(self, word):
        """Leftmost occurrence of the first matching rule. None if normal."""
        for start in range(len(word)):
            for ridx, (lead, _) in enumerate(self.rules):
                if word[start:start + len(lead)] == lead:
                    return start, ridx
        return None

    def normal_form(self, word, coeff=None):
        """Rewrite a single word to a combination of normal words."""
        word = tuple(word)
        if coeff is None:
            coeff = self.field.one
        cached = self._nf_cache.get(word)
        if cached is None:
            hit = self._find_redex(word)
            if hit is None:
                cached = {word: self.field.one}
            else:
                start, ridx = hit
                lead, combo = self.rules[ridx]
                cached = {}
                for rep, c in combo.items():
                    sub = word[:start] + rep + word[start + len(lead):]
                    for w2, c2 in self.normal_form(sub).items():
                        self._acc(cached, w2, self.field.mul(c, c2))
            self._nf_cache[word] = cached
        if coeff == self.field.one:
            return dict(cached)
        return {w: self.field.mul(c, coeff) for w, c in cached.items()}

    def _acc(self, acc, w, c):
        v = self.field.add(acc.get(w, self.field.zero), c)
        if v:
            acc[w] = v
        elif w in acc:
            del acc[w]

    def reduce_combo(self, combo: dict) -> dict:
        out = {}
        for w, c in combo.items():
            for w2, c2 in self.normal_form(w, c).items():
                self._acc(out, w2, c2)
        return out

    # -- confluence ----------------------------------------------------------

    def check_confluent(self):
        """Resolve all overlaps of leading words; raise NotConfluent on failure."""
        for i, (u, _) in enumerate(self.rules):
            for j, (v, _) in enumerate(self.rules):
                # proper overlap: a suffix of u equals a prefix of v
                for k in range(1, min(len(u), len(v))):
                    if u[-k:] == v[:k]:
                        word = u + v[k:]
                        self._resolve(word, u, v)
                # containment: v inside u (only for distinct rules)
                if i != j and len(v) < len(u):
                    for start in range(len(u) - len(v) + 1):
                        if u[start:start + len(v)] == v:
                            self._resolve(u, u, v)
        return True

    def _resolve(self, word, u, v):
        # reduce using u first, then fully; and using v first, then fully
        left = self._reduce_with_first(word, u)
        right = self._reduce_with_first(word, v)
        if left != right:
            raise NotConfluent(u, v, f"on word {word}: {left} != {right}")

    def _reduce_with_first(self, word, lead):
        for start in range(len(word)):
            if word[start:start + len(lead)] == lead:
                combo = dict(next(c for l, c in self.rules if l == lead))
                out = {}
                for rep, c in combo.items():
                    sub = word[:start] + rep + word[start + len(lead):]
                    for w2, c2 in self.normal_form(sub, c).items():
                        self._acc(out, w2, c2)
                return out
        raise InputError(f"{lead} does not occur in {word}")

    # -- normal-form basis ---------------------------------------------------

    def normal_words(self):
        """All normal-form paths, or raise InfiniteDimensional past the cap.

        Trivial paths are returned as ('vertex', v); proper paths as
        ('word', tuple).  Sorted: vertices first (declaration order), then
        words by length-lex on labels.
        """
        q = self.quiver
        out = [("vertex", v) for v in q.vertices]
        leads = [lead for lead, _ in self.rules]
        frontier = [(a,) for a, _, _ in q.arrows]
        frontier = [w for w in frontier]
        while frontier:
            too_long = [w for w in frontier if len(w) > self.cap]
            if too_long:
                raise InfiniteDimensional(too_long[0])
            out.extend(("word", w) for w in frontier)
            nxt = []
            for w in frontier:
                src = q.source(w[-1])
                for c in q.arrows_into(src):
                    w2 = w + (c,)
                    # every proper subword of w2 except suffixes is already normal
                    if any(w2[len(w2) - len(l):] == l for l in leads):
                        continue
                    nxt.append(w2)
            frontier = nxt
        def keyfn(item):
            kind, val = item
            if kind == "vertex":
                return (0, q.vertices.index(val), ())
            return (1, len(val), tuple(str(a) for a in val))
        out.sort(key=keyfn)
        return out


def algebra_from_presentation(pres: RewritePresentation) -> FinDimAlgebra:
    """Basis = normal-form paths; product = concatenate then rewrite."""
    pres.check_confluent()
    words = pres.normal_words()
    q = pres.quiver
    f = pres.field
    index = {wd: i for i, wd in enumerate(words)}

    def label_of(item):
        kind, val = item
        return f"e_{val}" if kind == "vertex" else "".join(str(a) for a in val)

    def endpoints(item):
        kind, val = item
        if kind == "vertex":
            return (val, val)
        return (q.source(val[-1]), q.target(val[0]))

    dim = len(words)
    table = [[{} for _ in range(dim)] for _ in range(dim)]
    for i, wi in enumerate(words):
        si, ti = endpoints(wi)
        for j, wj in enumerate(words):
            sj, tj = endpoints(wj)
            # product b_i * b_j = path i after path j
            if si != tj:
                continue
            if wi[0] == "vertex" and wj[0] == "vertex":
                word = None if wi[1] != wj[1] else ("vertex", wi[1])
                if word:
                    table[i][j] = {i: f.one}
                continue
            if wi[0] == "vertex":
                table[i][j] = {j: f.one}
                continue
            if wj[0] == "vertex":
                table[i][j] = {i: f.one}
                continue
            combo = pres.normal_form(wi[1] + wj[1])
            cell = {}
            for w, c in combo.items():
                if len(w) > pres.cap:
                    raise InfiniteDimensional(w)
                cell[index[("word", w)]] = c
            table[i][j] = cell
    unit = {}
    system = []
    for v in q.vertices:
        i = index[("vertex", v)]
        unit[i] = f.one
        system.append({i: f.one})
    return FinDimAlgebra(f, [label_of(wd) for wd in words], table, unit, system)
