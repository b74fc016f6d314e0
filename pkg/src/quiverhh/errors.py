"""Exception types shared across the package.

Every validation failure raises a named error carrying a witness of the
violated condition, so callers (and the CLI) can report what broke without
re-deriving it.
"""


class QuiverHHError(Exception):
    """Base class for all package errors."""


class InputError(QuiverHHError):
    """Invalid user-supplied data (CLI exit code 1)."""


class ParseError(InputError):
    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{position}: {message}"
        super().__init__(message)


class BudgetExceeded(QuiverHHError):
    """A requested matrix would exceed the configured size budget (exit 2)."""

    def __init__(self, rows, cols, budget, context=""):
        self.rows = rows
        self.cols = cols
        self.budget = budget
        msg = f"matrix of dense size {rows}x{cols} = {rows * cols} exceeds budget {budget}"
        if context:
            msg += f" ({context})"
        super().__init__(msg)


class ConsistencyError(QuiverHHError):
    """An internal cross-check failed (exit 3): the computation is wrong, not the input."""


class CompositionNotZero(ConsistencyError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"matrices do not compose to zero, witness entry {witness}")


class NotAssociative(InputError):
    def __init__(self, i, j, k):
        self.triple = (i, j, k)
        super().__init__(f"product not associative on basis triple {(i, j, k)}")


class BadUnit(InputError):
    def __init__(self, detail):
        super().__init__(f"unit fails: {detail}")


class BadSystem(InputError):
    def __init__(self, detail):
        super().__init__(f"idempotent system fails: {detail}")


class NotInSystem(InputError):
    pass


class AlgebraMismatch(InputError):
    """Bimodule action axioms fail, or algebras attached to a construction disagree."""


class InvalidQSet(InputError):
    pass


class AssociativityViolated(InputError):
    """The square-algebra associativity diagrams fail on a basis triple."""

    def __init__(self, triple, detail=""):
        self.triple = triple
        msg = f"associativity constraint fails on basis triple {triple}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class NotSimplyLaced(InputError):
    def __init__(self, detail):
        super().__init__(f"quiver is not simply laced: {detail}")


class NotConfluent(InputError):
    def __init__(self, word1, word2, detail=""):
        self.pair = (word1, word2)
        super().__init__(f"rewriting system not confluent on overlap {word1} / {word2} {detail}")


class InfiniteDimensional(InputError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"normal forms do not terminate below the length cap, witness {witness}")


class TorHypothesisFails(QuiverHHError):
    def __init__(self, index, degree, dim):
        self.index = index
        self.degree = degree
        super().__init__(
            f"Tor vanishing fails at path position {index}: Tor_{degree} has dim {dim}"
        )


class NotProjective(QuiverHHError):
    def __init__(self, detail):
        super().__init__(f"bimodule not projective: {detail}")


class NotACocycle(InputError):
    def __init__(self, detail=""):
        super().__init__(f"cochain is not a cocycle {detail}")


class LiftNotInSubcomplex(ConsistencyError):
    def __init__(self, detail=""):
        super().__init__(f"differential of lift left the expected subcomplex {detail}")


class ExactnessFailure(ConsistencyError):
    def __init__(self, node, detail):
        self.node = node
        super().__init__(f"long exact sequence fails at {node}: {detail}")
