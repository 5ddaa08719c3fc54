"""Exception hierarchy shared by the library and the CLI."""


class ProdisoError(Exception):
    """Base class for every error raised by prodiso."""


class AxiomViolation(ProdisoError):
    """A distance matrix breaks a metric axiom.

    ``kind`` is one of ``"asymmetry"``, ``"negative"``, ``"zero-off-diagonal"``,
    ``"nonzero-diagonal"``, ``"triangle"``; ``witness`` holds the offending
    point labels (a triple ``(x, z, y)`` for the triangle inequality,
    meaning ``d(x, z) > d(x, y) + d(y, z)``).
    """

    def __init__(self, kind, witness, message=None):
        self.kind = kind
        self.witness = tuple(witness)
        super().__init__(message or f"{kind} violation at {self.witness}")


class ShapeError(ProdisoError):
    pass


class ResolutionMismatch(ProdisoError):
    pass


class InvalidChain(ProdisoError):
    pass


class TooSmall(ProdisoError):
    pass


class AxisMismatch(ProdisoError):
    pass


class ChainTooShort(ProdisoError):
    pass


class MissingParameter(ProdisoError):
    def __init__(self, factor, t):
        self.factor = factor
        self.t = t
        super().__init__(f"chain for factor {factor} has no point at parameter {t}")


class InvalidEmbedding(ProdisoError):
    pass


class SearchBudgetExceeded(ProdisoError):
    """A backtracking search hit its node cap before finishing.

    ``found`` carries whatever was established before the cap: partial
    solutions for enumerations, a lower bound for maximisations.
    """

    def __init__(self, cap, nodes, found=None, lower_bound=None):
        self.cap = cap
        self.nodes = nodes
        self.found = found
        self.lower_bound = lower_bound
        msg = f"search exceeded node cap {cap} after {nodes} nodes"
        if lower_bound is not None:
            msg += f" (lower bound {lower_bound})"
        super().__init__(msg)


class SizeMismatch(ProdisoError):
    pass


class DomainMismatch(ProdisoError):
    pass


class InvalidDecomposition(ProdisoError):
    pass


class NotPairwiseSlices(ProdisoError):
    pass


class NotCycleOfSlices(ProdisoError):
    pass


class ParseError(ProdisoError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
