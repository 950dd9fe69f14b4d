"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map error classes to
distinct process exit statuses.
"""


class WLEmbedError(Exception):
    exit_code = 1


class GraphError(WLEmbedError, ValueError):
    exit_code = 2


class IndexOutOfRange(GraphError, IndexError):
    pass


class SelfLoop(GraphError):
    pass


class LabelOutOfAlphabet(GraphError):
    pass


class SmilesError(WLEmbedError, ValueError):
    exit_code = 3


class UnknownAtom(SmilesError):
    pass


class UnbalancedParenthesis(SmilesError):
    pass


class DanglingRingClosure(SmilesError):
    pass


class EmptyInput(SmilesError):
    pass


class EmbeddingError(WLEmbedError, ValueError):
    exit_code = 4


class UninternedLabel(EmbeddingError, KeyError):
    pass


class DimensionMismatch(EmbeddingError):
    pass


class AutodiffError(WLEmbedError, ValueError):
    exit_code = 5


class NonScalarOutput(AutodiffError):
    pass


class EmptyGraph(AutodiffError):
    pass


class TrainingError(WLEmbedError, ValueError):
    exit_code = 6


class EmptyDataset(TrainingError):
    pass


class TargetTypeMismatch(TrainingError):
    pass


class GenerationError(WLEmbedError, ValueError):
    exit_code = 7


class InfeasibleDegreeSequence(GenerationError):
    pass


class GenerationBudgetExceeded(GenerationError, RuntimeError):
    pass


class TheoryError(WLEmbedError, ValueError):
    exit_code = 8


class SizeOverflow(TheoryError, OverflowError):
    pass


class DimensionTooSmall(TheoryError):
    pass


class EvaluationError(WLEmbedError, ValueError):
    exit_code = 9


class LengthMismatch(EvaluationError):
    pass


class EmptyInputError(EvaluationError):
    """Metric evaluated on zero samples."""


class SingleClass(EvaluationError):
    pass


class WrongEmbeddingVariant(EvaluationError):
    pass


class ShufflePoolTooSmall(EvaluationError):
    """No replacement label differs from the original one."""
