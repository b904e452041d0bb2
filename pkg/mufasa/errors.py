"""mufasa.errors
   =============

   Exception and warning classes shared across mufasa.

   Every error raised on purpose by mufasa derives from ``MufasaError`` and
   carries a category, which the command line maps onto an exit code.

   :license: Apache License, Version 2.0, see LICENSE for details.
"""

# Exit codes per error category
EXIT_CODES = {
    'config': 2,
    'data': 3,
    'numeric': 4,
    'checkpoint': 5,
}


class MufasaError(Exception):
    """Base class for errors raised by mufasa."""

    category = 'runtime'

    @property
    def exit_code(self):
        return EXIT_CODES.get(self.category, 1)


class DimensionError(MufasaError):
    """Operand shapes do not agree."""

    category = 'numeric'


class RankError(MufasaError):
    """A scalar was required but a higher-rank tensor was supplied."""

    category = 'numeric'


class NonFiniteError(MufasaError):
    """A tensor would hold NaN or Inf values."""

    category = 'numeric'


class DegenerateRowError(MufasaError):
    """Every entry of a softmax row is masked out."""

    category = 'numeric'


class ZeroNormError(MufasaError):
    """A cosine similarity was requested against a zero-norm vector."""

    category = 'numeric'


class TapeError(MufasaError):
    """A backward pass was requested for a value that was never taped."""

    category = 'numeric'


class UnpopulatedGradientError(MufasaError):
    """An optimizer step met a parameter without a gradient."""

    category = 'numeric'


class InsufficientNegativesError(MufasaError):
    """A contrastive loss has too few in-batch negatives."""

    category = 'numeric'


class EmptySampleError(MufasaError):
    """A loss was asked to average over an empty sample."""

    category = 'numeric'


class EmptyBlockError(MufasaError):
    """An interest block holds no interactions."""

    category = 'numeric'


class EmptySelectionError(MufasaError):
    """Selective attention received no core items."""

    category = 'numeric'


class InvalidPairError(MufasaError):
    """A consistency pair joins an item with itself."""

    category = 'numeric'


class MetricError(MufasaError):
    """Metric input out of range: a rank below 1, no targets, or a value
    outside [0, 1]."""

    category = 'numeric'


class NonFiniteLossError(MufasaError):
    """A loss component evaluated to NaN or Inf."""

    category = 'numeric'

    def __init__(self, component, value=None, detail=None):
        self.component = component
        self.value = value
        detail = f'value: {value}' if detail is None else detail
        super().__init__(
            f"Loss component '{component}' is not finite ({detail})"
        )


class ConfigError(MufasaError):
    """Invalid run configuration."""

    category = 'config'


class DataFormatError(MufasaError):
    """A catalog or interaction file failed to parse or validate."""

    category = 'data'

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        location = ''
        if path is not None:
            location = f'{path}'
            if line is not None:
                location += f':{line}'
            location += ': '
        super().__init__(location + message)


class CheckpointError(MufasaError):
    """A checkpoint is missing or does not match the model."""

    category = 'checkpoint'


class MufasaWarning(Warning):
    """Base warning class - useful for testing"""


class DegenerateBatchWarning(MufasaWarning):
    pass


class TopKClampWarning(MufasaWarning):
    pass


class ColdStartWarning(MufasaWarning):
    pass


class SplitWarning(MufasaWarning):
    pass


class GradcheckFailure(MufasaError):
    """Analytic gradients disagree with finite differences."""

    category = 'numeric'
