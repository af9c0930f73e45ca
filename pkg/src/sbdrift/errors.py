"""Exception types shared across the package."""


class SamplingBudgetError(RuntimeError):
    """Rejection sampling exhausted its attempt budget."""


class TruthNotConvergedError(RuntimeError):
    """Quadrature refinement failed to certify the requested tolerance."""


class DegenerateConditioningError(RuntimeError):
    """A population denominator is too small for the ratio to be meaningful."""


class EstimatorFlooredError(RuntimeError):
    """The estimate was zeroed by the density/denominator floor, so a
    downstream statistic that conditions on the non-floored event is
    not applicable."""


class RatioTransferNotApplicableError(RuntimeError):
    """The empirical event behind the ratio-transfer bound fails, so the
    bound makes no claim for this sample."""


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""
