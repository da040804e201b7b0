"""Exception types raised by whlkit."""


class WhlkitError(Exception):
    """Base class for all whlkit errors."""


class EmptySample(WhlkitError):
    """A sample with zero observations was supplied."""


class EmptySet(WhlkitError):
    """A weighted median was requested on an empty value/weight set."""


class EmptyPairSet(WhlkitError):
    """The requested index scheme yields no pairs (n=1 with the strict scheme)."""


class LengthMismatch(WhlkitError):
    """Value and weight sequences differ in length."""


class NonPositiveWeight(WhlkitError):
    """A weight was zero or negative; all weights must be strictly positive."""


class SampleTooLarge(WhlkitError):
    """The exhaustive contamination search is limited to small samples."""


class BadParameters(WhlkitError):
    """Distribution or sample-spec parameters violate their constraints."""


class InsufficientReplications(WhlkitError):
    """Fewer than two replications were requested; variances are undefined."""


class BadCase(WhlkitError):
    """Unknown sensitivity-study case identifier."""
