class HypothesisViolation(ValueError):
    """An input fails one of the standing hypotheses (nilpotency, theta(Omega)=0, ...).

    ``hypothesis`` is a short stable name such as ``"omega-not-in-im-theta"``;
    ``value`` carries the offending object when there is one.
    """

    def __init__(self, hypothesis: str, message: str, value=None):
        super().__init__(f"{hypothesis}: {message}")
        self.hypothesis = hypothesis
        self.value = value


class ConstructionError(RuntimeError):
    """A fact the construction relies on failed to hold; always a bug or a bad input."""


class FormatError(ValueError):
    """Malformed input file or JSON payload."""


class GenerationError(RuntimeError):
    """The instance sampler ran out of attempts."""
