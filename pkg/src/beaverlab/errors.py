"""Exception types shared across the package."""


class BeaverError(Exception):
    """Base class for all beaverlab errors."""


# -- machine text format ------------------------------------------------------

class MalformedText(BeaverError):
    """Machine string does not match the text format."""


class StateOutOfRange(MalformedText):
    """A rule names a state letter beyond the machine's state count."""


class SymbolOutOfRange(MalformedText):
    """A rule writes a symbol >= the machine's symbol count."""


# -- transforms ---------------------------------------------------------------

class DoesNotHalt(BeaverError):
    """The input machine did not halt within the given limits."""


class NotBinary(BeaverError):
    """Transform requires a 2-symbol machine."""


class TooFewStates(BeaverError):
    """Transform requires at least 2 states."""


class NotChampion(BeaverError):
    """Championship evidence contradicts the claimed maximality."""


class ClaimViolated(BeaverError):
    """A claimed score inequality failed verification.

    Carries the two RunResults so callers can inspect the counterexample.
    """

    def __init__(self, message, input_result=None, output_result=None):
        super().__init__(message)
        self.input_result = input_result
        self.output_result = output_result


class ConversionOverflow(BeaverError):
    """A transform would produce an absurdly large alphabet."""


# -- introspection ------------------------------------------------------------

class UnreachableState(BeaverError):
    """Machine has states that never occur in its blank-tape run."""


class InconsistentClassification(BeaverError):
    """Transition classification does not match the witness run."""


class MalformedBits(BeaverError):
    """Description bits cannot be decoded."""


class ReplayDivergence(BeaverError):
    """Replay of a description exceeded limits; the description is corrupt."""


class Underflow(BeaverError):
    """capacity_check called with n <= overhead d."""


# -- search -------------------------------------------------------------------

class SpaceTooLarge(BeaverError):
    """Search space exceeds the configured enumeration guard."""
