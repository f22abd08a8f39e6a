"""Exception hierarchy shared across the simulator."""


class OverlaySimError(Exception):
    """Base class for every error raised by this package."""


class MalformedToken(OverlaySimError):
    """Input does not match the component token grammar."""


class InvalidConfig(OverlaySimError):
    """A configuration value violates its invariants."""


class InvalidTheme(OverlaySimError):
    """Theme index out of range."""


class UnknownPeer(OverlaySimError):
    """Peer id not present in the topology."""


class ArityExceedsExpertise(OverlaySimError):
    """Query arity larger than a peer's expertise."""


class EmptyCounts(OverlaySimError):
    """Entropy requested for an empty class-count map."""


class EmptyDataset(OverlaySimError):
    """No records to train or evaluate on."""


class InconsistentArity(OverlaySimError):
    """Training records disagree on feature count."""


class ArityMismatch(OverlaySimError):
    """Feature or field count differs from the expected arity."""


class ValueNotInDomain(OverlaySimError):
    """A value is missing from its nominal attribute domain."""


class ParseError(OverlaySimError):
    """Malformed input document."""


class SchedulingInPast(OverlaySimError):
    """Event scheduled before the current simulated time."""


class MissingSSP(OverlaySimError):
    """Knowledge routing requires a topology with the super-super-peer."""


class UntrainedTree(OverlaySimError):
    """Knowledge routing requires a trained decision tree."""


class UnknownColumn(OverlaySimError):
    """Requested column absent from a CSV table."""
