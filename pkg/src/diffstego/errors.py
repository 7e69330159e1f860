"""Exception types shared across the toolkit."""


class SteganoError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(SteganoError):
    """Image too small to partition (both sides must be >= 3)."""


class PixelRangeError(SteganoError):
    """Reconstruction produced a value outside [0, 255]; the error map is corrupt."""


class CapacityError(SteganoError):
    """Payload does not fit the available embedding space."""

    def __init__(self, required, available, detail=""):
        self.required = int(required)
        self.available = int(available)
        msg = f"capacity exceeded: required {self.required} bits, available {self.available} bits"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class NoZeroBinError(CapacityError):
    """No zero-frequency bin exists right of 0; the image is not embeddable."""

    def __init__(self):
        super().__init__(0, 0, "no zero-frequency histogram bin in (0, 255]")


class MalformedStegoError(SteganoError):
    """The stego object does not decode to a structurally valid payload."""


class InvalidKeyError(SteganoError):
    """Key parameters violate the accepted ranges or formats."""


class KeyRangeError(InvalidKeyError):
    """Codeword integer falls outside the enumerable key space."""


class ChaosDomainError(SteganoError):
    """Chaotic map input outside its domain."""


class ScheduleError(SteganoError):
    """Invalid noise-schedule parameters."""


class NonFiniteStateError(SteganoError):
    """An ODE trajectory produced NaN or infinity."""


class SeparatorError(SteganoError):
    """A key string contains the reserved '#' separator byte."""


class ProtocolError(SteganoError):
    """Estimator backend sent or received a malformed frame."""


class BackendError(SteganoError):
    """Estimator backend process failed to start or died mid-session."""
