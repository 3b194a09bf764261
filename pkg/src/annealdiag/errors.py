"""Exception types shared across the package."""


class GenerationError(RuntimeError):
    """Instance generation could not satisfy its constraints."""


class ResourceLimitError(ValueError):
    """Requested system size exceeds the configured cap for this backend."""


class DegenerateConditionError(ValueError):
    """A conditional slice carries zero probability weight."""


class DegenerateProbeError(ValueError):
    """A probe readout has a zero count; more reads are needed."""


class IntegrationError(RuntimeError):
    """A numerical integration violated its conservation tolerance."""


class ReplayFormatError(ValueError):
    """A replay file does not match the documented schema."""
