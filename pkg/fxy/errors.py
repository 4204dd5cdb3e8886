from __future__ import annotations

from typing import Sequence


class FxyError(Exception):
    pass


class DimensionError(FxyError, ValueError):
    pass


class SiteLabelError(FxyError, ValueError):
    pass


class InvalidStateError(FxyError, ValueError):
    pass


class NonHermitianError(FxyError, ValueError):
    pass


class ViolationsError(FxyError, ValueError):
    """An error that carries every violation found, each identified by the path of the offending field."""

    def __init__(self, violations: Sequence[tuple[str, str]]):
        self.violations = list(violations)
        super().__init__(
            "; ".join(f"{path}: {msg}" for path, msg in self.violations)
        )

    def paths(self) -> list[str]:
        return [path for path, _ in self.violations]


class DeviceValidationError(ViolationsError):
    pass


class ConfigError(ViolationsError):
    pass


class SingularFluxError(FxyError, ValueError):
    pass


class ResonanceError(FxyError, ValueError):
    pass


class AmplitudeGuardError(FxyError, ValueError):
    pass


class DimensionCapError(FxyError, ValueError):
    pass


class DriveReferenceError(FxyError, ValueError):
    pass


class TimeStepError(FxyError, ValueError):
    pass


class TimeGridError(FxyError, ValueError):
    pass


class NegativeRateError(FxyError, ValueError):
    pass


class BasisLabelError(FxyError, ValueError):
    pass


class UnequalStrengthError(FxyError, ValueError):
    pass


class CalibrationFitError(FxyError):
    def __init__(self, triple: int, message: str):
        self.triple = triple
        super().__init__(f"triple {triple}: {message}")


class HorizonError(FxyError, ValueError):
    pass


class SeriesTooShortError(FxyError, ValueError):
    pass


class EmptyGridError(FxyError, ValueError):
    pass
