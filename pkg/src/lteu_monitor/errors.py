"""Exception types raised across the package."""


class ContractError(ValueError):
    """An input violated a documented precondition or type invariant."""


class InfeasibleScheduleError(ValueError):
    """A requested duty cycle cannot be laid out under the ON/OFF pattern."""


class StateMachineError(RuntimeError):
    """The PHY event feed drove the observer through an illegal transition."""


class DataInconsistencyError(ValueError):
    """A busy-period record is inconsistent with the estimator's model."""


class ConfigError(ValueError):
    """An experiment configuration failed validation."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
