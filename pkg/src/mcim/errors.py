"""Exception hierarchy shared by all mcim modules."""


class MCIMError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(MCIMError):
    """Raised by :func:`mcim.config.validate` with every violated invariant."""

    def __init__(self, violations):
        self.violations = list(violations)
        msg = "; ".join(f"{v.code}: {v.message}" for v in self.violations)
        super().__init__(msg or "invalid configuration")


class UncheckedNetlist(MCIMError):
    """The netlist failed structural checking and cannot be simulated or analysed."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(str(p) for p in self.problems))


class StimulusWidthOverflow(MCIMError):
    pass


class EmptyOperand(MCIMError):
    pass


class HeightExceedsKind(MCIMError):
    pass


class TooManyRows(MCIMError):
    pass


class WidthTooSmall(MCIMError):
    pass


class ExcessiveRecursion(MCIMError):
    pass


class WidthNotPositive(MCIMError):
    pass


class WidthMismatch(MCIMError):
    pass


class VerilogParseError(MCIMError):
    pass
