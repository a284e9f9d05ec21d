# ## @DOC
# ### MRR Errors
# Exception hierarchy shared by the simulator modules and the CLI error report.


"""
Errors raised by the MRR accelerator simulator.

Every error carries a stable ``code`` so the CLI can emit a machine-readable
report, and a ``details`` mapping with whatever context the raiser had
(file and line for parse errors, offending field for validation errors).
"""


class MrrSimError(Exception):
    code = "error"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        report = {"error": self.code, "message": str(self)}
        for key, value in self.details.items():
            report[key] = value if isinstance(value, (int, float, str, bool)) else str(value)
        return report


# Configuration family (CLI exit code 2)


class ConfigError(MrrSimError):
    code = "config_error"


class InvalidN(ConfigError):
    code = "invalid_n"


class InvalidEnum(ConfigError):
    code = "invalid_enum"


class NonPositiveDimension(ConfigError):
    code = "non_positive_dimension"


class InvalidParameter(ConfigError):
    code = "invalid_parameter"


class MissingPeripheral(ConfigError):
    code = "missing_peripheral"


class InvalidConfig(ConfigError):
    """Aggregate of every violation found while validating one config."""

    code = "invalid_config"

    def __init__(self, violations):
        self.violations = list(violations)
        summary = "; ".join(str(v) for v in self.violations)
        super().__init__(f"{len(self.violations)} violation(s): {summary}")

    def to_dict(self):
        report = super().to_dict()
        report["violations"] = [v.to_dict() for v in self.violations]
        return report


# Everything else (CLI exit code 1)


class IoError(MrrSimError):
    code = "io_error"


class NoConvergence(MrrSimError):
    code = "no_convergence"


class NonPhysical(MrrSimError):
    code = "non_physical"


class WrongKind(MrrSimError):
    code = "wrong_kind"


class ParseError(MrrSimError):
    code = "parse_error"


class InvariantViolation(MrrSimError):
    code = "invariant_violation"


class EmptyMatrix(MrrSimError):
    code = "empty_matrix"


class ShapeMismatch(MrrSimError):
    code = "shape_mismatch"


class NoWork(MrrSimError):
    code = "no_work"
