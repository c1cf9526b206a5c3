"""Exception types shared across the toolkit.

Every error carries a short machine-readable ``category`` string; the CLI
prints it in its one-line error output and the HTTP service echoes it in
error payloads.
"""


class CongrecError(Exception):
    category = "error"

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.message = message


class AllZeroCounts(CongrecError):
    category = "all_zero_counts"


class LengthMismatch(CongrecError):
    category = "length_mismatch"


class DimensionMismatch(CongrecError):
    category = "dimension_mismatch"


class InvalidDistribution(CongrecError):
    category = "invalid_distribution"


class InvalidReportedPersonality(CongrecError):
    category = "invalid_reported_personality"


class EmptyCohort(CongrecError):
    category = "empty_cohort"


class DegenerateSplit(CongrecError):
    category = "degenerate_split"


class SingleClassTrainingSet(CongrecError):
    category = "single_class_training_set"


class SingleClassInput(CongrecError):
    category = "single_class_input"


class NonFiniteFeature(CongrecError):
    category = "non_finite_feature"


class MTooLarge(CongrecError):
    category = "m_too_large"


class EmptyGrid(CongrecError):
    category = "empty_grid"


class EmptyRanges(CongrecError):
    category = "empty_ranges"


class WrongFeatureKind(CongrecError):
    category = "wrong_feature_kind"


class InvalidConfig(CongrecError):
    category = "invalid_config"


class SchemaMismatch(CongrecError):
    category = "schema_mismatch"


class RangeViolation(CongrecError):
    category = "range_violation"


class UnknownActivityItem(CongrecError):
    category = "unknown_activity_item"


class ModelNotFound(CongrecError):
    category = "model_not_found"


class UnknownUser(CongrecError):
    category = "user_not_found"


class DataNotFound(CongrecError):
    category = "data_not_found"


class ParseError(CongrecError):
    category = "parse_error"

    def __init__(self, message: str, line: int | None = None, column: str | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", field {column!r})" if column else ")")
        super().__init__(message + loc)
        self.line = line
        self.column = column
