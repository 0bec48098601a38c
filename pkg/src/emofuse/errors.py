"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, data/format errors -> 3,
NumericError -> 4.
"""


class EmofuseError(Exception):
    pass


class ConfigError(EmofuseError):
    """Invalid configuration value or schema violation."""


class DimensionError(EmofuseError):
    """Array shape inconsistent with the declared layer/vector dimensions."""


class DataError(EmofuseError):
    """Bad input data (empty splits, degenerate vectors, unsupported layouts)."""


class LabelError(DataError):
    """Label outside the active emotion scheme."""


class FormatError(DataError):
    """Malformed binary container (bad magic, version, truncation)."""


class ManifestError(DataError):
    """Manifest-level problem (duplicate ids, unresolvable references)."""


class NumericError(EmofuseError):
    """Numeric contract violation (non-finite values, non-positive step sizes)."""
