"""Exception types shared across the library."""


class LibsvmParseError(ValueError):
    """Malformed LibSVM input. Carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DegenerateClassError(ValueError):
    """A class exists in the label dictionary but has no samples."""


class ModelFormatError(ValueError):
    """Model file is malformed, truncated, or has an unsupported version."""


class ConfigurationError(ValueError):
    """Mutually inconsistent run configuration (e.g. model/test class mismatch)."""
