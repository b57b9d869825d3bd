"""Library-wide exception types."""


class PercolabError(Exception):
    pass


class ForeignPointError(PercolabError):
    """Point kind does not match the space."""


class DegenerateCellError(PercolabError):
    """Cell with no usable measure."""


class PreconditionError(PercolabError):
    """A documented runtime precondition failed (CLI exit code 2)."""


class SchemaError(PercolabError):
    """Config file failed validation (CLI exit code 1)."""
