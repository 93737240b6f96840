"""
Error Hierarchy

Every error carries the exit code the command line reports for it.
"""


class SparsePoseError(Exception):
    """Base class for toolkit errors (internal failure)"""
    exit_code = 4


class ParseError(SparsePoseError):
    """Malformed file, JSON document or CSV row"""
    exit_code = 2

    def __init__(self, message, path=None, line=None, field=None):
        context = []
        if path is not None:
            context.append(str(path))
        if line is not None:
            context.append(f'line {line}')
        if field is not None:
            context.append(f'field {field!r}')
        if context:
            message = f"{', '.join(context)}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line
        self.field = field


class InputFileError(SparsePoseError):
    """Missing or unreadable input file"""
    exit_code = 2


class ValidationError(SparsePoseError):
    """A value violates a documented invariant"""
    exit_code = 3


class DimensionError(ValidationError):
    """Shapes or landmark counts do not agree"""


class InvalidParameterError(ValidationError):
    """A scalar parameter is outside its admissible range"""


class InvalidInputError(ValidationError):
    """Input data is non-finite or otherwise unusable"""


class DegenerateBasisError(ValidationError):
    """A basis row has zero norm and cannot be normalized"""


class AlignmentUndefinedError(ValidationError):
    """Procrustes alignment of a collapsed point set"""
