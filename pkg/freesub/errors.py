"""Exceptions shared by the library, the CLI and the JSON API.

Every exception carries the CLI exit code and the HTTP status it maps to, so the
two outer surfaces translate errors in exactly one place each.
"""


class FreesubError(Exception):
    exit_code = 1
    status_code = 500


class PreconditionError(FreesubError):
    """An operation was called outside its documented domain."""
    exit_code = 2
    status_code = 422


class ResourceLimitError(FreesubError):
    """A construction produced a core larger than the configured cap."""
    exit_code = 3
    status_code = 503

    def __init__(self, message, vertices=None, limit=None):
        super().__init__(message)
        self.vertices = vertices
        self.limit = limit


class ParseError(FreesubError, ValueError):
    """Malformed textual input. `line` is 1-based, `position` 0-based."""
    exit_code = 4
    status_code = 400

    def __init__(self, message, line=None, position=None):
        where = []
        if line is not None:
            where.append(f'line {line}')
        if position is not None:
            where.append(f'position {position}')
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.position = position


class WordSyntaxError(ParseError):
    pass


class GraphFormatError(ParseError):
    pass


class SubgroupFileError(ParseError):
    pass
