"""Exception types shared by the solvers and the command line.

The command line maps ValidationError to exit status 1 and NumericalError to
exit status 2.
"""


class MembraneError(Exception):
    """Base class for every error raised by this code"""


class ValidationError(MembraneError, ValueError):
    """An input violates a documented precondition"""


class MeshFormatError(ValidationError):
    """A mesh or field file could not be parsed"""

    def __init__(self, path, line, reason):
        self.path = path
        self.line = line
        self.reason = reason
        super(MeshFormatError, self).__init__("%s:%i: %s" % (path, line, reason))


class NumericalError(MembraneError):
    """A computation could not produce a meaningful number"""


class ContinuationError(NumericalError):
    """A continuation stage failed; `report` holds the stages completed so far"""

    def __init__(self, message, report):
        self.report = report
        super(ContinuationError, self).__init__(message)
