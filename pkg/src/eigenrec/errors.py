"""Exception hierarchy shared by all eigenrec modules."""


class EigenrecError(Exception):
    """Base class for every error raised by the library."""


class PGMError(EigenrecError, ValueError):
    pass


class DatasetError(EigenrecError):
    pass


class LinAlgError(EigenrecError, ValueError):
    pass


class ConvergenceError(LinAlgError):
    pass


class TrainingError(EigenrecError, ValueError):
    pass


class DimensionError(EigenrecError, ValueError):
    pass


class ModelFormatError(EigenrecError, ValueError):
    pass
