"""Exception types raised across the package."""


class DwLatticeError(Exception):
    """Base class for all package errors."""


class DegenerateWell(DwLatticeError):
    """A lattice cell does not split into exactly two sub-wells."""


class ConvergenceFailure(DwLatticeError):
    """The eigensolver did not converge."""


class PoorOverlap(DwLatticeError):
    """A state is not well represented by the retained eigenstates."""


class BadDomain(DwLatticeError):
    """Grid extent or resolution is incompatible with the lattice."""


class NonHermitianResidual(DwLatticeError):
    """An expectation value that should be real has a large imaginary part."""


class ParseError(DwLatticeError):
    def __init__(self, message, line=None, key=None):
        context = []
        if line is not None:
            context.append(f"line {line}")
        if key is not None:
            context.append(f"key {key!r}")
        if context:
            message = f"{message} ({', '.join(context)})"
        super().__init__(message)
        self.line = line
        self.key = key


class ValidationError(DwLatticeError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class UnknownPreset(DwLatticeError):
    pass
