"""Exception types raised by the solvers and the I/O layer."""


class MhdmError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(MhdmError, ValueError):
    pass


class NonHermitianSpectrum(MhdmError, ValueError):
    """A spectrum that should describe a real image violates conjugate symmetry."""


class ZeroPolynomial(MhdmError, ValueError):
    pass


class NoRealRoot(MhdmError, ArithmeticError):
    """Raised when a per-frequency quintic yields no admissible real root.

    Odd-degree real polynomials always have a real root, so this signals a
    coefficient construction bug. ``bin_index`` and ``iteration`` are filled
    in by the callers that know them.
    """

    def __init__(self, message, bin_index=None, iteration=None):
        super().__init__(message)
        self.bin_index = bin_index
        self.iteration = iteration

    def __str__(self):
        msg = super().__str__()
        if self.bin_index is not None:
            msg += f" (bin {tuple(int(i) for i in self.bin_index)})"
        if self.iteration is not None:
            msg += f" (iteration {self.iteration})"
        return msg


class IndexOutOfRange(MhdmError, IndexError):
    pass


class InvalidSigma(MhdmError, ValueError):
    pass


class InvalidWeights(MhdmError, ValueError):
    pass


class TooSmall(MhdmError, ValueError):
    pass


class ZeroReference(MhdmError, ValueError):
    pass


class ConfigError(MhdmError, ValueError):
    pass
