"""Exception types shared across the package."""


class InvalidDimensionError(ValueError):
    """Operator/state dimensions do not match or are unusable."""


class CalibrationInfeasibleError(ValueError):
    """Noise calibration has no solution (e.g. T2 too small relative to tau)."""


class ConfigurationError(ValueError):
    """A scheme or ion configuration violates a hard feasibility condition."""


class DecouplingInfeasibleError(ConfigurationError):
    """Decoupling drive too weak: Omega_DD/(2*pi) must exceed f_cr."""


class InvalidScanError(ValueError):
    """A spectrum scan grid does not satisfy the scan's preconditions."""


class TruncationOverflowError(RuntimeError):
    """Population leaked into the top Fock levels beyond tolerance.

    Carries the first offending time in ``time`` (seconds) and, when raised
    from a trajectory, the trajectory ``seed``.
    """

    def __init__(self, time: float, population: float, tol: float,
                 seed: int | None = None, column: int = 0):
        self.time = time
        self.population = population
        self.tol = tol
        self.seed = seed
        self.column = column
        msg = (f"top-two Fock level population {population:.3e} exceeds "
               f"tolerance {tol:.3e} at t = {time:.6e} s; raise n_trunc")
        if seed is not None:
            msg += f" (trajectory seed {seed})"
        super().__init__(msg)

    def __reduce__(self):
        return (TruncationOverflowError,
                (self.time, self.population, self.tol, self.seed, self.column))
