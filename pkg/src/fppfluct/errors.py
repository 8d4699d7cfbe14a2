"""Exception types shared across the package."""


class InvalidParameter(ValueError):
    """A caller-supplied argument is outside its documented range."""


class WindowOverflow(RuntimeError):
    """Torus search window could not be certified after all retries."""

    def __init__(self, m, w, message=None):
        self.m = m
        self.w = w
        super().__init__(message or f"torus window overflow at start row m={m}, half-width w={w}")


class WitnessNotFound(RuntimeError):
    """No fluctuation interval reaches the requested tail probability."""

    def __init__(self, best_c, message=None):
        self.best_c = best_c
        super().__init__(message or f"no interval found; best achievable tail probability {best_c:.6g}")
