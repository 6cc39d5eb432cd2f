from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class SpaceParams:
    """Identifies A_m^2(B_n, mu_alpha) or its Siegel-domain image."""

    n: int
    m: int
    alpha: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"dimension n must be a positive integer, got {self.n}")
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"order m must be a positive integer, got {self.m}")
        if not self.alpha > -1:
            raise DomainError(f"alpha must exceed -1, got {self.alpha}")
