from dataclasses import dataclass
from enum import Enum
from typing import Tuple

from ..utils.validators import ErrorMessages


class Profile(str, Enum):
    TENT = "tent"
    SMOOTH_BUMP = "smooth-bump"


class WeightKind(str, Enum):
    CONSTANT = "constant"
    LINEAR = "linear"
    POLYNOMIAL = "polynomial"
    TENT = "tent"


@dataclass(frozen=True)
class CompactObservable:
    """Compactly supported observable b with values in [0, 1] and b(center) = 1"""

    center: Tuple[float, ...]
    radius: float
    profile: Profile = Profile.TENT
    id: int = 0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(ErrorMessages.RADIUS_NOT_POSITIVE.format(value=self.radius))
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "profile", Profile(self.profile))

    @property
    def dimension(self) -> int:
        return len(self.center)

    @property
    def lipschitz(self) -> float:
        """Lipschitz constant with respect to the l1 norm"""
        if self.profile is Profile.TENT:
            return 1.0 / self.radius
        # max of |d/dt (1 - t^2)^2| on [0, 1] is 8 / (3 sqrt 3)
        return 8.0 / (3.0 * 3.0 ** 0.5) / self.radius


@dataclass(frozen=True)
class Weight:
    """Weight function on [0, 1] normalized to unit integral

    polynomial of degree k is (k + 1) z^k, linear is the degree-one case 2z,
    tent is a C1 quartic bump (15 / 16h) (1 - s^2)^2 with s = (z - center) / h, h = width / 2.
    """

    kind: WeightKind = WeightKind.CONSTANT
    degree: int = 0
    center: float = 0.5
    width: float = 0.5

    def __post_init__(self):
        kind = WeightKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is WeightKind.CONSTANT:
            object.__setattr__(self, "degree", 0)
        elif kind is WeightKind.LINEAR:
            object.__setattr__(self, "degree", 1)
        elif kind is WeightKind.POLYNOMIAL and self.degree < 0:
            raise ValueError(f"polynomial weight degree must be >= 0, got {self.degree}")
        elif kind is WeightKind.TENT:
            low, high = self.center - self.width / 2, self.center + self.width / 2
            if not self.width > 0 or low < 0 or high > 1:
                raise ValueError(ErrorMessages.TENT_OUTSIDE_UNIT.format(low=low, high=high))

    @property
    def half_width(self) -> float:
        return self.width / 2

    @property
    def label(self) -> str:
        if self.kind is WeightKind.TENT:
            return f"tent@{self.center:g}"
        if self.kind is WeightKind.POLYNOMIAL:
            return f"poly{self.degree}"
        return self.kind.value

    def derivative_bound(self) -> float:
        """sup over [0, 1] of |w'| in closed form"""
        if self.kind is WeightKind.TENT:
            h = self.half_width
            return 15.0 / (4.0 * h * h) * 2.0 / (3.0 * 3.0 ** 0.5)
        k = self.degree
        return float((k + 1) * k)


@dataclass(frozen=True)
class ObservableDictionary:
    """Ordered finite family of observables covering the box [lower, upper]"""

    observables: Tuple[CompactObservable, ...]
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "observables", tuple(self.observables))
        if not self.observables:
            raise ValueError(ErrorMessages.DICTIONARY_EMPTY)

    def __len__(self) -> int:
        return len(self.observables)

    def __iter__(self):
        return iter(self.observables)

    def __getitem__(self, index: int) -> CompactObservable:
        return self.observables[index]
