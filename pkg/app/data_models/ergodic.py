from dataclasses import dataclass

import numpy as np

from .grid import _frozen


@dataclass(frozen=True, eq=False)
class CorrelationRecord:
    """C[n-1, m-1] = integral over Q of b(U_n) b(U_m), for 1 <= n, m <= N

    measure is |Q|, kept with the record so diagnostics can normalize by it.
    """

    observable_id: int
    N: int
    matrix: np.ndarray
    measure: float

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=np.float64)
        if matrix.shape != (self.N, self.N):
            raise ValueError(f"correlation matrix must be {self.N}x{self.N}, got {matrix.shape}")
        object.__setattr__(self, "matrix", _frozen(matrix))

    def entry(self, n: int, m: int) -> float:
        return float(self.matrix[n - 1, m - 1])

    def column(self, m: int) -> np.ndarray:
        """C[n, m] for n = 1..N"""
        return self.matrix[:, m - 1]
