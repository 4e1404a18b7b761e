"""Network output model."""
from dataclasses import dataclass

from src.numerics.tensor import Tensor


@dataclass
class ModelOutput:
    """Current-frame grids produced by the three heads.

    heatmap: [1,R,R] in (0,1); dims: [2,R,R] in (0,1) as (width, height)
    fractions; disp: [2,R,R] in (-1,1) as normalized (dx, dy).
    """

    heatmap: Tensor
    dims: Tensor
    disp: Tensor

    @property
    def grid_size(self) -> int:
        return self.heatmap.shape[-1]
