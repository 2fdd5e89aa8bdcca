from typing import Protocol
from typing import Sequence
from typing import TYPE_CHECKING
from typing import Union

import numpy as np


if TYPE_CHECKING:
    from .series import LambdaGrid


class PathLike(Protocol):
    """Anything the self-normalizers can integrate: a grid and one value per grid point."""

    grid: "LambdaGrid"
    values: np.ndarray


RealSequence = Union[Sequence[float], np.ndarray]

GridInput = Union["LambdaGrid", int, None]
