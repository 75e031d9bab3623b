import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from maskspread import masks  # noqa: E402


@pytest.fixture
def three_masks():
    """Surgical / cloth / no-mask ensemble used for the mean-degree and T sweeps."""
    return masks.MaskEnsemble.from_efficiencies(
        [0.2, 0.5, 1.0], [0.3, 0.5, 1.0], 0.6, [0.3, 0.6, 0.1], ["surgical", "cloth", "no-mask"]
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
