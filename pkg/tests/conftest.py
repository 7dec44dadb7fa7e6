import os

import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.register_profile("default", max_examples=50, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=500, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

TEMPLATE = np.array([
    270, 2290, 3010, 390, 1990, 2550, 530, 1840, 2480, 660, 1720, 2410, 520, 1190, 2390,
    730, 1090, 2440, 570, 840, 2410, 440, 1020, 2240, 300, 870, 2240, 490, 1350, 1690,
], dtype=float)


@pytest.fixture
def template_values():
    return TEMPLATE.copy()


@pytest.fixture
def labels30():
    return [(v, k) for v in ("aa", "ae", "ah", "ao", "eh", "er", "ih", "iy", "uh", "uw") for k in (1, 2, 3)]
