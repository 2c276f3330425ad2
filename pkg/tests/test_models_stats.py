import math
import random

import pytest

from drowse.models import ConstantInput, pearson_r


def test_identical_vectors():
    assert pearson_r([1.0, 2.0, 5.0], [1.0, 2.0, 5.0]) == 1.0


def test_negated_vector():
    assert pearson_r([1.0, 2.0, 5.0], [-1.0, -2.0, -5.0]) == -1.0


def test_hand_value():
    # cov = 3, var_x = 2, var_y = 42/9 -> r = 9 / sqrt(84)
    r = pearson_r([1, 2, 3], [1, 2, 4])
    assert abs(r - 9.0 / math.sqrt(84.0)) < 1e-12
    assert abs(r - 0.982) < 1e-3


def test_constant_input_raises():
    with pytest.raises(ConstantInput):
        pearson_r([1, 1, 1], [1, 2, 3])
    with pytest.raises(ConstantInput):
        pearson_r([1, 2, 3], [4, 4, 4])


def test_affine_invariance_and_sign_flip():
    rng = random.Random(7)
    for _ in range(50):
        x = [rng.gauss(0, 1) for _ in range(20)]
        y = [rng.gauss(0, 1) for _ in range(20)]
        r = pearson_r(x, y)
        scaled = [3.5 * v + 11.0 for v in x]
        assert abs(pearson_r(scaled, y) - r) < 1e-10
        flipped = [-2.0 * v + 1.0 for v in y]
        assert abs(pearson_r(x, flipped) + r) < 1e-10


def test_result_clamped_to_unit_interval():
    rng = random.Random(3)
    for _ in range(200):
        x = [rng.gauss(0, 1) for _ in range(5)]
        y = [v * 1e-8 for v in x]
        assert -1.0 <= pearson_r(x, y) <= 1.0
