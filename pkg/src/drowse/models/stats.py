"""Sample Pearson correlation, the pipeline's sole performance metric."""

from __future__ import annotations

import math
from typing import Sequence

from drowse.models.errors import ConstantInput, DimensionMismatch


def pearson_r(pred: Sequence[float], actual: Sequence[float]) -> float:
    x = [float(v) for v in pred]
    y = [float(v) for v in actual]
    n = len(x)
    if n != len(y):
        raise DimensionMismatch(f"length mismatch: {n} vs {len(y)}")
    if n < 2:
        raise ConstantInput("need at least 2 points")
    mx = sum(x) / n
    my = sum(y) / n
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0.0 or syy == 0.0:
        raise ConstantInput("correlation undefined for a constant vector")
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    r = sxy / math.sqrt(sxx * syy)
    # float spill can push |r| marginally past 1
    return max(-1.0, min(1.0, r))
