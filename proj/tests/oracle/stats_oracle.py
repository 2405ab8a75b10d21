"""Reference values for the Student-t intervals used in test_metrics.cpp (scipy)."""
import numpy as np
from scipy import stats


def half_width(xs, level=0.90):
    xs = np.asarray(xs, dtype=float)
    return stats.t.ppf(0.5 + level / 2, len(xs) - 1) * xs.std(ddof=1) / np.sqrt(len(xs))


if __name__ == "__main__":
    print("1..5 @0.90", repr(half_width([1, 2, 3, 4, 5])))
    print("4 scores @0.90", repr(half_width([35.92, 42.36, 42.97, 39.79])))
    print("t(0.975, 10)", repr(stats.t.ppf(0.975, 10)))
    print("t(0.9, 1)", repr(stats.t.ppf(0.9, 1)))
