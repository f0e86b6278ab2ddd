import math
import random
import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))


SYMBOLS = ("x", "y", "z")

_numbers = st.one_of(
    st.sampled_from([0.0, 1.0, -1.0, 2.0, 0.5, -3.0]),
    # keep constants in the normal range: inexact rewrites make no
    # accuracy promises through underflow or overflow
    st.floats(min_value=-100.0, max_value=100.0,
              allow_nan=False, allow_infinity=False,
              allow_subnormal=False).map(
                  lambda v: 0.0 if abs(v) < 1e-3 else v),
)


def expressions(max_depth: int = 4):
    """Random well-formed expression trees over x, y, z."""
    atoms = st.one_of(_numbers, st.sampled_from(SYMBOLS))

    def extend(children):
        return st.one_of(
            st.tuples(st.sampled_from(["+", "*"]), children, children),
            st.tuples(st.sampled_from(["+", "*"]), children, children,
                      children),
            st.tuples(st.sampled_from(["-", "/", "min", "max"]),
                      children, children),
            st.tuples(st.sampled_from(["abs", "sqrt"]), children),
        )

    return st.recursive(atoms, extend, max_leaves=2 ** max_depth)


@pytest.fixture
def rng():
    return random.Random(20260826)


def random_bindings(rng, symbols, *, positive=()):
    env = {}
    for s in symbols:
        if s in positive:
            env[s] = rng.uniform(1e-3, 10.0)
        else:
            v = 0.0
            while abs(v) < 1e-6:
                v = rng.uniform(-10.0, 10.0)
            env[s] = v
    return env


def ulp_distance(a: float, b: float) -> int:
    """Units in the last place between two finite doubles."""
    import struct

    def key(x):
        (n,) = struct.unpack("<q", struct.pack("<d", x))
        return n if n >= 0 else -(n & 0x7FFFFFFFFFFFFFFF)

    return abs(key(a) - key(b))


def rel_err(got: float, want: float) -> float:
    scale = max(abs(got), abs(want), 1.0)
    return abs(got - want) / scale


def assert_close(got, want, tol, label=""):
    assert rel_err(got, want) <= tol, \
        f"{label}: got {got!r}, want {want!r} (tol {tol})"


def central_difference(f, point: dict, var: str, h: float = 1e-6) -> float:
    hi = dict(point, **{var: point[var] + h})
    lo = dict(point, **{var: point[var] - h})
    return (f(hi) - f(lo)) / (2.0 * h)


def is_smooth_at(f, point: dict, var: str, h: float = 1e-6) -> bool:
    """Reject points near kinks of abs/min/max so the difference
    quotient actually approximates the derivative."""
    vals = []
    for d in (-2 * h, -h, 0.0, h, 2 * h):
        try:
            vals.append(f(dict(point, **{var: point[var] + d})))
        except (ZeroDivisionError, ValueError):
            return False
    if not all(math.isfinite(v) for v in vals):
        return False
    d1 = (vals[2] - vals[0]) / (2 * h)
    d2 = (vals[4] - vals[2]) / (2 * h)
    scale = max(abs(d1), abs(d2), 1.0)
    return abs(d1 - d2) <= 1e-3 * scale
