"""Built-in manufactured solutions on the unit square."""

import numpy as np

from .errors import ExactSolution


def _g(t):
    return t * t * (1.0 - t) ** 2


def _dg(t):
    return 2.0 * t * (1.0 - t) * (1.0 - 2.0 * t)


def _ddg(t):
    return 2.0 - 12.0 * t + 12.0 * t * t


def builtin_solution(sid: int) -> ExactSolution:
    """Manufactured solution 1 (clamped polynomial-like bump) or 2 (sine product)."""
    if sid == 1:
        def u(p):
            return _g(p[:, 0]) * _g(p[:, 1])

        def grad(p):
            x, y = p[:, 0], p[:, 1]
            return np.column_stack([_dg(x) * _g(y), _g(x) * _dg(y)])

        def lap(p):
            x, y = p[:, 0], p[:, 1]
            return _ddg(x) * _g(y) + _g(x) * _ddg(y)

        def source(p):
            x, y = p[:, 0], p[:, 1]
            return 24.0 * _g(y) + 2.0 * _ddg(x) * _ddg(y) + 24.0 * _g(x)

        return ExactSolution("example1", u, grad, lap, source)

    if sid == 2:
        pi = np.pi

        def u(p):
            return np.sin(pi * p[:, 0]) * np.sin(pi * p[:, 1])

        def grad(p):
            x, y = p[:, 0], p[:, 1]
            return pi * np.column_stack(
                [np.cos(pi * x) * np.sin(pi * y), np.sin(pi * x) * np.cos(pi * y)]
            )

        def lap(p):
            return -2.0 * pi * pi * u(p)

        def source(p):
            return 4.0 * pi**4 * u(p)

        return ExactSolution("example2", u, grad, lap, source)

    raise ValueError(f"unknown built-in solution id {sid!r} (expected 1 or 2)")
