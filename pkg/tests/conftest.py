from fractions import Fraction

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def Q(rows):
    """Exact matrix (or vector) from nested ints/strings."""
    return np.array([[Fraction(v) for v in r] for r in rows] if isinstance(rows[0], (list, tuple))
                    else [Fraction(v) for v in rows], dtype=object)


def matrix_oracle_parts(A):
    """Jordan parts from a brute-force complex eigendecomposition with clustering.

    Independent of the library: generalized eigenspace projectors are built
    from the Jordan form of sympy.
    """
    import sympy

    M = sympy.Matrix(A.tolist())
    P, Jf = M.jordan_form()
    n = M.shape[0]
    diag = sympy.diag(*[Jf[i, i] for i in range(n)])
    S = P * diag * P.inv()
    Eh = P * sympy.diag(*[sympy.I * sympy.im(Jf[i, i]) for i in range(n)]) * P.inv()
    Hh = P * sympy.diag(*[sympy.re(Jf[i, i]) for i in range(n)]) * P.inv()
    to = lambda X: np.array(sympy.N(sympy.simplify(X), 30).tolist(), dtype=complex).real
    return to(Eh), to(Hh), to(M - S)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
