import numpy as np
import pytest

from torusfilters.lattice import validate_dilation
from torusfilters.torusfn import TorusFunction

QUINCUNX = [[1, 1], [1, -1]]
OBSTRUCTION = [
    [0, 0, 0, 0, 3],
    [1, 0, 0, 0, 0],
    [0, 1, 0, 0, 0],
    [0, 0, 1, 0, 0],
    [0, 0, 0, 1, 0],
]

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def dyadic():
    return validate_dilation([[2]])


@pytest.fixture
def quincunx():
    return validate_dilation(QUINCUNX)


@pytest.fixture
def haar_m():
    m0 = TorusFunction.from_coeffs({(0,): 1, (1,): 1})
    m1 = TorusFunction.from_coeffs({(1,): 1, (0,): -1})
    return m0, m1


@pytest.fixture
def quincunx_m():
    m0 = TorusFunction.from_coeffs({(0, 0): 1, (1, 0): 1})
    m1 = TorusFunction.from_coeffs({(1, 0): 1, (0, 0): -1})
    return m0, m1


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def smooth_lowpass_q2(A, shape, alpha=0.3, beta=0.7):
    """Normalized two-channel low-pass filter that is not a polynomial.

    ``h0 = (u0(Bx) + e_p(x) u1(Bx)) / sqrt(2)`` where ``u`` is a unit vector
    field with ``u(0) = (1, 1) / sqrt(2)``; any such choice satisfies both
    low-pass conditions because functions of ``Bx`` are F-invariant.
    """
    grids = np.meshgrid(*[np.arange(N) / N for N in shape], indexing="ij")
    X = np.stack(grids, axis=-1)
    Y = X @ A.B.T.astype(float)
    s = np.sin(2 * np.pi * Y).sum(-1)
    c = np.cos(2 * np.pi * Y[..., 0]) - 1
    a = np.pi / 4 + alpha * s
    b = beta * c + alpha * s
    p = np.asarray(A.coset_representatives[1], dtype=float)
    ep = np.exp(2j * np.pi * (X @ p))
    return TorusFunction.from_grid((np.cos(a) + ep * np.exp(1j * b) * np.sin(a)) / np.sqrt(2))
