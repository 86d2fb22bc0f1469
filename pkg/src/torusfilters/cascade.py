"""Fourier transforms of scaling functions and wavelets by truncated products.

``Phi_N(x) = prod_{k=1..N} m0(B^-k x) / q`` with ``B = A^T``, and
``psi_i(x) = m_i(B^-1 x) Phi_N(B^-1 x) / q``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BadDepthError, MismatchedDilationError, NoCoefficientFormError
from .fileio import atomic_write
from .lattice import DilationMatrix
from .torusfn import TorusFunction

DEFAULT_DEPTH = 40


def _points(x, n: int) -> tuple[np.ndarray, tuple[int, ...]]:
    """Coerce ``x`` to shape ``(P, n)``; return the batch shape to restore."""
    a = np.asarray(x, dtype=float)
    if n == 1 and (a.ndim == 0 or a.shape[-1] != 1):
        batch = a.shape
        return a.reshape(-1, 1), batch
    if a.shape[-1] != n:
        raise ValueError(f"points must have last axis of length {n}, got {a.shape}")
    return a.reshape(-1, n), a.shape[:-1]


def _restore(v: np.ndarray, batch: tuple[int, ...]):
    return complex(v[0]) if batch == () else v.reshape(batch)


@dataclass
class ScalingTransform:
    """Truncated cascade product for a low-pass ``m0`` (coefficient form).

    Calling the object evaluates ``Phi_N`` at one point or a batch of points
    (last axis of length ``n``; plain scalars are accepted when ``n = 1``).
    """

    m0: TorusFunction
    A: DilationMatrix
    depth: int = DEFAULT_DEPTH
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.m0.has_coeffs:
            raise NoCoefficientFormError("the cascade needs m0 as a trigonometric polynomial")
        if self.m0.n != self.A.n:
            raise MismatchedDilationError(f"m0 lives on T^{self.m0.n}, A is {self.A.n}x{self.A.n}")
        if int(self.depth) < 1:
            raise BadDepthError(f"depth must be >= 1, got {self.depth}")
        self._B = self.A.B.astype(float)

    @property
    def q(self) -> int:
        return self.A.q

    def step_back(self, y: np.ndarray) -> np.ndarray:
        """``B^-1 y`` for ``y`` of shape ``(P, n)`` by a linear solve."""
        return np.linalg.solve(self._B, y.T).T

    def factors(self, x, depth: int | None = None) -> np.ndarray:
        """The individual factors ``m0(B^-k x) / q``, shape ``(depth, P)``."""
        N = self.depth if depth is None else int(depth)
        if N < 1:
            raise BadDepthError(f"depth must be >= 1, got {N}")
        y, _ = _points(x, self.A.n)
        out = np.empty((N, len(y)), dtype=complex)
        for k in range(N):
            y = self.step_back(y)
            out[k] = self.m0.evaluate(y) / self.q
        return out

    def __call__(self, x, depth: int | None = None):
        _, batch = _points(x, self.A.n)
        return _restore(self.factors(x, depth).prod(axis=0), batch)

    def convergence(self, x) -> dict:
        """Sup differences ``|Phi_N - Phi_{N-1}|`` and ``|Phi_N - Phi_{2N}|`` over ``x``."""
        f = self.factors(x, 2 * self.depth)
        cum = np.cumprod(f, axis=0)
        N = self.depth
        step = np.abs(cum[N - 1] - cum[N - 2]).max() if N >= 2 else float("nan")
        return {"depth": N, "step_diff": float(step),
                "doubling_diff": float(np.abs(cum[N - 1] - cum[2 * N - 1]).max())}

    def on_box(self, box, resolution) -> tuple[np.ndarray, np.ndarray]:
        """Grid points of ``box`` and cached ``Phi_N`` values there."""
        X = box_points(box, resolution, self.A.n)
        key = (X.shape, X.tobytes(), self.depth)
        if key not in self._cache:
            self._cache[key] = self(X)
        return X, self._cache[key]


def scaling_fourier(m0: TorusFunction, A: DilationMatrix, x, N: int = DEFAULT_DEPTH):
    """``prod_{k=1..N} m0(B^-k x) / q``; ``1`` at ``x = 0`` whenever ``m0(0) = q``."""
    return ScalingTransform(m0, A, N)(x)


def wavelet_fourier(m_i: TorusFunction, scaling: ScalingTransform, x,
                    A: DilationMatrix | None = None):
    """``m_i(B^-1 x) Phi_N(B^-1 x) / q``.

    Passing ``A`` checks that the high-pass filter belongs to the same dilation.
    """
    if A is not None and A != scaling.A:
        raise MismatchedDilationError("wavelet filter and scaling transform use different dilations")
    if m_i.n != scaling.A.n:
        raise MismatchedDilationError(f"filter lives on T^{m_i.n}, dilation is on R^{scaling.A.n}")
    if not m_i.has_coeffs:
        raise NoCoefficientFormError("the wavelet transform needs m_i as a trigonometric polynomial")
    y, batch = _points(x, scaling.A.n)
    y = scaling.step_back(y)
    return _restore(m_i.evaluate(y) * scaling(y) / scaling.q, batch)


def box_points(box, resolution, n: int) -> np.ndarray:
    """Lexicographic sample grid over ``box``, shape ``(P, n)``.

    ``box`` is ``(lo, hi)`` for every axis or one pair per axis;
    ``resolution`` an int or one per axis. Zero-width axes give one sample.
    """
    b = np.asarray(box, dtype=float)
    if b.shape == (2,):
        b = np.tile(b, (n, 1))
    if b.shape != (n, 2):
        raise ValueError(f"box must be (lo, hi) or {n} such pairs")
    res = np.broadcast_to(np.asarray(resolution, dtype=int), (n,))
    axes = []
    for (lo, hi), r in zip(b, res):
        if hi < lo:
            raise ValueError(f"empty box axis [{lo}, {hi}]")
        if hi == lo or r <= 1:
            axes.append(np.array([lo]))
        else:
            axes.append(np.linspace(lo, hi, int(r)))
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)


@dataclass
class ExportReport:
    path: str
    rows: int
    convergence: dict

    def to_json(self) -> dict:
        return {"path": self.path, "rows": self.rows, "convergence": self.convergence}


def sample_export(transform: ScalingTransform, box, resolution, out,
                  wavelets: Sequence[TorusFunction] = ()) -> ExportReport:
    """Write ``x_1..x_n, re, im`` (plus ``psi<i>_re, psi<i>_im`` per wavelet) as CSV."""
    X, phi = transform.on_box(box, resolution)
    n = transform.A.n
    psis = [np.atleast_1d(wavelet_fourier(m, transform, X)) for m in wavelets]
    header = [f"x{i + 1}" for i in range(n)] + ["re", "im"]
    for i in range(len(psis)):
        header += [f"psi{i + 1}_re", f"psi{i + 1}_im"]
    phi = np.atleast_1d(phi)

    def write(fh):
        w = csv.writer(fh)
        w.writerow(header)
        for j in range(len(X)):
            row = [repr(float(c)) for c in X[j]] + [repr(float(phi[j].real)), repr(float(phi[j].imag))]
            for p in psis:
                row += [repr(float(p[j].real)), repr(float(p[j].imag))]
            w.writerow(row)

    atomic_write(out, write)
    return ExportReport(str(out), len(X), transform.convergence(X))
