"""Complex functions on the n-torus and their module-valued bracket products.

A :class:`TorusFunction` carries a finite Fourier coefficient map, a table
of samples on a uniform grid, or both. Coefficient form is exact and can be
evaluated anywhere; grid form is what the non-polynomial filters live in.

Conventions
-----------
* ``f(x) = sum_k c_k exp(2 pi i k.x)`` with ``x`` in ``[0,1)^n``.
* The bracket is conjugate-linear in its second argument::

      <f, g>(x)  = q^{-1} sum_{w in F} f(x - w) conj(g(x - w))
      <f, g>'(x) =        sum_{w in F} f(x - w) conj(g(x - w))
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.signal import convolve

from .errors import IncompatibleGridError, OffGridError
from .lattice import CosetReps, DilationMatrix, DualGroupF

GRID_OVERSAMPLE = 16

Shape = tuple[int, ...]


def _clean_coeffs(coeffs: Mapping, n: int, drop: float = 0.0) -> dict[tuple[int, ...], complex]:
    out: dict[tuple[int, ...], complex] = {}
    for k, c in coeffs.items():
        key = tuple(int(x) for x in (k if isinstance(k, (tuple, list, np.ndarray)) else (k,)))
        if len(key) != n:
            raise ValueError(f"frequency {key} has wrong dimension (n={n})")
        out[key] = out.get(key, 0j) + complex(c)
    return {k: c for k, c in out.items() if abs(c) > drop}


class TorusFunction:
    """A complex-valued function on ``T^n``.

    Parameters
    ----------
    n : int
        Torus dimension.
    coeffs : mapping, optional
        Finite Fourier coefficients ``{k: c_k}`` keyed by integer tuples.
    grid : ndarray, optional
        Samples at ``(j_1/N_1, ..., j_n/N_n)`` with ``grid.shape == (N_1, ..., N_n)``.
    """

    __slots__ = ("n", "coeffs", "grid")

    def __init__(self, n: int, coeffs: Mapping | None = None, grid: np.ndarray | None = None):
        if coeffs is None and grid is None:
            raise ValueError("need coefficients or grid samples")
        self.n = int(n)
        self.coeffs = None if coeffs is None else _clean_coeffs(coeffs, self.n)
        if grid is not None:
            grid = np.asarray(grid, dtype=complex)
            if grid.ndim != self.n:
                raise ValueError(f"grid has {grid.ndim} axes, expected {self.n}")
            grid.setflags(write=False)
        self.grid = grid

    # constructors -----------------------------------------------------------

    @classmethod
    def from_coeffs(cls, coeffs: Mapping, n: int | None = None) -> TorusFunction:
        if n is None:
            k0 = next(iter(coeffs))
            n = len(k0) if isinstance(k0, (tuple, list)) else 1
        return cls(n, coeffs=coeffs)

    @classmethod
    def from_grid(cls, values: np.ndarray) -> TorusFunction:
        values = np.asarray(values, dtype=complex)
        return cls(values.ndim, grid=values)

    @classmethod
    def constant(cls, n: int, c: complex = 1.0) -> TorusFunction:
        return cls(n, coeffs={(0,) * n: c})

    @classmethod
    def character(cls, k: Sequence[int], c: complex = 1.0) -> TorusFunction:
        k = tuple(int(x) for x in k)
        return cls(len(k), coeffs={k: c})

    # representation helpers -------------------------------------------------

    @property
    def shape(self) -> Shape | None:
        return None if self.grid is None else self.grid.shape

    @property
    def has_coeffs(self) -> bool:
        return self.coeffs is not None

    def _coeff_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.coeffs:
            return np.zeros((0, self.n), dtype=np.int64), np.zeros(0, dtype=complex)
        K = np.array(list(self.coeffs.keys()), dtype=np.int64).reshape(-1, self.n)
        c = np.array(list(self.coeffs.values()), dtype=complex)
        return K, c

    def sample(self, shape: Sequence[int]) -> np.ndarray:
        """Values on the uniform grid of the given shape.

        Grid-only functions can be sampled on their own grid or on any grid
        whose resolution divides theirs; anything else raises
        :class:`OffGridError`.
        """
        shape = tuple(int(s) for s in shape)
        if len(shape) != self.n:
            raise ValueError(f"shape {shape} has wrong dimension (n={self.n})")
        if self.grid is not None:
            if self.grid.shape == shape:
                return self.grid
            if all(g % s == 0 for g, s in zip(self.grid.shape, shape)):
                return self.grid[tuple(slice(None, None, g // s) for g, s in zip(self.grid.shape, shape))]
        if self.coeffs is None:
            raise OffGridError(f"grid function of shape {self.grid.shape} sampled on {shape}")
        return _coeffs_on_grid(self.coeffs, self.n, shape)

    def with_grid(self, shape: Sequence[int]) -> TorusFunction:
        """Same function carrying both representations."""
        return TorusFunction(self.n, coeffs=self.coeffs, grid=self.sample(shape))

    def evaluate(self, x) -> complex | np.ndarray:
        """Evaluate at one point (shape ``(n,)``) or a batch (shape ``(..., n)``)."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim <= 1
        X = x.reshape(-1, self.n)
        if self.coeffs is not None:
            K, c = self._coeff_arrays()
            vals = np.exp(2j * np.pi * (X @ K.T.astype(float))) @ c if len(c) else np.zeros(len(X), complex)
        else:
            N = np.array(self.grid.shape, dtype=float)
            idx = X * N
            nearest = np.rint(idx)
            if np.abs(idx - nearest).max(initial=0.0) > 1e-9:
                raise OffGridError("grid-only function evaluated off its grid")
            ii = np.mod(nearest.astype(np.int64), N.astype(np.int64))
            vals = self.grid[tuple(ii.T)]
        if scalar:
            return complex(vals[0])
        return vals.reshape(x.shape[:-1])

    __call__ = evaluate

    # algebra ----------------------------------------------------------------

    def _combine_shape(self, other: TorusFunction) -> Shape | None:
        shapes = {s for s in (self.shape, other.shape) if s is not None}
        if len(shapes) > 1:
            raise IncompatibleGridError(f"grid shapes differ: {sorted(shapes)}")
        return shapes.pop() if shapes else None

    def __add__(self, other):
        if isinstance(other, TorusFunction):
            return self._binary(other, np.add, _add_coeffs)
        return self + TorusFunction.constant(self.n, other)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rsub__(self, other):
        return (-1.0) * self + other

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, other):
        if isinstance(other, TorusFunction):
            return self._binary(other, np.multiply, _mul_coeffs)
        if isinstance(other, np.ndarray):
            return self._grid_op(lambda g: g * other, other.shape)
        a = complex(other)
        return TorusFunction(
            self.n,
            coeffs=None if self.coeffs is None else {k: a * c for k, c in self.coeffs.items()},
            grid=None if self.grid is None else a * self.grid,
        )

    __rmul__ = __mul__

    def __truediv__(self, a):
        return self * (1.0 / complex(a))

    def _grid_op(self, fn, shape):
        return TorusFunction(self.n, grid=fn(self.sample(shape)))

    def _binary(self, other: TorusFunction, grid_op, coeff_op) -> TorusFunction:
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        shape = self._combine_shape(other)
        coeffs = None
        if self.coeffs is not None and other.coeffs is not None:
            coeffs = coeff_op(self.coeffs, other.coeffs)
        grid = None
        if shape is not None:
            grid = grid_op(self.sample(shape), other.sample(shape))
        return TorusFunction(self.n, coeffs=coeffs, grid=grid)

    def conj(self) -> TorusFunction:
        return TorusFunction(
            self.n,
            coeffs=None if self.coeffs is None else {tuple(-x for x in k): c.conjugate()
                                                     for k, c in self.coeffs.items()},
            grid=None if self.grid is None else self.grid.conj(),
        )

    def translate(self, w: Sequence) -> TorusFunction:
        """``g(x) = f(x - w)``."""
        return translate(self, w)

    def __repr__(self):
        parts = []
        if self.coeffs is not None:
            parts.append(f"{len(self.coeffs)} coeffs")
        if self.grid is not None:
            parts.append(f"grid {self.grid.shape}")
        return f"TorusFunction(n={self.n}, {', '.join(parts)})"


def _add_coeffs(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, c in b.items():
        out[k] = out.get(k, 0j) + c
    return out


def _dense(coeffs: dict) -> tuple[np.ndarray, np.ndarray]:
    K = np.array(list(coeffs.keys()), dtype=np.int64)
    K = K.reshape(len(coeffs), -1)
    lo = K.min(axis=0)
    C = np.zeros(tuple(K.max(axis=0) - lo + 1), dtype=complex)
    np.add.at(C, tuple((K - lo).T), np.array(list(coeffs.values()), dtype=complex))
    return C, lo


def _from_dense(C: np.ndarray, lo: np.ndarray) -> dict:
    idx = np.argwhere(C != 0)
    vals = C[tuple(idx.T)]
    return {tuple(int(x) for x in k): complex(v) for k, v in zip(idx + lo, vals)}


def _mul_coeffs(a: dict, b: dict) -> dict:
    if not a or not b:
        return {}
    if len(a) * len(b) <= 64:
        out: dict = {}
        for ka, ca in a.items():
            for kb, cb in b.items():
                k = tuple(x + y for x, y in zip(ka, kb))
                out[k] = out.get(k, 0j) + ca * cb
        return out
    Ca, la = _dense(a)
    Cb, lb = _dense(b)
    return _from_dense(convolve(Ca, Cb, method="direct"), la + lb)


def _coeffs_on_grid(coeffs: dict, n: int, shape: Shape) -> np.ndarray:
    """Dense-box evaluation, contracting one axis at a time."""
    if not coeffs:
        return np.zeros(shape, dtype=complex)
    C, lo = _dense(coeffs)
    box = C.shape
    for a in range(n):
        freqs = np.arange(lo[a], lo[a] + box[a])
        j = np.arange(shape[a])
        # exact phase via integer reduction mod N
        E = np.exp(2j * np.pi * (np.outer(freqs, j) % shape[a]) / shape[a])
        C = np.tensordot(C, E, axes=([0], [0]))
    return C


def grid_shift(w: Sequence, shape: Shape) -> tuple[int, ...]:
    """Index shift realizing translation by ``w`` on the grid, or raise."""
    shift = []
    for wi, N in zip(w, shape):
        if isinstance(wi, (Fraction, int)):
            s = Fraction(wi) * N
            if s.denominator != 1:
                raise OffGridError(f"translation {wi} is not a node of a {N}-point axis")
            shift.append(int(s) % N)
        else:
            t = float(wi) * N
            r = round(t)
            if abs(t - r) > 1e-9:
                raise OffGridError(f"translation {wi} is not a node of a {N}-point axis")
            shift.append(int(r) % N)
    return tuple(shift)


def roll_grid(values: np.ndarray, w: Sequence) -> np.ndarray:
    """Samples of ``x -> f(x - w)`` from samples of ``f``."""
    return np.roll(values, grid_shift(w, values.shape), axis=tuple(range(values.ndim)))


def translate(f: TorusFunction, w: Sequence) -> TorusFunction:
    """Translation ``x -> f(x - w)`` in both representations."""
    if len(w) != f.n:
        raise ValueError("translation has wrong dimension")
    coeffs = None
    if f.coeffs is not None:
        exact = all(isinstance(x, (Fraction, int)) for x in w)
        coeffs = {}
        for k, c in f.coeffs.items():
            if exact:
                # reduce the phase mod 1 before going to floating point
                ph = float(sum((ki * Fraction(wi) for ki, wi in zip(k, w)), Fraction(0)) % 1)
            else:
                ph = float(np.dot(k, [float(x) for x in w]))
            coeffs[k] = c * np.exp(-2j * np.pi * ph)
    grid = None if f.grid is None else roll_grid(f.grid, w)
    return TorusFunction(f.n, coeffs=coeffs, grid=grid)


def is_compatible(shape: Shape, F: DualGroupF) -> bool:
    return all(N % m == 0 for N, m in zip(shape, F.min_resolution()))


def default_grid(F: DualGroupF, oversample: int = GRID_OVERSAMPLE) -> Shape:
    return tuple(m * oversample for m in F.min_resolution())


def _resolve_shape(fs: Iterable[TorusFunction], F: DualGroupF, shape: Shape | None) -> Shape:
    if shape is None:
        grids = {f.shape for f in fs if f.shape is not None}
        if len(grids) > 1:
            raise IncompatibleGridError(f"grid shapes differ: {sorted(grids)}")
        shape = grids.pop() if grids else default_grid(F)
    shape = tuple(int(s) for s in shape)
    if not is_compatible(shape, F):
        raise IncompatibleGridError(f"grid {shape} does not contain the translates by F "
                                    f"(needs multiples of {F.min_resolution()})")
    return shape


def bracket_values(fv: np.ndarray, gv: np.ndarray, F: DualGroupF, primed: bool = False) -> np.ndarray:
    """Bracket of two sample arrays on an F-compatible grid."""
    prod = fv * np.conj(gv)
    out = np.zeros_like(prod)
    for w in F:
        out += roll_grid(prod, w)
    return out if primed else out / len(F)


def bracket(f: TorusFunction, g: TorusFunction, F: DualGroupF, primed: bool = False,
            shape: Shape | None = None) -> TorusFunction:
    """Module-valued inner product of ``f`` and ``g`` sampled on a grid.

    The result is an F-invariant function returned in grid form. ``primed``
    drops the ``1/q`` factor.
    """
    shape = _resolve_shape((f, g), F, shape)
    return TorusFunction.from_grid(bracket_values(f.sample(shape), g.sample(shape), F, primed))


def coefficient_bracket(f: TorusFunction, g: TorusFunction, A: DilationMatrix,
                        primed: bool = False) -> TorusFunction:
    """Bracket computed by down-sampling ``f * conj(g)`` onto ``A Z^n``.

    Averaging over ``F`` annihilates every frequency outside ``A Z^n`` and
    keeps the rest unchanged, so the unprimed bracket is just the
    restriction of the product's coefficients to the sublattice.
    """
    if f.coeffs is None or g.coeffs is None:
        raise ValueError("coefficient_bracket needs coefficient representations")
    prod = _mul_coeffs(f.coeffs, g.conj().coeffs)
    scale = A.q if primed else 1
    keys = list(prod)
    mask = A.contains_many(np.array(keys, dtype=np.int64).reshape(len(keys), f.n)) if keys else []
    kept = {k: scale * prod[k] for k, m in zip(keys, mask) if m}
    if not kept:
        kept = {(0,) * f.n: 0j}
    return TorusFunction(f.n, coeffs=kept)


def standard_orthonormal_basis(A: DilationMatrix, reps: CosetReps | None = None) -> list[TorusFunction]:
    """Characters ``e_j(x) = exp(2 pi i p_j.x)`` over the coset representatives.

    Orthonormal for the unprimed bracket; divide by ``sqrt(q)`` for the primed one.
    """
    reps = A.coset_representatives if reps is None else reps
    return [TorusFunction.character(p) for p in reps]


def invariance_residual(values: np.ndarray, F: DualGroupF) -> float:
    """Sup over the grid of ``|f(x - w) - f(x)|`` for ``w`` in ``F``."""
    return max(float(np.abs(roll_grid(values, w) - values).max()) for w in F)


def sup_norm(values) -> float:
    return float(np.abs(np.asarray(values)).max(initial=0.0))


def random_trig_poly(n: int, degree: int, rng: np.random.Generator) -> TorusFunction:
    """Random trigonometric polynomial with frequencies in ``[-degree, degree]^n``."""
    ks = np.stack(np.meshgrid(*([np.arange(-degree, degree + 1)] * n), indexing="ij"), -1).reshape(-1, n)
    c = rng.normal(size=len(ks)) + 1j * rng.normal(size=len(ks))
    return TorusFunction(n, coeffs={tuple(k): v for k, v in zip(ks.tolist(), c)})
