"""Integer dilation matrices and the finite groups they determine.

For an integer matrix ``A`` with ``q = |det A|`` this module computes

* the Smith normal form ``A = U D V`` in exact integer arithmetic,
* a deterministic set of coset representatives for ``Z^n / A Z^n``,
* the dual group ``F = {w in [0,1)^n : A^T w in Z^n}`` as exact rationals.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Sequence

import numpy as np

from .errors import NotExpandingError, SingularMatrixError

EPS_EIG = 1e-9

IntMatrix = list[list[int]]


def _identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _as_int_matrix(M) -> IntMatrix:
    if isinstance(M, np.ndarray):
        M = M.tolist()
    out = []
    for r in M:
        if not isinstance(r, (list, tuple, np.ndarray)):
            raise ValueError("matrix rows must be sequences")
        row = []
        for a in r:
            if isinstance(a, (bool, np.bool_)):
                raise ValueError("matrix entries must be integers")
            if isinstance(a, (float, np.floating)):
                if not float(a).is_integer():
                    raise ValueError(f"non-integer entry {a!r}")
                a = int(a)
            row.append(int(a))
        out.append(row)
    n = len(out)
    if n == 0 or any(len(r) != n for r in out):
        raise ValueError("matrix must be square and non-empty")
    return out


def _det(M: IntMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = len(M)
    a = [row[:] for row in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _matmul(X: IntMatrix, Y: IntMatrix) -> IntMatrix:
    return [[sum(X[i][k] * Y[k][j] for k in range(len(Y))) for j in range(len(Y[0]))]
            for i in range(len(X))]


def _snf(M: IntMatrix):
    """Return ``(S, D, T, S_inv, T_inv)`` with ``S M T = D`` diagonal."""
    n = len(M)
    a = [row[:] for row in M]
    S, Si = _identity(n), _identity(n)
    T, Ti = _identity(n), _identity(n)

    def row_swap(i, j):
        a[i], a[j] = a[j], a[i]
        S[i], S[j] = S[j], S[i]
        for r in Si:
            r[i], r[j] = r[j], r[i]

    def row_add(i, j, c):
        # row_i += c * row_j
        a[i] = [x + c * y for x, y in zip(a[i], a[j])]
        S[i] = [x + c * y for x, y in zip(S[i], S[j])]
        for r in Si:
            r[j] -= c * r[i]

    def row_neg(i):
        a[i] = [-x for x in a[i]]
        S[i] = [-x for x in S[i]]
        for r in Si:
            r[i] = -r[i]

    def col_swap(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in T:
            r[i], r[j] = r[j], r[i]
        Ti[i], Ti[j] = Ti[j], Ti[i]

    def col_add(j, i, c):
        # col_j += c * col_i
        for r in a:
            r[j] += c * r[i]
        for r in T:
            r[j] += c * r[i]
        Ti[i] = [x - c * y for x, y in zip(Ti[i], Ti[j])]

    for t in range(n):
        while True:
            best = None
            for i in range(t, n):
                for j in range(t, n):
                    if a[i][j] != 0 and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                return S, a, T, Si, Ti
            i, j = best
            if i != t:
                row_swap(i, t)
            if j != t:
                col_swap(j, t)
            p = a[t][t]
            clean = True
            for i in range(t + 1, n):
                if a[i][t]:
                    row_add(i, t, -(a[i][t] // p))
                    clean = clean and a[i][t] == 0
            for j in range(t + 1, n):
                if a[t][j]:
                    col_add(j, t, -(a[t][j] // p))
                    clean = clean and a[t][j] == 0
            if not clean:
                continue
            bad = next(((i, j) for i in range(t + 1, n) for j in range(t + 1, n)
                        if a[i][j] % p), None)
            if bad is not None:
                row_add(t, bad[0], 1)
                continue
            if p < 0:
                row_neg(t)
            break
    return S, a, T, Si, Ti


def smith_normal_form(M) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Smith normal form ``M = U @ D @ V``.

    ``U`` and ``V`` are unimodular, ``D`` is diagonal with non-negative
    entries and ``D[i, i]`` divides ``D[i+1, i+1]``. All arithmetic is done
    on Python integers, so the identity holds exactly.
    """
    Mi = _as_int_matrix(M)
    _, D, _, Si, Ti = _snf(Mi)
    as_arr = lambda X: np.array(X, dtype=np.int64)  # noqa: E731
    return as_arr(Si), as_arr(D), as_arr(Ti)


def _upper_hnf(M: IntMatrix) -> IntMatrix:
    """Upper-triangular column Hermite form of the lattice spanned by the columns of M."""
    n = len(M)
    h = [row[:] for row in M]

    def col_combine(i, j, c):
        for r in h:
            r[i] += c * r[j]

    def col_swap(i, j):
        for r in h:
            r[i], r[j] = r[j], r[i]

    for i in range(n - 1, -1, -1):
        for j in range(i):
            while h[i][j] != 0:
                c = h[i][i] // h[i][j]
                col_combine(i, j, -c)
                col_swap(i, j)
        if h[i][i] < 0:
            for r in h:
                r[i] = -r[i]
        for j in range(i + 1, n):
            c = h[i][j] // h[i][i]
            if c:
                for r in h:
                    r[j] -= c * r[i]
    return h


@dataclass(frozen=True)
class DilationMatrix:
    """A validated expanding integer matrix.

    Build instances with :func:`validate_dilation`.
    """

    entries: tuple[tuple[int, ...], ...]
    n: int
    q: int
    det: int
    eig_eps: float = field(default=EPS_EIG, compare=False)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    @property
    def B(self) -> np.ndarray:
        """The transpose ``A^T``, which acts on frequencies."""
        return self.array.T.copy()

    @cached_property
    def _hnf(self) -> IntMatrix:
        return _upper_hnf([list(r) for r in self.entries])

    def reduce(self, k: Sequence[int]) -> tuple[int, ...]:
        """Canonical representative of ``k`` modulo ``A Z^n``."""
        v = [int(x) for x in k]
        h = self._hnf
        for i in range(self.n - 1, -1, -1):
            c = v[i] // h[i][i]
            if c:
                for r in range(i + 1):
                    v[r] -= c * h[r][i]
        return tuple(v)

    @cached_property
    def adjugate(self) -> np.ndarray:
        """Integer matrix ``adj(A) = det(A) * A^{-1}``."""
        n, E = self.n, [list(r) for r in self.entries]
        if n == 1:
            return np.array([[1]], dtype=np.int64)
        adj = np.empty((n, n), dtype=np.int64)
        for i in range(n):
            for j in range(n):
                minor = [r[:i] + r[i + 1:] for k, r in enumerate(E) if k != j]
                adj[i, j] = (-1) ** (i + j) * _det(minor)
        return adj

    def contains_many(self, K: np.ndarray) -> np.ndarray:
        """Vectorized membership test for rows of ``K`` in ``A Z^n``."""
        return np.all((np.asarray(K, dtype=np.int64) @ self.adjugate.T) % self.det == 0, axis=-1)

    def contains(self, k: Sequence[int]) -> bool:
        """True iff ``k`` lies in the sublattice ``A Z^n``."""
        return not any(self.reduce(k))

    @cached_property
    def coset_representatives(self) -> CosetReps:
        return coset_representatives(self)

    @cached_property
    def dual_group(self) -> DualGroupF:
        return dual_group(self)

    def __repr__(self):
        return f"DilationMatrix({[list(r) for r in self.entries]}, q={self.q})"


@dataclass(frozen=True)
class CosetReps:
    reps: tuple[tuple[int, ...], ...]

    def __len__(self):
        return len(self.reps)

    def __iter__(self):
        return iter(self.reps)

    def __getitem__(self, i):
        return self.reps[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.reps, dtype=np.int64)


@dataclass(frozen=True)
class DualGroupF:
    """The finite subgroup ``F`` of the torus, identity first."""

    elements: tuple[tuple[Fraction, ...], ...]

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    @property
    def n(self) -> int:
        return len(self.elements[0])

    def as_array(self) -> np.ndarray:
        return np.array([[float(c) for c in w] for w in self.elements])

    def index(self, w: Sequence[Fraction]) -> int:
        key = tuple(Fraction(c) % 1 for c in w)
        return self.elements.index(key)

    def add_table(self) -> np.ndarray:
        """``T[a, i]`` is the index of ``w_a + w_i`` (mod 1)."""
        q = len(self)
        T = np.empty((q, q), dtype=np.intp)
        for a, wa in enumerate(self.elements):
            for i, wi in enumerate(self.elements):
                T[a, i] = self.index([x + y for x, y in zip(wa, wi)])
        return T

    def neg_index(self) -> np.ndarray:
        return np.array([self.index([-x for x in w]) for w in self.elements], dtype=np.intp)

    def min_resolution(self) -> tuple[int, ...]:
        """Smallest per-axis grid sizes on which every element is a node."""
        return tuple(lcm(*(w[i].denominator for w in self.elements)) for i in range(self.n))


def validate_dilation(M, eig_eps: float = EPS_EIG) -> DilationMatrix:
    """Check that ``M`` is a nonsingular expanding integer matrix.

    Raises :class:`SingularMatrixError` when ``det M == 0`` and
    :class:`NotExpandingError` when some eigenvalue has modulus at most
    ``1 + eig_eps``.
    """
    Mi = _as_int_matrix(M)
    det = _det(Mi)
    if det == 0:
        raise SingularMatrixError(f"singular matrix {Mi}")
    moduli = np.abs(np.linalg.eigvals(np.array(Mi, dtype=float)))
    if moduli.min() <= 1.0 + eig_eps:
        raise NotExpandingError(
            f"eigenvalue modulus {moduli.min():.6g} <= 1 + {eig_eps:g} for {Mi}")
    return DilationMatrix(tuple(tuple(r) for r in Mi), len(Mi), abs(det), det, eig_eps)


def coset_representatives(A: DilationMatrix) -> CosetReps:
    """Coset representatives of ``Z^n / A Z^n``.

    Candidates are generated from the Smith box ``U * prod[0, d_i)`` and
    reduced to the canonical Hermite box, then sorted lexicographically, so
    the zero vector always comes first.
    """
    _, D, _, Si, _ = _snf([list(r) for r in A.entries])
    d = [D[i][i] for i in range(A.n)]
    reps = set()
    for j in itertools.product(*(range(di) for di in d)):
        v = [sum(Si[r][c] * j[c] for c in range(A.n)) for r in range(A.n)]
        reps.add(A.reduce(v))
    out = tuple(sorted(reps))
    assert len(out) == A.q and not any(out[0])
    return CosetReps(out)


def dual_group(A: DilationMatrix) -> DualGroupF:
    """Rational points ``w`` in ``[0,1)^n`` with ``A^T w`` integral."""
    At = [list(r) for r in zip(*A.entries)]
    _, D, T, _, _ = _snf(At)
    d = [D[i][i] for i in range(A.n)]
    pts = set()
    for j in itertools.product(*(range(di) for di in d)):
        y = [Fraction(j[i], d[i]) for i in range(A.n)]
        w = tuple(sum((T[r][c] * y[c] for c in range(A.n)), Fraction(0)) % 1 for r in range(A.n))
        pts.add(w)
    out = tuple(sorted(pts))
    assert len(out) == A.q and not any(out[0])
    return DualGroupF(out)


def character_table(A: DilationMatrix) -> np.ndarray:
    """``X[j, i] = exp(2 pi i p_j . w_i)``; ``X / sqrt(q)`` is unitary."""
    P = A.coset_representatives.as_array().astype(float)
    W = A.dual_group.as_array()
    return np.exp(2j * np.pi * P @ W.T)


def is_integral(At: np.ndarray, w: Sequence[Fraction]) -> bool:
    return all(sum((Fraction(int(a)) * x for a, x in zip(row, w)), Fraction(0)).denominator == 1
               for row in At)
