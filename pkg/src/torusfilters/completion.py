"""Completing a low-pass filter to a full orthonormal filter bank.

* :func:`complete_q2` is the exact two-channel construction
  ``h_1(x) = tau(x) conj(h_0(x + w))``.
* :func:`project_and_complement` splits a function into its component
  along ``h_0`` and the orthogonal remainder.
* :func:`householder_complete` completes one unit row to a unitary.
* :func:`align_sweep` is a heuristic for ``q >= 3``: complete pointwise,
  make the choice continuous, and report where it fails to close up.
* :func:`gram_schmidt_smooth` re-orthonormalizes nearby approximants.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .errors import NotNormalizedError, NotQ2Error, NotUnitError, TooFarToNormalizeError
from .filters import FilterBank
from .lattice import DilationMatrix
from .torusfn import Shape, TorusFunction, _resolve_shape, bracket_values, roll_grid

log = logging.getLogger(__name__)

NORMALIZATION_FLOOR = 0.25
UNIT_TOL = 1e-8
DENSE_EIG_LIMIT = 600


def _check_normalized(h0: TorusFunction, A: DilationMatrix, shape: Shape, tol: float) -> np.ndarray:
    hv = h0.sample(shape)
    res = float(np.abs(bracket_values(hv, hv, A.dual_group, primed=True) - 1).max())
    if res > tol:
        raise NotNormalizedError(f"<h0, h0>' deviates from 1 by {res:.3g}")
    return hv


def complete_q2(h0: TorusFunction, A: DilationMatrix, tol: float = 1e-8,
                shape: Shape | None = None) -> TorusFunction:
    """High-pass partner of a normalized ``h0`` when ``q = 2``.

    ``tau`` is the character of the non-zero coset representative, which
    takes the value -1 at the non-zero element ``w`` of ``F``.
    """
    if A.q != 2:
        raise NotQ2Error(f"two-channel completion needs q = 2, got q = {A.q}")
    F = A.dual_group
    shape = _resolve_shape([h0], F, shape)
    _check_normalized(h0, A, shape, tol)
    w = F[1]
    p = A.coset_representatives[1]
    assert sum((Fraction(pi) * wi for pi, wi in zip(p, w)), Fraction(0)) % 1 == Fraction(1, 2)
    tau = TorusFunction.character(p)
    shifted = h0.translate([-x for x in w])
    return tau * shifted.conj()


def project_and_complement(f: TorusFunction, h0: TorusFunction, A: DilationMatrix,
                           tol: float = 1e-8, shape: Shape | None = None
                           ) -> tuple[TorusFunction, TorusFunction]:
    """``(p, c)`` with ``p = <f, h0>' h0`` and ``c = f - p``, both on the grid."""
    F = A.dual_group
    shape = _resolve_shape([f, h0], F, shape)
    hv = _check_normalized(h0, A, shape, tol)
    fv = f.sample(shape)
    pv = bracket_values(fv, hv, F, primed=True) * hv
    return TorusFunction.from_grid(pv), TorusFunction.from_grid(fv - pv)


def householder_complete(row: Sequence[complex]) -> np.ndarray:
    """Unitary matrix whose first row is ``row``.

    A single complex Householder reflection (plus one phase) is used, so the
    result depends only on the row. ``(1, 0, ..., 0)`` gives the identity.
    """
    r = np.asarray(row, dtype=complex).reshape(-1)
    nrm = np.linalg.norm(r)
    if abs(nrm - 1) >= UNIT_TOL:
        raise NotUnitError(f"row norm {nrm:.12g} is not 1")
    return kernels.householder_complete_batch((r / nrm)[None, :])[0]


# --------------------------------------------------------------------------
# continuity sweep


@dataclass
class SweepReport:
    """Outcome of :func:`align_sweep`.

    ``max_jump`` is the largest Frobenius difference of the high-pass rows
    of the polyphase matrix between grid neighbours (seams included).
    ``closed`` is a threshold verdict on it; a failed sweep demonstrates
    a difficulty, it does not prove that no continuous completion exists.
    """

    closed: bool
    max_jump: float
    location: list[float]
    grid: list[int]
    sweep: str
    covariance_residual: float
    sweep_jump: float
    lowpass_jump: float
    gram_residual: float
    bank: FilterBank | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {"closed": self.closed, "max_jump": self.max_jump, "location": self.location,
                "grid": self.grid, "sweep": self.sweep,
                "covariance_residual": self.covariance_residual,
                "sweep_jump": self.sweep_jump, "lowpass_jump": self.lowpass_jump,
                "gram_residual": self.gram_residual}


class _OrbitGrid:
    """Grid points grouped into F-orbits, visited in lexicographic order."""

    def __init__(self, A: DilationMatrix, shape: Shape):
        F = A.dual_group
        self.shape = shape
        self.q = A.q
        G = int(np.prod(shape))
        coords = np.indices(shape).reshape(len(shape), -1).T  # C order == lexicographic
        lin = np.arange(G).reshape(shape)
        # idx[a, j]: linear index of x_j - w_a
        self.idx = np.stack([roll_grid(lin, w).reshape(-1) for w in F])
        b = self.idx.argmin(axis=0)
        self.rep = self.idx[b, np.arange(G)]
        # x_j = rep - w_offset
        self.offset = F.neg_index()[b]
        self.add = F.add_table()
        reps = np.flatnonzero(self.rep == np.arange(G))
        self.reps = reps
        self.node = np.full(G, -1, dtype=np.intp)
        self.node[reps] = np.arange(len(reps))
        self.node_of = self.node[self.rep]
        self.coords = coords
        self.lin = lin

        # tree parent: step back along the last non-zero axis
        rc = coords[reps]
        nz = rc != 0
        has = nz.any(axis=1)
        last = np.where(has, rc.shape[1] - 1 - np.argmax(nz[:, ::-1], axis=1), 0)
        pc = rc.copy()
        pc[np.arange(len(reps)), last] -= 1
        ppt = np.ravel_multi_index(tuple(pc.T), shape, mode="wrap")
        self.parent = np.where(has, self.node_of[ppt], -1)
        self.parent_perm = self.add[self.offset[ppt]]

    def neighbours(self, axis: int) -> np.ndarray:
        return np.roll(self.lin, -1, axis=axis).reshape(-1)

    def expand(self, frames: np.ndarray) -> np.ndarray:
        """Per-point matrices ``U(x) = U(rep) P_offset`` from per-orbit ones."""
        perms = self.add[self.offset]  # (G, q)
        base = frames[self.node_of]  # (G, k, q)
        return np.take_along_axis(base, perms[:, None, :], axis=2)


def _connection_laplacian(og: _OrbitGrid, frames: np.ndarray) -> sp.csr_matrix:
    M, k, _ = frames.shape
    full = og.expand(frames)
    rows, cols, vals = [], [], []
    eye_blocks = np.zeros(M)
    for axis in range(len(og.shape)):
        nb = og.neighbours(axis)
        G_e = full @ np.conj(np.swapaxes(full[nb], 1, 2))  # C(x) C(x')^*
        T = kernels.polar_unitary_batch(G_e)
        o, o2 = og.node_of, og.node_of[nb]
        np.add.at(eye_blocks, o, 1.0)
        np.add.at(eye_blocks, o2, 1.0)
        a, b = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
        r = (o[:, None, None] * k + a).reshape(-1)
        c = (o2[:, None, None] * k + b).reshape(-1)
        rows += [r, c]
        cols += [c, r]
        vals += [-T.reshape(-1), -np.conj(T).reshape(-1)]
    diag = np.repeat(eye_blocks, k)
    rows.append(np.arange(M * k))
    cols.append(np.arange(M * k))
    vals.append(diag.astype(complex))
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(M * k, M * k))


def _lowest_eigvecs(L: sp.csr_matrix, k: int, x0: np.ndarray) -> np.ndarray:
    n = L.shape[0]
    if n <= DENSE_EIG_LIMIT:
        _, V = scipy.linalg.eigh(L.toarray(), subset_by_index=[0, k - 1])
        return V
    # shift-invert LU fills in badly on 4- and 5-d grids; LOBPCG from the sweep gauge does not
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        _, V = spla.lobpcg(L, x0, largest=False, tol=1e-8, maxiter=2000)
    return V


def _synchronize(og: _OrbitGrid, frames: np.ndarray) -> np.ndarray:
    """Globally re-gauge the orbit frames to minimize neighbour mismatch.

    Each frame may be rotated by a unitary ``R_o`` acting on the
    complement rows. The relaxed problem is solved by the lowest
    eigenvectors of the connection Laplacian; each block is then rounded
    to its unitary polar factor.
    """
    M, k, _ = frames.shape
    L = _connection_laplacian(og, frames)
    x0 = np.tile(np.eye(k), (M, 1)).astype(complex)
    V = _lowest_eigvecs(L, k, x0)
    Y = V.reshape(M, k, k)
    R = np.conj(np.swapaxes(kernels.polar_unitary_batch(Y), 1, 2))
    return R @ frames


def _jumps(og: _OrbitGrid, full: np.ndarray) -> tuple[float, int, int]:
    worst, where, axis_w = 0.0, 0, 0
    for axis in range(len(og.shape)):
        nb = og.neighbours(axis)
        d = np.sqrt((np.abs(full - full[nb]) ** 2).sum(axis=(1, 2)))
        j = int(d.argmax())
        if d[j] > worst:
            worst, where, axis_w = float(d[j]), j, axis
    return worst, where, axis_w


def align_sweep(h0: TorusFunction, A: DilationMatrix, shape: Shape | None = None,
                sweep: str = "lex", jump_tol: float = 0.25, relax: bool = True,
                tol: float = 1e-8) -> SweepReport:
    """Try to build a continuous high-pass family for ``h0`` on a grid.

    1. Complete the polyphase row ``(h0(x - w_i))_i`` at one point of each
       F-orbit with :func:`householder_complete`; the other points of the
       orbit follow by the covariance ``U(x - w) = U(x) P_w``.
    2. Visit orbits in lexicographic order and rotate each complement
       block (a unitary acting on rows 2..q) onto the already fixed grid
       neighbour via the polar factor of their overlap.
    3. With ``relax``, re-gauge all blocks at once so that seam edges
       count as much as tree edges (a sweep alone accumulates holonomy
       around every non-contractible loop).
    4. Measure the largest neighbour jump over all edges, wraparound
       included, and the covariance residual of the induced filters.
    """
    if sweep != "lex":
        raise ValueError(f"unknown sweep order {sweep!r}")
    F = A.dual_group
    q = A.q
    shape = _resolve_shape([h0], F, shape)
    hv = _check_normalized(h0, A, shape, tol)
    og = _OrbitGrid(A, shape)

    rows = np.stack([roll_grid(hv, w).reshape(-1) for w in F], axis=-1)  # (G, q)
    rows = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    U = kernels.householder_complete_batch(rows[og.reps])
    frames = kernels.align_frames(U[:, 1:, :], og.parent, og.parent_perm)

    full = og.expand(frames)
    sweep_jump, _, _ = _jumps(og, full)
    if relax and q > 1:
        frames = _synchronize(og, frames)
        full = og.expand(frames)
    max_jump, where, axis = _jumps(og, full)

    # induced filters h_j(x) = U(x)[j, 0] and their F-covariance
    hs = [full[:, j, 0].reshape(shape) for j in range(q - 1)]
    cov = 0.0
    for j, h in enumerate(hs):
        for i, w in enumerate(F):
            cov = max(cov, float(np.abs(roll_grid(h, w).reshape(-1) - full[:, j, i]).max()))
    low_full = og.expand(U[:, :1, :])
    lowpass_jump, _, _ = _jumps(og, low_full)

    bank = FilterBank(A, (TorusFunction.from_grid(hv), *(TorusFunction.from_grid(h) for h in hs)),
                      normalized=True)
    gram = 0.0
    vals = [f.grid for f in bank.filters]
    for j in range(q):
        for k in range(j, q):
            b = bracket_values(vals[j], vals[k], F, primed=True)
            gram = max(gram, float(np.abs(b - (j == k)).max()))

    loc = [float(c) / n for c, n in zip(og.coords[where], shape)]
    closed = max_jump <= jump_tol
    return SweepReport(closed, max_jump, loc, list(shape), sweep + ("+relax" if relax else ""),
                       cov, sweep_jump, lowpass_jump, gram, bank if closed else None)


# --------------------------------------------------------------------------


def gram_schmidt_smooth(family: FilterBank, approximants: Sequence[TorusFunction],
                        eps: float | None = None, shape: Shape | None = None,
                        floor: float = NORMALIZATION_FLOOR) -> FilterBank:
    """Replace the high-pass members by orthonormalized approximants.

    ``approximants[j-1]`` approximates member ``j``. Each one is projected
    off ``h_0`` and the already rebuilt members, then divided by the
    pointwise square root of its bracket. The bracket must stay above
    ``floor`` everywhere, otherwise :class:`TooFarToNormalizeError`.
    """
    A = family.A
    F = A.dual_group
    if len(approximants) != len(family) - 1:
        raise ValueError(f"need {len(family) - 1} approximants, got {len(approximants)}")
    shape = _resolve_shape([*family.filters, *approximants], F, shape)
    hs = [f.sample(shape) for f in family.h]
    if eps is not None:
        for j, g in enumerate(approximants, start=1):
            d = float(np.abs(g.sample(shape) / (1 if family.normalized else A.q) - hs[j]).max())
            if d > eps:
                log.warning("approximant %d is %.3g from its target (eps=%.3g)", j, d, eps)
    new = [hs[0]]
    for j, g in enumerate(approximants, start=1):
        gv = g.sample(shape) / (1 if family.normalized else A.q)
        fv = gv.copy()
        for prev in new:
            fv = fv - bracket_values(gv, prev, F, primed=True) * prev
        nrm = bracket_values(fv, fv, F, primed=True).real
        lo = float(nrm.min())
        if lo <= floor:
            raise TooFarToNormalizeError(
                f"member {j}: min <f, f>' = {lo:.3g} <= {floor}; approximant too far")
        new.append(fv / np.sqrt(nrm))
    out = [TorusFunction.from_grid(v) for v in new]
    if not family.normalized:
        out = [A.q * f for f in out]
    return FilterBank(A, tuple(out), family.normalized)
