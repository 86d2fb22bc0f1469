"""Low-pass/high-pass filter conditions, polyphase matrices and module frames.

Unnormalized filters ``m_j`` satisfy ``<m_j, m_k> = q delta_jk`` for the
unprimed bracket and ``m_0(0) = q``. Renormalized filters ``h_j = m_j / q``
are orthonormal for the primed bracket. Every check returns the numeric
residual alongside the verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import NotProjectionError, WrongCountError
from .lattice import DilationMatrix, DualGroupF
from .torusfn import (
    Shape,
    TorusFunction,
    _resolve_shape,
    bracket_values,
    roll_grid,
)

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    residual: float
    passed: bool
    grid: tuple[int, ...] = ()

    def to_json(self) -> dict:
        return {"condition": self.condition, "residual": self.residual,
                "pass": self.passed, "grid": list(self.grid)}


@dataclass
class ValidationReport:
    checks: list[ConditionReport] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    def to_json(self) -> list[dict]:
        return [c.to_json() for c in self.checks]


@dataclass(frozen=True)
class FilterBank:
    """An ordered filter family with ``m_0`` (or ``h_0``) first.

    ``normalized`` says whether ``filters`` holds the ``h_j = m_j / q``.
    """

    A: DilationMatrix
    filters: tuple[TorusFunction, ...]
    normalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "filters", tuple(self.filters))

    def __len__(self):
        return len(self.filters)

    @property
    def m(self) -> list[TorusFunction]:
        return [self.A.q * f for f in self.filters] if self.normalized else list(self.filters)

    @property
    def h(self) -> list[TorusFunction]:
        return list(self.filters) if self.normalized else [f / self.A.q for f in self.filters]

    def as_normalized(self) -> FilterBank:
        return self if self.normalized else FilterBank(self.A, tuple(self.h), True)

    def as_unnormalized(self) -> FilterBank:
        return FilterBank(self.A, tuple(self.m), False) if self.normalized else self


def _grid_for(fs: Sequence[TorusFunction], F: DualGroupF, shape: Shape | None) -> Shape:
    return _resolve_shape(fs, F, shape)


def validate_low_pass(m0: TorusFunction, A: DilationMatrix, tol: float = DEFAULT_TOL,
                      shape: Shape | None = None) -> ValidationReport:
    """Check ``m0(0) = q`` and ``<m0, m0> = q`` (unprimed bracket)."""
    F = A.dual_group
    shape = _grid_for([m0], F, shape)
    vals = m0.sample(shape)
    r0 = abs(complex(vals[(0,) * A.n]) - A.q)
    br = bracket_values(vals, vals, F)
    r1 = float(np.abs(br - A.q).max())
    return ValidationReport(
        [ConditionReport("(i) m0(0) = q", r0, r0 < tol, shape),
         ConditionReport("(ii) <m0, m0> = q", r1, r1 < tol, shape)],
        ["condition (iii) (non-vanishing near 0) is not checked"],
    )


def gram_residual(bank: FilterBank, shape: Shape | None = None) -> tuple[float, Shape]:
    """``max_jk sup |<m_j, m_k> - q delta_jk|`` over the grid."""
    F = bank.A.dual_group
    shape = _grid_for(bank.filters, F, shape)
    q = bank.A.q
    vals = [f.sample(shape) for f in bank.m]
    worst = 0.0
    for j, fj in enumerate(vals):
        for k in range(j, len(vals)):
            b = bracket_values(fj, vals[k], F)
            worst = max(worst, float(np.abs(b - (q if j == k else 0)).max()))
    return worst, shape


def validate_family(bank: FilterBank, tol: float = DEFAULT_TOL,
                    shape: Shape | None = None) -> ValidationReport:
    """Check ``<m_j, m_k> = q delta_jk`` for the whole bank."""
    if len(bank) != bank.A.q:
        raise WrongCountError(f"bank has {len(bank)} filters, dilation needs q={bank.A.q}")
    res, shape = gram_residual(bank, shape)
    return ValidationReport([ConditionReport("<m_j, m_k> = q delta_jk", res, res < tol, shape)])


class PolyphaseField(NamedTuple):
    """Matrix field ``U[..., j, i] = h_j(x - w_i)`` sampled on ``grid``."""

    values: np.ndarray
    grid: tuple[int, ...]
    F: DualGroupF


class Defect(NamedTuple):
    rows: float
    cols: float

    def __float__(self):
        return self.rows


def polyphase(bank: FilterBank, F: DualGroupF | None = None,
              shape: Shape | None = None) -> PolyphaseField:
    """Polyphase matrix field of a bank.

    Partial banks give rectangular fields (one row per filter).
    """
    F = bank.A.dual_group if F is None else F
    shape = _grid_for(bank.filters, F, shape)
    hs = [f.sample(shape) for f in bank.h]
    U = np.empty(shape + (len(hs), len(F)), dtype=complex)
    for j, hv in enumerate(hs):
        for i, w in enumerate(F):
            U[..., j, i] = roll_grid(hv, w)
    return PolyphaseField(U, shape, F)


def _op_norm_sup(M: np.ndarray) -> float:
    if M.size == 0:
        return 0.0
    flat = M.reshape((-1,) + M.shape[-2:])
    return float(np.linalg.norm(flat, ord=2, axis=(-2, -1)).max())


def unitarity_defect(U: PolyphaseField | np.ndarray) -> Defect:
    """Sup over the grid of ``||U U* - I||`` and ``||U* U - I||`` (operator norm).

    For rectangular fields only the row defect is meaningful; ``cols`` is nan.
    """
    V = U.values if isinstance(U, PolyphaseField) else np.asarray(U)
    r, c = V.shape[-2:]
    Vh = np.conj(np.swapaxes(V, -1, -2))
    rows = _op_norm_sup(V @ Vh - np.eye(r))
    cols = _op_norm_sup(Vh @ V - np.eye(c)) if r == c else float("nan")
    return Defect(rows, cols)


def reconstruct(f: TorusFunction, bank: FilterBank,
                shape: Shape | None = None) -> tuple[TorusFunction, float]:
    """Expand ``f`` in the bank: ``g = sum_i <f, h_i>' h_i``.

    Returns ``g`` on the grid and ``sup |g - f|``.
    """
    F = bank.A.dual_group
    shape = _grid_for([f, *bank.filters], F, shape)
    fv = f.sample(shape)
    g = np.zeros(shape, dtype=complex)
    for h in bank.h:
        hv = h.sample(shape)
        g += bracket_values(fv, hv, F, primed=True) * hv
    return TorusFunction.from_grid(g), float(np.abs(g - fv).max())


@dataclass(frozen=True)
class ModuleProjection:
    """Pointwise ``m x m`` matrix of F-invariant functions, ``values[..., m, m]``."""

    values: np.ndarray
    tol: float = 1e-10

    def __post_init__(self):
        P = np.asarray(self.values, dtype=complex)
        if P.ndim < 2 or P.shape[-1] != P.shape[-2]:
            raise NotProjectionError("projection must be a square matrix field")
        idem = float(np.abs(P @ P - P).max())
        herm = float(np.abs(P - np.conj(np.swapaxes(P, -1, -2))).max())
        if idem > self.tol or herm > self.tol:
            raise NotProjectionError(f"P^2 - P = {idem:.3g}, P - P* = {herm:.3g}")
        object.__setattr__(self, "values", P)

    @property
    def rank_size(self) -> int:
        return self.values.shape[-1]


def module_inner(a: np.ndarray, c: np.ndarray) -> np.ndarray:
    """``<(a_j), (c_j)> = sum_j a_j conj(c_j)`` pointwise; vectors on the last axis."""
    return np.einsum("...j,...j->...", a, np.conj(c))


def frame_from_projection(P: ModuleProjection, basis: Sequence[np.ndarray] | None = None) -> list[np.ndarray]:
    """Module frame ``xi_j = P e_j`` for the range of ``P``.

    ``basis`` defaults to the standard unit vectors of ``A^m``; any
    orthonormal basis given as arrays of shape ``grid + (m,)`` works.
    """
    m = P.rank_size
    if basis is None:
        basis = [np.broadcast_to(np.eye(m)[j], P.values.shape[:-1]) for j in range(m)]
    return [np.einsum("...ij,...j->...i", P.values, b) for b in basis]


def frame_reconstruct(eta: np.ndarray, frame: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_j <eta, xi_j> xi_j``."""
    out = np.zeros(np.broadcast_shapes(eta.shape, frame[0].shape), dtype=complex)
    for xi in frame:
        out += module_inner(eta, xi)[..., None] * xi
    return out
