"""A low-pass filter on T^5 whose high-pass complement is not free.

Geometry on ``S^4 = {(v, ir)}`` and ``S^5 = {(v, xi)}`` with ``v`` in
``C^2``. The 2x2 unitary field ``U0`` is joined to the identity (after
adding a trivial line) by the path ``W_t``; its third column ``N0`` is
pulled back to the torus through the pinch map and packed into a single
low-pass filter ``h0`` for the det-3 dilation on ``Z^5``.

All functions are vectorized: leading axes are batch axes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .completion import align_sweep
from .errors import BadResolutionError, OffSphereError, PoleSingularityError
from .lattice import DilationMatrix, validate_dilation
from .torusfn import TorusFunction

SPHERE_TOL = 1e-12
POLE_TOL = 1e-8
TINY_V = 1e-15
DEFAULT_RESOLUTION = (9, 8, 8, 8, 8)

#: 5x5 dilation ``[[0, 3], [I_4, 0]]``, ``det = 3``
OBSTRUCTION_MATRIX = (
    (0, 0, 0, 0, 3),
    (1, 0, 0, 0, 0),
    (0, 1, 0, 0, 0),
    (0, 0, 1, 0, 0),
    (0, 0, 0, 1, 0),
)


def obstruction_dilation() -> DilationMatrix:
    return validate_dilation(OBSTRUCTION_MATRIX)


def _outer(v: np.ndarray) -> np.ndarray:
    return v[..., :, None] * np.conj(v[..., None, :])


def _adj(M: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(M, -1, -2))


@dataclass(frozen=True)
class Sphere4Point:
    """Points ``(v, ir)`` of ``S^4``: ``v`` has shape ``(..., 2)``, ``r`` shape ``(...)``."""

    v: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=complex)
        r = np.asarray(self.r, dtype=float)
        res = np.abs((np.abs(v) ** 2).sum(-1) + r**2 - 1)
        if res.size and res.max() > SPHERE_TOL:
            raise OffSphereError(f"||v||^2 + r^2 - 1 = {res.max():.3g}")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "r", r)

    @classmethod
    def random(cls, rng: np.random.Generator, size: int) -> Sphere4Point:
        g = rng.standard_normal((size, 5))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        return cls(g[:, 0:4:2] + 1j * g[:, 1:4:2], g[:, 4])

    def __getitem__(self, idx) -> Sphere4Point:
        return Sphere4Point(self.v[idx], self.r[idx])


@dataclass(frozen=True)
class Sphere5Point:
    """Points ``(v, xi)`` of ``S^5`` in ``C^3``."""

    v: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=complex)
        xi = np.asarray(self.xi, dtype=complex)
        res = np.abs((np.abs(v) ** 2).sum(-1) + np.abs(xi) ** 2 - 1)
        if res.size and res.max() > SPHERE_TOL:
            raise OffSphereError(f"||v||^2 + |xi|^2 - 1 = {res.max():.3g}")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "xi", xi)

    @classmethod
    def random(cls, rng: np.random.Generator, size: int) -> Sphere5Point:
        g = rng.standard_normal((size, 3)) + 1j * rng.standard_normal((size, 3))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        return cls(g[:, :2], g[:, 2])

    @classmethod
    def from_sphere4(cls, p: Sphere4Point) -> Sphere5Point:
        return cls(p.v, 1j * p.r)


@dataclass(frozen=True)
class PathUnitary:
    t: np.ndarray
    value: np.ndarray


def u0(p: Sphere4Point) -> np.ndarray:
    """``U0(v, r) = I - 2 (1 + ir)^-2 v v*``."""
    s = (2.0 / (1 + 1j * p.r) ** 2)[..., None, None]
    return np.eye(2) - s * _outer(p.v)


def phi(p: Sphere5Point, sign: str) -> np.ndarray:
    """Block unitaries ``phi+`` (undefined at ``xi = -1``) and ``phi-`` (at ``xi = 1``).

    ``phi+ = [[I - (1 + conj xi)^-1 v v*, v], [-b(xi) v*, xi]]`` with
    ``b = (1 + xi) / (1 + conj xi)``; ``phi-`` uses ``1 - conj xi`` and
    ``+c(xi) v*`` with ``c = (1 - xi) / (1 - conj xi)``. The minus sign on
    ``b`` is what makes ``phi+`` unitary.
    """
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    s = 1.0 if sign == "+" else -1.0
    xi = p.xi
    den = 1 + s * np.conj(xi)
    if np.any(np.abs(den) < POLE_TOL):
        raise PoleSingularityError(f"phi{sign} is undefined at xi = {-s:+.0f}")
    coef = -s * (1 + s * xi) / den  # -b for '+', +c for '-'
    shape = xi.shape
    out = np.empty(shape + (3, 3), dtype=complex)
    out[..., :2, :2] = np.eye(2) - _outer(p.v) / den[..., None, None]
    out[..., :2, 2] = p.v
    out[..., 2, :2] = coef[..., None] * np.conj(p.v)
    out[..., 2, 2] = xi
    return out


def factorization_check(p: Sphere4Point) -> np.ndarray:
    """``|| (U0 + 1) - phi+(v, ir)* phi-(v, ir) ||_2`` per point."""
    q = Sphere5Point.from_sphere4(p)
    lhs = np.zeros(p.r.shape + (3, 3), dtype=complex)
    lhs[..., :2, :2] = u0(p)
    lhs[..., 2, 2] = 1
    rhs = _adj(phi(q, "+")) @ phi(q, "-")
    return np.linalg.norm(lhs - rhs, ord=2, axis=(-2, -1))


def _scaled_v(v: np.ndarray, xi: np.ndarray) -> np.ndarray:
    nv = np.linalg.norm(v, axis=-1)
    rad = np.sqrt(np.maximum(0.0, 1 - np.abs(xi) ** 2))
    k = np.divide(rad, nv, out=np.zeros_like(nv), where=nv >= TINY_V)
    return v * k[..., None]


PATH_SCHEMES = ("radial", "literal")


def path_point(t, p: Sphere4Point, scheme: str = "radial") -> tuple[Sphere5Point, Sphere5Point]:
    """Points ``p_t+`` and ``p_t-`` of ``S^5`` moving ``(v, ir)`` to ``(0, 1)`` and ``(0, -1)``.

    ``"radial"`` (default) normalizes the chord:
    ``((1-t) v, (1-t) ir +- t) / sqrt((1-t)^2 + t^2)``. It lies on ``S^5``
    and depends continuously on ``(t, v, r)``.

    ``"literal"`` keeps ``xi = (1-t) ir +- t`` and rescales ``v`` alone. At
    ``v = 0`` (``r = +-1``) and ``0 < t < 1`` no rescaling reaches the
    sphere, ``k v`` is set to 0 and :class:`OffSphereError` is raised;
    near those points the result depends on the direction of ``v``.
    """
    if scheme not in PATH_SCHEMES:
        raise ValueError(f"unknown path scheme {scheme!r}")
    t = np.asarray(t, dtype=float)
    if np.any((t < 0) | (t > 1)):
        raise ValueError("t must lie in [0, 1]")
    t = np.broadcast_to(t, p.r.shape)
    xp = (1 - t) * 1j * p.r + t
    xm = (1 - t) * 1j * p.r - t
    if scheme == "literal":
        return (Sphere5Point(_scaled_v(p.v, xp), xp), Sphere5Point(_scaled_v(p.v, xm), xm))
    # (v, ir) is orthogonal to (0, 1) in the real sense, so the chord norm is simple
    s = 1 / np.sqrt((1 - t) ** 2 + t**2)
    v = p.v * ((1 - t) * s)[..., None]
    return Sphere5Point(v, xp * s), Sphere5Point(v, xm * s)


def w_path(t, p: Sphere4Point, scheme: str = "radial") -> PathUnitary:
    """``W_t = phi+(p_t+)* phi-(p_t-) diag(1, 1, e^{i pi t})``."""
    t = np.broadcast_to(np.asarray(t, dtype=float), p.r.shape)
    pp, pm = path_point(t, p, scheme)
    c = np.ones(t.shape + (3,), dtype=complex)
    c[..., 2] = np.exp(1j * np.pi * t)
    W = (_adj(phi(pp, "+")) @ phi(pm, "-")) * c[..., None, :]
    return PathUnitary(t, W)


def n0(t, p: Sphere4Point, scheme: str = "radial") -> np.ndarray:
    """``N0(t, p) = W_t e3``.

    Only the last column of ``phi-`` is needed, so this skips the full product.
    """
    t = np.broadcast_to(np.asarray(t, dtype=float), p.r.shape)
    pp, pm = path_point(t, p, scheme)
    col = np.empty(t.shape + (3,), dtype=complex)
    col[..., :2] = pm.v
    col[..., 2] = pm.xi
    col *= np.exp(1j * np.pi * t)[..., None]
    return np.einsum("...ji,...j->...i", np.conj(phi(pp, "+")), col)


def pinch(u) -> Sphere4Point:
    """Collapse the boundary of ``[-1, 1]^4`` to the south pole of ``S^4``."""
    u = np.asarray(u, dtype=float)
    if np.any(np.abs(u) > 1 + 1e-12):
        raise ValueError("pinch expects coordinates in [-1, 1]")
    n2 = np.linalg.norm(u, axis=-1)
    ninf = np.abs(u).max(axis=-1)
    s = np.divide(np.sin(np.pi * ninf), n2, out=np.zeros_like(n2), where=n2 > 0)
    su = u * s[..., None]
    v = np.stack([su[..., 0] + 1j * su[..., 1], su[..., 2] + 1j * su[..., 3]], axis=-1)
    r = np.cos(np.pi * ninf)
    # renormalize away rounding so the sphere check stays tight
    nrm = np.sqrt((np.abs(v) ** 2).sum(-1) + r**2)
    return Sphere4Point(v / nrm[..., None], r / nrm)


def calibration_unitary() -> np.ndarray:
    """Real Householder reflection ``Q`` with ``Q e3 = 3^{-1/2} (1, 1, 1)``."""
    s = np.full(3, 3 ** -0.5)
    u = np.array([0.0, 0.0, 1.0]) - s
    return np.eye(3) - 2 * np.outer(u, u) / (u @ u)


def _torus_to_cube(x: np.ndarray) -> np.ndarray:
    return 2 * np.mod(np.asarray(x, dtype=float) + 0.5, 1.0) - 1


def h0_field(x, calibrated: bool = False) -> np.ndarray:
    """``H0(t, u) = N0(t, P(u))`` for ``x = (t, x2..x5)`` on ``T^5``.

    ``u_i = 2((x_i + 1/2) mod 1) - 1`` so that ``x_i = 0`` is the cube
    centre and the seam ``x_i = 1/2`` is the pinched boundary.
    """
    x = np.asarray(x, dtype=float)
    t = np.mod(x[..., 0], 1.0)
    H = n0(t, pinch(_torus_to_cube(x[..., 1:])))
    if calibrated:
        H = H @ calibration_unitary().T
    return H


def h0_value(x, calibrated: bool = True) -> np.ndarray:
    """``h0(x) = 3^{-1/2} sum_j H_j(3 x1 mod 1, x2..x5) e^{2 pi i j x1}`` at any points.

    Components map third -> ``j = 0``, first -> ``j = 1``, second -> ``j = 2``.
    """
    X = np.asarray(x, dtype=float)
    x1 = X[..., 0]
    Y = X.copy()
    Y[..., 0] = np.mod(3 * x1, 1.0)
    H = h0_field(Y, calibrated)
    e = np.exp(2j * np.pi * x1)
    return (H[..., 2] + H[..., 0] * e + H[..., 1] * e**2) / np.sqrt(3)


def assemble_h0(resolution: Sequence[int] = DEFAULT_RESOLUTION,
                calibrated: bool = True) -> TorusFunction:
    """Grid samples of :func:`h0_value`; the first axis must be divisible by 3."""
    res = tuple(int(r) for r in resolution)
    if len(res) != 5 or min(res) < 1 or res[0] % 3:
        raise BadResolutionError(f"need 5 positive sizes with the first divisible by 3, got {res}")
    axes = [np.arange(N) / N for N in res]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    return TorusFunction.from_grid(h0_value(X, calibrated))


# --------------------------------------------------------------------------


def _defect(M: np.ndarray) -> float:
    eye = np.eye(M.shape[-1])
    a = np.linalg.norm(M @ _adj(M) - eye, ord=2, axis=(-2, -1))
    b = np.linalg.norm(_adj(M) @ M - eye, ord=2, axis=(-2, -1))
    return float(max(a.max(), b.max()))


def check_identities(samples: int = 10_000, seed: int = 0) -> dict[str, float]:
    """Residuals of every stated identity at seeded random points."""
    rng = np.random.default_rng(seed)
    p = Sphere4Point.random(rng, samples)
    t = rng.uniform(0, 1, samples)
    s5 = Sphere5Point.random(rng, samples)
    ok_p = np.abs(1 + s5.xi) > 1e-3
    ok_m = np.abs(1 - s5.xi) > 1e-3
    W = w_path(t, p).value
    W0 = w_path(np.zeros(samples), p).value
    W1 = w_path(np.ones(samples), p).value
    U0e = np.zeros_like(W0)
    U0e[:, :2, :2] = u0(p)
    U0e[:, 2, 2] = 1
    N_0 = n0(np.zeros(samples), p)
    N_1 = n0(np.ones(samples), p)
    e3 = np.array([0, 0, 1.0])
    u = rng.uniform(-1, 1, (samples, 4))
    ax = rng.integers(0, 4, samples)
    u[np.arange(samples), ax] = rng.choice([-1.0, 1.0], samples)
    south = pinch(u)
    pp, pm = path_point(t, p)
    return {
        "u0_unitarity": _defect(u0(p)),
        "phi_plus_unitarity": _defect(phi(Sphere5Point(s5.v[ok_p], s5.xi[ok_p]), "+")),
        "phi_minus_unitarity": _defect(phi(Sphere5Point(s5.v[ok_m], s5.xi[ok_m]), "-")),
        "w_path_unitarity": _defect(W),
        "factorization": float(factorization_check(p).max()),
        "w0_endpoint": float(np.abs(W0 - U0e).max()),
        "w1_endpoint": float(np.abs(W1 - np.eye(3)).max()),
        "n0_loop": float(max(np.abs(N_0 - e3).max(), np.abs(N_1 - e3).max())),
        "n0_unit": float(np.abs(np.linalg.norm(n0(t, p), axis=-1) - 1).max()),
        "path_sphere": float(max(
            np.abs((np.abs(q.v) ** 2).sum(-1) + np.abs(q.xi) ** 2 - 1).max() for q in (pp, pm))),
        "pinch_boundary": float(max(np.abs(south.v).max(), np.abs(south.r + 1).max())),
    }


@dataclass
class DemoReport:
    case: str
    resolutions: list[list[int]]
    max_jumps: list[float]
    lowpass_jumps: list[float] = field(default_factory=list)
    sweep_jumps: list[float] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)
    verdict_note: str = "demonstration-not-proof"

    @property
    def floor(self) -> float:
        return min(self.max_jumps)

    @property
    def decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.max_jumps, self.max_jumps[1:]))

    def to_json(self) -> dict:
        return {"case": self.case, "resolutions": self.resolutions, "max_jumps": self.max_jumps,
                "lowpass_jumps": self.lowpass_jumps, "sweep_jumps": self.sweep_jumps, "seconds": self.seconds,
                "floor": self.floor, "decreasing": self.decreasing,
                "verdict_note": self.verdict_note}


HAAR_LADDER = ((64,), (128,), (256,))
OBSTRUCTION_LADDER = ((6, 6, 6, 6, 6), (9, 8, 8, 8, 8), (12, 8, 8, 8, 8))


def _run_ladder(case: str, h0_for, A: DilationMatrix, ladder) -> DemoReport:
    rep = DemoReport(case, [], [])
    for res in ladder:
        t0 = time.perf_counter()
        r = align_sweep(h0_for(res), A, shape=tuple(res))
        rep.resolutions.append(list(res))
        rep.max_jumps.append(r.max_jump)
        rep.lowpass_jumps.append(r.lowpass_jump)
        rep.sweep_jumps.append(r.sweep_jump)
        rep.seconds.append(time.perf_counter() - t0)
    return rep


def haar_control(ladder=HAAR_LADDER) -> DemoReport:
    A = validate_dilation([[2]])
    h = TorusFunction.from_coeffs({(0,): 0.5, (1,): 0.5})
    return _run_ladder("haar-control", lambda res: h, A, ladder)


def equator_h0(resolution: Sequence[int] = DEFAULT_RESOLUTION) -> TorusFunction:
    """Control filter with the same pinch geometry but a free complement.

    ``H(x) = Q (v, r)`` with ``(v, r) = P(u)`` depends on ``u`` only. A line
    field pulled back from ``S^4`` has a trivial orthogonal complement
    (stably trivial rank-2 bundles on ``S^4`` are trivial), so a continuous
    completion exists.
    """
    res = tuple(int(r) for r in resolution)
    if len(res) != 5 or min(res) < 1 or res[0] % 3:
        raise BadResolutionError(f"need 5 positive sizes with the first divisible by 3, got {res}")
    axes = [np.arange(N) / N for N in res]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    p = pinch(_torus_to_cube(X[..., 1:]))
    H = np.concatenate([p.v, p.r[..., None]], axis=-1) @ calibration_unitary().T
    e = np.exp(2j * np.pi * X[..., 0])
    return TorusFunction.from_grid((H[..., 2] + H[..., 0] * e + H[..., 1] * e**2) / np.sqrt(3))


def demo_completion_failure(ladder=OBSTRUCTION_LADDER, haar_ladder=HAAR_LADDER,
                            calibrated: bool = True, control: bool = True) -> dict:
    """Run the sweep on the Haar ladder, the obstruction ladder and a control.

    A jump that does not shrink under refinement means the sweep found no
    continuous completion. That is evidence, not proof, that none exists.
    The equator control has the same geometry and does admit a completion;
    when its jumps are as large as the obstruction's, the grids are too
    coarse for the comparison to say anything.
    """
    A = obstruction_dilation()
    cases = [haar_control(haar_ladder).to_json(),
             _run_ladder("obstruction-h0", lambda res: assemble_h0(res, calibrated), A, ladder).to_json()]
    if control:
        cases.append(_run_ladder("equator-control", equator_h0, A, ladder).to_json())
    return {"cases": cases, "verdict_note": "demonstration-not-proof"}
