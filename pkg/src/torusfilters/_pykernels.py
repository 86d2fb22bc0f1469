"""Pure numpy implementations of the hot kernels.

These are the reference versions; ``_ckernels.pyx`` mirrors them loop for
loop. Both operate on C-contiguous complex128 arrays.
"""

import numpy as np

# below this |row[0]| the reflection maps the row onto +e_1 instead of -e_1
_SWAP_THRESHOLD = 0.5


def householder_complete_batch(rows: np.ndarray) -> np.ndarray:
    """Unitaries whose first rows are the given unit rows.

    ``rows`` has shape ``(M, q)``; the result has shape ``(M, q, q)``.
    """
    rows = np.ascontiguousarray(rows, dtype=np.complex128)
    M, q = rows.shape
    v = rows.conj()
    a = np.abs(v[:, 0])
    phase = np.where(a > 0, v[:, 0] / np.where(a > 0, a, 1.0), 1.0)
    sign = np.where(a < _SWAP_THRESHOLD, 1.0, -1.0)
    y0 = sign * phase
    u = v.copy()
    u[:, 0] -= y0
    nu2 = np.einsum("mi,mi->m", u.conj(), u).real
    H = np.broadcast_to(np.eye(q, dtype=np.complex128), (M, q, q)).copy()
    H -= 2.0 * u[:, :, None] * u.conj()[:, None, :] / nu2[:, None, None]
    # Q = H diag(y0, 1, ..., 1) has first column v; the answer is Q^*
    H[:, :, 0] *= y0[:, None]
    return np.conj(np.swapaxes(H, 1, 2))


def polar_unitary(M: np.ndarray) -> np.ndarray:
    """Unitary polar factor of a square matrix (closest unitary in Frobenius norm)."""
    W, _, Vh = np.linalg.svd(M)
    return W @ Vh


def polar_unitary_batch(M: np.ndarray) -> np.ndarray:
    W, _, Vh = np.linalg.svd(M)
    return W @ Vh


def align_frames(frames: np.ndarray, parent: np.ndarray, perm: np.ndarray) -> np.ndarray:
    """Sequentially rotate each frame toward its already aligned parent.

    Parameters
    ----------
    frames : (M, k, q) complex
        Complement rows at each node, in visit order.
    parent : (M,) int
        Index of an earlier node, or -1 for a root.
    perm : (M, q) int
        Column map: column ``i`` of the node is compared with column
        ``perm[m, i]`` of its parent's aligned frame.
    """
    frames = np.ascontiguousarray(frames, dtype=np.complex128)
    out = frames.copy()
    for m in range(len(frames)):
        p = parent[m]
        if p < 0:
            continue
        target = out[p][:, perm[m]]
        R = polar_unitary(target @ frames[m].conj().T)
        out[m] = R @ frames[m]
    return out
