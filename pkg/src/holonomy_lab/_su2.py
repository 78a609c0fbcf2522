"""Closed-form SU(2) arithmetic in the quaternion chart ``U = w I + i v.sigma``."""
import numpy as np

PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

IDENTITY = np.eye(2, dtype=complex)


def exp_i_sigma(v: np.ndarray) -> np.ndarray:
    """Quaternion of ``exp(i v.sigma)`` for real ``v`` of shape (..., 3)."""
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v, axis=-1)
    # sin(theta)/theta, finite at 0
    sinc = np.sinc(theta / np.pi)
    return np.concatenate([np.cos(theta)[..., None], sinc[..., None] * v], axis=-1)


def qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Quaternion of the matrix product ``U_a U_b``."""
    wa, va = a[..., :1], a[..., 1:]
    wb, vb = b[..., :1], b[..., 1:]
    w = wa * wb - np.sum(va * vb, axis=-1, keepdims=True)
    v = wa * vb + wb * va - np.cross(va, vb)
    return np.concatenate([w, v], axis=-1)


def qconj(a: np.ndarray) -> np.ndarray:
    return np.concatenate([a[..., :1], -a[..., 1:]], axis=-1)


def to_matrix(q: np.ndarray) -> np.ndarray:
    """``w I + i v.sigma`` as complex 2x2 matrices."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    U = np.empty(q.shape[:-1] + (2, 2), dtype=complex)
    U[..., 0, 0] = w + 1j * z
    U[..., 0, 1] = y + 1j * x
    U[..., 1, 0] = -y + 1j * x
    U[..., 1, 1] = w - 1j * z
    return U


def ordered_product(factors: np.ndarray) -> np.ndarray:
    """Product ``F[n-1] ... F[1] F[0]`` along axis -2 (later factors on the left).

    Pairwise reduction keeps the number of numpy calls logarithmic in n.
    """
    f = factors
    while f.shape[-2] > 1:
        n = f.shape[-2]
        if n % 2:
            pad = np.zeros(f.shape[:-2] + (1, 4))
            pad[..., 0] = 1.0
            f = np.concatenate([f, pad], axis=-2)
        f = qmul(f[..., 1::2, :], f[..., 0::2, :])
    return f[..., 0, :]
