"""Shared numerical linear algebra helpers (rank, spans, metric solves).

All routines take a relative rank tolerance: singular values below
tol * largest are treated as zero.
"""

import numpy as np

DEFAULT_RANK_TOL = 1e-8


def _as_matrix(m):
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    return m


def rank(m, tol=DEFAULT_RANK_TOL):
    m = _as_matrix(m)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def nullspace(m, tol=DEFAULT_RANK_TOL):
    """Orthonormal basis (columns) of the kernel."""
    m = _as_matrix(m)
    if m.shape[1] == 0:
        return np.zeros((0, 0), dtype=complex)
    if m.shape[0] == 0 or np.abs(m).max() == 0:
        return np.eye(m.shape[1], dtype=complex)
    u, s, vh = np.linalg.svd(m)
    r = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return vh[r:].conj().T


def colspace(m, tol=DEFAULT_RANK_TOL):
    """Orthonormal basis (columns) of the column span."""
    m = _as_matrix(m)
    if m.shape[1] == 0 or m.size == 0 or np.abs(m).max() == 0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    r = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return u[:, :r]


def intersect(u, v, tol=DEFAULT_RANK_TOL):
    """Orthonormal basis of span(u) & span(v) (columns)."""
    u = colspace(u, tol)
    v = colspace(v, tol)
    if u.shape[1] == 0 or v.shape[1] == 0:
        return np.zeros((u.shape[0], 0), dtype=complex)
    stacked = np.hstack([u, -v])
    ns = nullspace(stacked, tol)
    if ns.shape[1] == 0:
        return np.zeros((u.shape[0], 0), dtype=complex)
    vectors = u @ ns[: u.shape[1], :]
    return colspace(vectors, tol)


def sum_space(u, v, tol=DEFAULT_RANK_TOL):
    u = _as_matrix(u)
    v = _as_matrix(v)
    return colspace(np.hstack([u, v]), tol)


def contains(u, w, tol=DEFAULT_RANK_TOL):
    """True when every column of w lies in span(u)."""
    u = colspace(u, tol)
    w = _as_matrix(w)
    if w.shape[1] == 0:
        return True
    resid = w - u @ (u.conj().T @ w)
    scale = max(np.abs(w).max(), 1.0)
    return bool(np.abs(resid).max() <= 1e-7 * scale)


def gram_projector(span, g, tol=DEFAULT_RANK_TOL):
    """Orthogonal projector (as a matrix) onto the column span of `span`
    w.r.t. the inner product <x, y> = y^H g x."""
    span = _as_matrix(span)
    if span.shape[1] == 0:
        return np.zeros((span.shape[0], span.shape[0]), dtype=complex)
    h = colspace(span, tol)
    m = h.conj().T @ g @ h
    return h @ np.linalg.solve(m, h.conj().T @ g)


def minimal_norm_solve(a, b, t_dom, t_cod, rcond=DEFAULT_RANK_TOL):
    """Least-squares solve a x = b with minimal norm, where domain and
    codomain carry the inner products induced by the coordinate changes
    t_dom and t_cod (so norms are plain 2-norms after the change).

    Returns (x, residual) with the residual measured in the codomain norm.
    """
    a = _as_matrix(a)
    b = np.asarray(b, dtype=complex).reshape(-1)
    if a.shape[1] == 0:
        res = float(np.linalg.norm(t_cod @ b)) if b.size else 0.0
        return np.zeros(0, dtype=complex), res
    a_o = t_cod @ a @ np.linalg.inv(t_dom)
    b_o = t_cod @ b
    y = np.linalg.pinv(a_o, rcond=rcond) @ b_o
    x = np.linalg.solve(t_dom, y)
    residual = float(np.linalg.norm(a_o @ y - b_o))
    return x, residual
