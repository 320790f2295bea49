"""Deformation calculus: canonical-bundle trivializations, the contraction
isomorphism against a top holomorphic form, brackets of vector forms, and
the order-by-order power series solving the integrability equation.

The series for a first-order direction eta is built as follows: the class of
eta -| u is represented by its smallest d-closed form w1, pulled back through
the contraction to the first coefficient; each higher coefficient comes from
solving dbar(partial psi_k) = (1/2) sum brackets of lower ones with a
minimal-norm potential psi_k, and contributes partial(psi_k) pulled back the
same way. When the right-hand side ever leaves the image of dbar partial the
direction is obstructed and the solve reports at which order.
"""

import numpy as np

from . import _linalg
from .errors import (
    DimMismatch, NotInKernel, ObstructionNotExact, OrderOutOfRange,
    NoTrivialization, VanishingForm, WrongDegree,
)
from .exterior import (
    Form, VectorForm, basis, contract, form_vec, pq_vec, vec_vf,
    vf_basis, vf_norm, wedge,
)
from .model import (
    dbar_vector_form, minimal_d_closed_rep, operator_matrix,
    solve_minimal_norm, vf_cohomology_basis,
)

__all__ = [
    "canonical_trivialization", "cy_contract", "cy_invert",
    "bracket", "scalar_bracket", "deformation_directions",
    "KuranishiSeries", "kuranishi_series", "solve_order_potential",
    "maurer_cartan_residual",
]


# ---------------------------------------------------------------------------
# trivialization

def canonical_trivialization(model, tol=1e-9):
    """The holomorphic (n,0)-form u, normalized to pointwise unit length
    against the model metric (i^(n^2) integral of u ^ conj(u) equals the
    total volume). Raises NoTrivialization when no nonzero holomorphic
    (n,0)-form exists and VanishingForm when only vanishing ones do."""
    n = model.n
    full = tuple(range(1, n + 1))
    candidate = Form.blade(n, holo=full)
    if not model.dbar(candidate).is_zero(tol):
        raise NoTrivialization(
            "the (n,0) slot carries no holomorphic form on this model")
    scale = float(np.sqrt(model.metric.det))
    if scale <= tol:
        raise VanishingForm("holomorphic top form has vanishing length")
    return scale * candidate


def _top_coeff(u):
    n = u.n
    full = tuple(range(1, n + 1))
    return u.coefficient(holo=full)


# ---------------------------------------------------------------------------
# contraction against u and its inverse

def cy_contract(u, theta):
    """theta -| u for a vector form theta; lands in (n-1, q)."""
    return contract(theta, u)


def _tu_matrix(model_n, u, q):
    dom = vf_basis(model_n, q)
    cod = basis(model_n, model_n - 1, q)
    cols = []
    for (j, amask) in dom:
        img = contract(VectorForm(model_n, {(j, amask): 1.0}), u)
        cols.append(form_vec(img, cod))
    return np.column_stack(cols) if cols else \
        np.zeros((len(cod), 0), dtype=complex)


def cy_invert(u, w):
    """The unique vector form theta with theta -| u = w, for w of bidegree
    (n-1, q). Raises VanishingForm when u has no usable top coefficient."""
    n = u.n
    if abs(_top_coeff(u)) < 1e-14:
        raise VanishingForm("contraction against a vanishing top form")
    if w.n != n:
        raise DimMismatch("form does not match the trivialization dimension")
    if w.is_zero():
        return VectorForm.zero(n)
    pq = w.bidegree()
    if pq[0] != n - 1:
        raise WrongDegree("inverse contraction needs an (n-1, q) form")
    q = pq[1]
    t = _tu_matrix(n, u, q)
    sol = np.linalg.solve(t, pq_vec(w, n - 1, q))
    return vec_vf(n, sol, q)


# ---------------------------------------------------------------------------
# brackets

def _frame_bracket(model):
    """Frame-vector bracket read directly off the structure coefficients:
    [Z_a, Z_b] = (e^a ^ e^b coefficient of d e^c) Z_c for a < b, extended
    antisymmetrically. Returned as {(a, b): {c: coeff}} for a < b."""
    out = {}
    n = model.n
    for c in range(1, n + 1):
        for (h, am), v in model.d_holo[c].items():
            if am != 0 or bin(h).count("1") != 2:
                continue
            lo = (h & -h).bit_length()
            hi = h.bit_length()
            entry = out.setdefault((lo, hi), {})
            entry[c] = entry.get(c, 0j) + v
    return out


def bracket(model, phi1, phi2):
    """Bracket of vector forms extending the frame bracket:
    on alpha (x) X and beta (x) Y it is
    alpha^beta (x) [X,Y] - alpha^(X -| d beta) (x) Y
    + (-1)^(q1 q2) beta^(Y -| d alpha) (x) X,
    chosen so that the pull-back through the contraction against a
    trivialization turns partial-potentials into brackets with a plus sign
    (the Tian-Todorov normalization)."""
    n = model.n
    if phi1.n != n or phi2.n != n:
        raise DimMismatch("vector forms do not match the model dimension")
    fb = _frame_bracket(model)
    out = VectorForm.zero(n)
    for (a, ka), c1 in phi1.items():
        alpha = Form(n, {(0, ka): 1.0})
        q1 = bin(ka).count("1")
        d_alpha = model.d(alpha)
        for (b, kb), c2 in phi2.items():
            beta = Form(n, {(0, kb): 1.0})
            q2 = bin(kb).count("1")
            coeff = c1 * c2
            ab = wedge(alpha, beta)
            if not ab.is_zero():
                lo, hi = min(a, b), max(a, b)
                entry = fb.get((lo, hi), {})
                sign = 1.0 if a <= b else -1.0
                for c, v in entry.items():
                    for (_, am), w in ab.items():
                        out = out + VectorForm(
                            n, {(c, am): coeff * sign * v * w})
            d_beta = model.d(beta)
            t2 = wedge(alpha, contract(a, d_beta))
            for (_, am), w in t2.items():
                out = out + VectorForm(n, {(b, am): -coeff * w})
            t3 = wedge(beta, contract(b, d_alpha))
            s3 = 1.0 if (q1 * q2) % 2 == 0 else -1.0
            for (_, am), w in t3.items():
                out = out + VectorForm(n, {(a, am): coeff * s3 * w})
    return out


def scalar_bracket(model, u, w1, w2):
    """Bracket carried through the contraction isomorphism: pull both forms
    back to vector forms, bracket, push forward again."""
    th1 = cy_invert(u, w1)
    th2 = cy_invert(u, w2)
    return cy_contract(u, bracket(model, th1, th2))


# ---------------------------------------------------------------------------
# the recursion

def deformation_directions(model, rank_tol=_linalg.DEFAULT_RANK_TOL):
    """Harmonic basis of the first-order deformation space."""
    return vf_cohomology_basis(model, 1, rank_tol)


class KuranishiSeries:
    """Coefficients of one direction's power series.

    phis[k] is the order-k vector form coefficient, psis[k] the potential
    whose partial produced it (k >= 2), solve_residuals[k] the linear-solve
    defect at that order.
    """

    def __init__(self, model, u, direction, order):
        self.model = model
        self.u = u
        self.direction = direction
        self.order = order
        self.phis = {}
        self.psis = {}
        self.solve_residuals = {}

    def phi_at(self, t):
        """Evaluate the truncated series at a parameter value."""
        out = VectorForm.zero(self.model.n)
        for k, phi in self.phis.items():
            out = out + (t ** k) * phi
        return out


def solve_order_potential(model, rhs, order, tol=1e-9,
                          rank_tol=_linalg.DEFAULT_RANK_TOL):
    """Minimal-norm potential psi with dbar(partial psi) = rhs at
    (n-1, 2); raises ObstructionNotExact (carrying the order) when the
    right-hand side is not in the image."""
    n = model.n
    a = operator_matrix(model, "dbar", (n - 1, 1)) @ \
        operator_matrix(model, "partial", (n - 2, 1))
    psi, residual = solve_minimal_norm(model, a, rhs, (n - 2, 1), (n - 1, 2),
                                       rank_tol)
    b_norm = float(np.linalg.norm(model.metric._T(n - 1, 2)
                                  @ pq_vec(rhs, n - 1, 2)))
    if residual > tol * max(b_norm, 1.0):
        raise ObstructionNotExact(order, residual)
    return psi, residual


def kuranishi_series(model, u, eta, order=6, tol=1e-9,
                     rank_tol=_linalg.DEFAULT_RANK_TOL):
    """Solve the integrability equation order by order for the direction
    eta (a closed (0,1) vector form).

    Raises NotInKernel when eta is not closed and ObstructionNotExact when
    some order's equation has no solution.
    """
    if order < 1:
        raise OrderOutOfRange("series order must be at least 1")
    n = model.n
    if vf_norm(dbar_vector_form(model, eta), model.metric) > \
            tol * max(vf_norm(eta, model.metric), 1.0):
        raise NotInKernel("direction is not closed")
    series = KuranishiSeries(model, u, eta, order)
    w1 = minimal_d_closed_rep(model, cy_contract(u, eta), tol, rank_tol)
    series.phis[1] = cy_invert(u, w1)
    series.solve_residuals[1] = 0.0
    ws = {1: w1}
    for k in range(2, order + 1):
        rhs = Form.zero(n)
        for l in range(1, k):
            rhs = rhs + scalar_bracket(model, u, ws[l], ws[k - l])
        rhs = 0.5 * rhs
        if rhs.is_zero(1e-15):
            series.psis[k] = Form.zero(n)
            series.phis[k] = VectorForm.zero(n)
            series.solve_residuals[k] = 0.0
            ws[k] = Form.zero(n)
            continue
        psi, residual = solve_order_potential(model, rhs, k, tol, rank_tol)
        series.psis[k] = psi
        series.solve_residuals[k] = residual
        ws[k] = model.partial(psi)
        series.phis[k] = cy_invert(u, ws[k])
    return series


def maurer_cartan_residual(series, order):
    """Defect of the integrability equation at one order:
    norm of dbar(phi_k) - (1/2) sum over l of [phi_l, phi_(k-l)]."""
    if not (1 <= order <= series.order):
        raise OrderOutOfRange(
            "order %d outside the computed range 1..%d"
            % (order, series.order))
    model = series.model
    lhs = dbar_vector_form(model, series.phis[order])
    rhs = VectorForm.zero(model.n)
    for l in range(1, order):
        rhs = rhs + bracket(model, series.phis[l], series.phis[order - l])
    rhs = 0.5 * rhs
    return vf_norm(lhs - rhs, model.metric)
