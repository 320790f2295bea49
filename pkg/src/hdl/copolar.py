"""Copolarised deformation directions and their metric geometry.

On an invariant complex model with a balanced metric this module builds
the subspace of (0,1) frame-vector classes killed (in cohomology) by
contraction against omega^(n-1), its image among (n-1,1) classes,
primitive representatives obtained through a Lefschetz split of a
potential, the middle-degree intersection pairings with the star
eigenspace decomposition they ride on, two L2 metrics and a wedge
integral metric on the copolarised directions, primitive (1,1) classes
with primitive representatives, and the contraction maps induced by a
holomorphic symplectic form. Everything reduces to dense linear algebra
over the blade bases of the exterior module.
"""

import numpy as np

from . import _linalg
from .deformation import canonical_trivialization, cy_contract, cy_invert
from .errors import (Degenerate, DimMismatch, DimTooSmall, HdlError,
                     NoDClosedRepresentative, NotBalanced, NotInKernel,
                     NotInPlusSpace, NotPrimitiveClass, NotUnimodular,
                     NotUnique, WrongDegree)
from .exterior import (Form, VectorForm, _indices, basis, contract,
                       degree_basis, form_vec, hodge_star, integrate,
                       l2_inner, l2_norm, matrix_of, omega_form, pq_vec,
                       primitive_decompose, vec_pq, vf_basis, vf_l2_inner,
                       volume_form, wedge, wedge_power)
from .model import (_mat, dbar_vector_form, harmonic_basis,
                    harmonic_representative, metric_flags,
                    minimal_d_closed_rep, solve_minimal_norm,
                    vf_cohomology_basis, vf_operator_matrix)

RANK_TOL = _linalg.DEFAULT_RANK_TOL


def _require_balanced(model):
    if not metric_flags(model)["balanced"]:
        raise NotBalanced("the model metric is not balanced")


def _vf_contraction_matrix(model, target, cod_pq):
    """Matrix of theta -> theta -| target from the canonical (0,1)
    vector-form basis to the blade coordinates of the target bidegree."""
    n = model.n
    cod = basis(n, *cod_pq)
    cols = []
    for ja in vf_basis(n, 1):
        img = contract(VectorForm(n, {ja: 1.0}), target)
        cols.append(form_vec(img, cod))
    return np.column_stack(cols) if cols else \
        np.zeros((len(cod), 0), dtype=complex)


def _quotient_kernel(wmat, exact, rank_tol):
    """Coefficient vectors c with wmat @ c inside span(exact)."""
    if wmat.shape[1] == 0:
        return np.zeros((0, 0), dtype=complex)
    if exact.shape[1] == 0:
        return _linalg.nullspace(wmat, rank_tol)
    ns = _linalg.nullspace(np.hstack([wmat, -exact]), rank_tol)
    if ns.shape[1] == 0:
        return np.zeros((wmat.shape[1], 0), dtype=complex)
    return _linalg.colspace(ns[: wmat.shape[1], :], rank_tol)


def _spaces_equal(a, b, rank_tol=RANK_TOL):
    return _linalg.contains(a, b, rank_tol) and \
        _linalg.contains(b, a, rank_tol)


def _combine_vf(n, basis_list, coeffs):
    out = VectorForm.zero(n)
    for j, b in enumerate(basis_list):
        out = out + complex(coeffs[j]) * b
    return out


def _combine_forms(n, basis_list, coeffs):
    out = Form.zero(n)
    for j, b in enumerate(basis_list):
        out = out + complex(coeffs[j]) * b
    return out


def class_coords(model, a, class_basis, rank_tol=RANK_TOL, tol=1e-9):
    """Coordinates of the Dolbeault class of a in the given class basis.

    Raises NotInKernel when a is not dbar-closed and Degenerate when the
    class lies outside the span of the basis classes.
    """
    p, q = a.bidegree()
    if not model.dbar(a).is_zero(tol * max(a.max_abs(), 1.0)):
        raise NotInKernel("form is not dbar-closed")
    vec = pq_vec(a, p, q)
    if not class_basis:
        raise Degenerate("empty class basis")
    bmat = np.column_stack([pq_vec(b, p, q) for b in class_basis])
    emat = _linalg.colspace(_mat(model, "dbar", p, q - 1), rank_tol)
    stack = np.hstack([bmat, emat]) if emat.shape[1] else bmat
    sol = np.linalg.lstsq(stack, vec, rcond=None)[0]
    resid = float(np.linalg.norm(stack @ sol - vec))
    if resid > tol * max(float(np.linalg.norm(vec)), 1.0):
        raise Degenerate("class lies outside the span of the given basis")
    return sol[: len(class_basis)]


# ---------------------------------------------------------------------------
# copolarised and polarised class subspaces

class CopolarisedSpace:
    """Harmonic (0,1) frame-vector classes whose contraction against
    omega^(n-1) is dbar-exact, with the ambient class dimension and the
    omega power that cut them out."""

    __slots__ = ("basis", "ambient_dim", "omega_power")

    def __init__(self, basis_list, ambient_dim, omega_power):
        self.basis = list(basis_list)
        self.ambient_dim = int(ambient_dim)
        self.omega_power = omega_power

    @property
    def dim(self):
        return len(self.basis)


def copolarised_subspace(model, rank_tol=RANK_TOL):
    """Kernel of [theta] -> [theta -| omega^(n-1)] on the harmonic (0,1)
    vector-form classes; needs a balanced metric."""
    _require_balanced(model)
    n = model.n
    amb = vf_cohomology_basis(model, 1, rank_tol)
    opow = wedge_power(omega_form(model.metric), n - 1)
    if n < 2 or not amb:
        return CopolarisedSpace(amb, len(amb), opow)
    wmat = np.column_stack(
        [pq_vec(contract(th, opow), n - 2, n) for th in amb])
    exact = _linalg.colspace(_mat(model, "dbar", n - 2, n - 1), rank_tol)
    coeffs = _quotient_kernel(wmat, exact, rank_tol)
    members = [_combine_vf(n, amb, coeffs[:, k])
               for k in range(coeffs.shape[1])]
    return CopolarisedSpace(members, len(amb), opow)


def polarised_subspace(model, rank_tol=RANK_TOL):
    """Kernel of [theta] -> [theta -| omega] into the (0,2) classes,
    returned as a list of harmonic (0,1) vector forms."""
    n = model.n
    amb = vf_cohomology_basis(model, 1, rank_tol)
    om = omega_form(model.metric)
    if not amb:
        return []
    wmat = np.column_stack([pq_vec(contract(th, om), 0, 2) for th in amb])
    exact = _linalg.colspace(_mat(model, "dbar", 0, 1), rank_tol)
    coeffs = _quotient_kernel(wmat, exact, rank_tol)
    return [_combine_vf(n, amb, coeffs[:, k])
            for k in range(coeffs.shape[1])]


def primitive_n11_space(model, u=None, rank_tol=RANK_TOL, tol=1e-9):
    """Harmonic (n-1,1) representatives of the image of the copolarised
    subspace under contraction against the trivialization."""
    _require_balanced(model)
    if u is None:
        u = canonical_trivialization(model, tol)
    space = copolarised_subspace(model, rank_tol)
    return [harmonic_representative(model, cy_contract(u, th), "Dolbeault",
                                    rank_tol, tol)
            for th in space.basis]


# ---------------------------------------------------------------------------
# primitive representative search at (n-1, 1)

def _split_potential(model, w, rank_tol=RANK_TOL):
    """Split a (n-2, n-1) form as omega^(n-3) ^ alpha0 + xi -| omega^(n-1)
    with alpha0 a primitive (1,2)-form and xi a frame vector field."""
    n = model.n
    metric = model.metric
    if w.is_zero():
        return Form.zero(n), VectorForm.zero(n)
    om = omega_form(metric)
    low = wedge_power(om, n - 3)
    lmat = matrix_of(lambda f: wedge(low, f), n,
                     basis(n, 1, 2), basis(n, n - 2, n - 1))
    avec = np.linalg.solve(lmat, pq_vec(w, n - 2, n - 1))
    alpha = vec_pq(n, avec, 1, 2)
    alpha0, beta = primitive_decompose(alpha, metric, rank_tol)
    cmat = np.column_stack(
        [pq_vec(contract(VectorForm(n, {(a, 0): 1.0}), om), 0, 1)
         for a in range(1, n + 1)])
    xivec = np.linalg.solve(cmat, pq_vec(beta, 0, 1) / (n - 1))
    xi = VectorForm(n, {(a, 0): xivec[a - 1] for a in range(1, n + 1)})
    return alpha0, xi


def primitive_rep_search(model, cls, u=None, tol=1e-9, rank_tol=RANK_TOL):
    """Search a primitive form representing the (n-1,1) class of cls.

    cls may be a dbar-closed (0,1) vector form theta or an (n-1,1) form
    (inverted through the trivialization). A potential w with
    dbar w = theta -| omega^(n-1) is computed with minimal norm and split
    as omega^(n-3) ^ alpha0 + xi -| omega^(n-1); the returned representative
    is (theta - dbar xi) -| u, and it is primitive exactly when
    omega^(n-3) ^ alpha0 is dbar-closed.
    """
    n = model.n
    if n < 3:
        raise DimTooSmall("the potential split needs complex dimension >= 3")
    _require_balanced(model)
    if u is None:
        u = canonical_trivialization(model, tol)
    if isinstance(cls, VectorForm):
        theta = cls
    else:
        theta = cy_invert(u, cls)
    if theta.n != n:
        raise DimMismatch("class does not match the model dimension")
    scale = max(theta.max_abs(), 1.0)
    dbar_theta = dbar_vector_form(model, theta)
    if dbar_theta.max_abs() > tol * scale:
        raise NotInKernel("the direction is not dbar-closed")
    metric = model.metric
    opow = wedge_power(omega_form(metric), n - 1)
    rhs = contract(theta, opow)
    w, residual = solve_minimal_norm(model, _mat(model, "dbar", n - 2, n - 1),
                                     rhs, (n - 2, n - 1), (n - 2, n),
                                     rank_tol)
    b_norm = float(np.linalg.norm(metric._T(n - 2, n) @ pq_vec(rhs, n - 2, n)))
    if residual > tol * max(b_norm, 1.0):
        raise NotPrimitiveClass(
            "contraction class does not vanish (residual %.3e)" % residual)
    alpha0, xi = _split_potential(model, w, rank_tol)
    rep_theta = theta - dbar_vector_form(model, xi)
    representative = cy_contract(u, rep_theta)
    obstruction_form = wedge(wedge_power(omega_form(metric), n - 3), alpha0)
    defect = l2_norm(model.dbar(obstruction_form), metric)
    found = defect <= tol * max(l2_norm(obstruction_form, metric), 1.0)
    return {
        "found": bool(found),
        "representative": representative,
        "obstruction": alpha0,
        "xi": xi,
        "potential": w,
        "defect": float(defect),
    }


# ---------------------------------------------------------------------------
# middle-degree pairings and the star eigenspace split

class PairingReport:
    """Intersection pairing data on the harmonic middle-degree classes:
    the bilinear matrix q, the sesquilinear matrix h, and the star
    eigenspace bases with their coefficients in the harmonic basis."""

    __slots__ = ("model", "basis", "q", "h", "plus_basis", "minus_basis",
                 "plus_coords", "minus_coords")

    def __init__(self, model, basis_list, q, h, plus_basis, minus_basis,
                 plus_coords, minus_coords):
        self.model = model
        self.basis = list(basis_list)
        self.q = q
        self.h = h
        self.plus_basis = list(plus_basis)
        self.minus_basis = list(minus_basis)
        self.plus_coords = plus_coords
        self.minus_coords = minus_coords


def _star_eps(n):
    return 1.0 if n % 2 == 0 else 1j


def harmonic_star_matrix(model, rank_tol=RANK_TOL):
    """Matrix of the star operator restricted to the harmonic middle-degree
    forms, in the coordinates of their basis."""
    if not model.unimodular:
        raise NotUnimodular("the star operator preserves harmonic forms "
                            "only on unimodular models")
    n = model.n
    hb = harmonic_basis(model, "deRham", n, rank_tol)
    blades = degree_basis(n, n)
    bmat = np.column_stack([form_vec(b, blades) for b in hb]) if hb else \
        np.zeros((len(blades), 0), dtype=complex)
    cols = []
    for b in hb:
        sv = form_vec(hodge_star(b, model.metric), blades)
        sol = np.linalg.lstsq(bmat, sv, rcond=None)[0]
        resid = float(np.linalg.norm(bmat @ sol - sv))
        if resid > 1e-8 * max(float(np.linalg.norm(sv)), 1.0):
            raise HdlError("star does not preserve the harmonic space "
                           "(defect %.3e)" % resid)
        cols.append(sol)
    s = np.column_stack(cols) if cols else np.zeros((0, 0), dtype=complex)
    return hb, bmat, s


def pairings(model, rank_tol=RANK_TOL):
    """Intersection pairings on the harmonic middle-degree classes and the
    star eigenspace decomposition; needs a unimodular model."""
    n = model.n
    hb, _, s = harmonic_star_matrix(model, rank_tol)
    m = len(hb)
    sign = (-1.0) ** (n * (n - 1) // 2)
    phase = 1j ** (n * n)
    q = np.zeros((m, m), dtype=complex)
    h = np.zeros((m, m), dtype=complex)
    for i in range(m):
        for j in range(m):
            q[i, j] = sign * integrate(wedge(hb[i], hb[j]))
            h[i, j] = phase * integrate(wedge(hb[i], hb[j].conjugate()))
    eps = _star_eps(n)
    plus_coords = _linalg.nullspace(s - eps * np.eye(m), rank_tol)
    minus_coords = _linalg.nullspace(s + eps * np.eye(m), rank_tol)
    if plus_coords.shape[1] + minus_coords.shape[1] != m:
        raise HdlError("star eigenspaces do not fill the harmonic space")
    plus_basis = [_combine_forms(n, hb, plus_coords[:, k])
                  for k in range(plus_coords.shape[1])]
    minus_basis = [_combine_forms(n, hb, minus_coords[:, k])
                   for k in range(minus_coords.shape[1])]
    return PairingReport(model, hb, q, h, plus_basis, minus_basis,
                         plus_coords, minus_coords)


def period_domain_check(report, a, tol=1e-9, rank_tol=RANK_TOL):
    """Whether the middle-degree class of a sits on the isotropic positive
    locus: zero self-intersection and positive sesquilinear square.
    Raises NotInPlusSpace when the class is not a plus eigenvector."""
    model = report.model
    n = model.n
    degs = {p + q for (p, q) in a.bidegrees()}
    if degs and degs != {n}:
        raise WrongDegree("period membership needs a middle-degree form")
    rep = harmonic_representative(model, a, "deRham", rank_tol, tol)
    blades = degree_basis(n, n)
    vec = form_vec(rep, blades)
    if report.plus_basis:
        pmat = np.column_stack([form_vec(b, blades)
                                for b in report.plus_basis])
        sol = np.linalg.lstsq(pmat, vec, rcond=None)[0]
        resid = float(np.linalg.norm(pmat @ sol - vec))
    else:
        resid = float(np.linalg.norm(vec))
    if resid > rank_tol * max(float(np.linalg.norm(vec)), 1.0):
        raise NotInPlusSpace("the class has a minus-eigenspace component")
    sign = (-1.0) ** (n * (n - 1) // 2)
    phase = 1j ** (n * n)
    qv = sign * integrate(wedge(rep, rep))
    hv = (phase * integrate(wedge(rep, rep.conjugate()))).real
    sq = l2_norm(rep, model.metric) ** 2
    if sq == 0.0:
        return False
    return bool(abs(qv) <= tol * max(sq, 1.0) and hv > tol * sq)


def star_cohomology_matrix(model, reference=None, rank_tol=RANK_TOL):
    """Matrix of the star operator on the middle-degree de Rham classes,
    in the coordinates of the given reference classes (defaults to the
    model's harmonic basis). Lets two metrics be compared on one basis."""
    if not model.unimodular:
        raise NotUnimodular("class-level star needs a unimodular model")
    n = model.n
    if reference is None:
        reference = harmonic_basis(model, "deRham", n, rank_tol)
    blades = degree_basis(n, n)
    bmat = np.column_stack([form_vec(b, blades) for b in reference])
    dmat = _linalg.colspace(_mat(model, "d", n - 1), rank_tol)
    stack = np.hstack([bmat, dmat]) if dmat.shape[1] else bmat
    cols = []
    for b in reference:
        rep = harmonic_representative(model, b, "deRham", rank_tol)
        sv = form_vec(hodge_star(rep, model.metric), blades)
        sol = np.linalg.lstsq(stack, sv, rcond=None)[0]
        resid = float(np.linalg.norm(stack @ sol - sv))
        if resid > 1e-7 * max(float(np.linalg.norm(sv)), 1.0):
            raise HdlError("reference classes do not span the middle "
                           "cohomology (defect %.3e)" % resid)
        cols.append(sol[: len(reference)])
    return np.column_stack(cols)


def star_projectors(model, reference=None, rank_tol=RANK_TOL):
    """Projectors onto the plus and minus star eigenspaces of the
    middle-degree cohomology, in the reference class coordinates."""
    s = star_cohomology_matrix(model, reference, rank_tol)
    eps = _star_eps(model.n)
    eye = np.eye(s.shape[0], dtype=complex)
    p_plus = 0.5 * (eye + s / eps)
    p_minus = 0.5 * (eye - s / eps)
    return p_plus, p_minus


# ---------------------------------------------------------------------------
# metrics on the copolarised directions

class MetricReport:
    """Gram matrices of the two L2 metrics and the wedge-integral metric on
    the surviving copolarised directions, with the per-direction primitive
    and omega-trace square norms that reassemble them."""

    __slots__ = ("directions", "reps", "gram_g1", "gram_g2", "gram_gamma",
                 "prim_sq", "zeta_sq", "den", "vol", "warnings", "excluded",
                 "identity_defect")

    def __init__(self, directions, reps, gram_g1, gram_g2, gram_gamma,
                 prim_sq, zeta_sq, den, vol, warnings, excluded,
                 identity_defect):
        self.directions = list(directions)
        self.reps = list(reps)
        self.gram_g1 = gram_g1
        self.gram_g2 = gram_g2
        self.gram_gamma = gram_gamma
        self.prim_sq = list(prim_sq)
        self.zeta_sq = list(zeta_sq)
        self.den = float(den)
        self.vol = float(vol)
        self.warnings = list(warnings)
        self.excluded = list(excluded)
        self.identity_defect = float(identity_defect)

    @property
    def dim(self):
        return len(self.directions)


def _symmetrize(name, mat):
    scale = max(float(np.abs(mat).max(initial=0.0)), 1.0)
    asym = float(np.abs(mat - mat.conj().T).max(initial=0.0))
    if asym > 1e-8 * scale:
        raise HdlError("gram matrix %s asymmetry %.3e" % (name, asym))
    return 0.5 * (mat + mat.conj().T)


def wp_metrics(model, u=None, space=None, tol=1e-9, rank_tol=RANK_TOL):
    """Metric report on the copolarised directions.

    Each direction is re-represented so that its contraction against the
    trivialization is the minimal d-closed representative of its class;
    directions whose class has no d-closed representative are excluded and
    flagged in the warnings instead of failing the whole report.
    """
    _require_balanced(model)
    n = model.n
    metric = model.metric
    if u is None:
        u = canonical_trivialization(model, tol)
    if space is None:
        space = copolarised_subspace(model, rank_tol)
    den = (1j ** (n * n) * integrate(wedge(u, u.conjugate()))).real
    vol = integrate(volume_form(metric)).real
    if den <= 0 or vol <= 0:
        raise HdlError("non-positive volume normalization")
    directions, reps = [], []
    prim_sq, zeta_sq = [], []
    warnings, excluded = [], []
    for idx, theta in enumerate(space.basis):
        w0 = cy_contract(u, theta)
        try:
            w = minimal_d_closed_rep(model, w0, tol, rank_tol)
        except NoDClosedRepresentative as exc:
            warnings.append("direction %d has no d-closed representative "
                            "and was excluded (%s)" % (idx, exc))
            excluded.append(idx)
            continue
        directions.append(cy_invert(u, w))
        reps.append(w)
        prim, zeta = primitive_decompose(w, metric, rank_tol)
        prim_sq.append(l2_norm(prim, metric) ** 2)
        zeta_sq.append(l2_norm(zeta, metric) ** 2)
    m = len(directions)
    g1 = np.zeros((m, m), dtype=complex)
    g2 = np.zeros((m, m), dtype=complex)
    gamma = np.zeros((m, m), dtype=complex)
    phase = 1j ** (n * n)
    for i in range(m):
        for j in range(m):
            g1[i, j] = vf_l2_inner(directions[i], directions[j], metric) / vol
            g2[i, j] = l2_inner(reps[i], reps[j], metric) / den
            gamma[i, j] = -phase * \
                integrate(wedge(reps[i], reps[j].conjugate())) / den
    g1 = _symmetrize("g1", g1)
    g2 = _symmetrize("g2", g2)
    gamma = _symmetrize("gamma", gamma)
    defect = 0.0
    for i in range(m):
        defect = max(
            defect,
            abs(g2[i, i].real - (prim_sq[i] + 2.0 * zeta_sq[i]) / den),
            abs(gamma[i, i].real - (prim_sq[i] - 2.0 * zeta_sq[i]) / den))
    scale = max(float(np.abs(g2).max(initial=0.0)), 1.0)
    if defect > 1e-8 * scale:
        raise HdlError("metric decomposition defect %.3e" % defect)
    return MetricReport(directions, reps, g1, g2, gamma, prim_sq, zeta_sq,
                        den, vol, warnings, excluded, defect)


# ---------------------------------------------------------------------------
# primitive (1,1) classes

def primitive_11(model, rank_tol=RANK_TOL):
    """Basis of the kernel of [alpha] -> [omega^(n-1) ^ alpha] on the
    harmonic (1,1) classes; needs a balanced metric."""
    _require_balanced(model)
    n = model.n
    hb = harmonic_basis(model, "Dolbeault", (1, 1), rank_tol)
    if not hb:
        return []
    opow = wedge_power(omega_form(model.metric), n - 1)
    wmat = np.column_stack([pq_vec(wedge(opow, b), n, n) for b in hb])
    exact = _linalg.colspace(_mat(model, "dbar", n, n - 1), rank_tol)
    coeffs = _quotient_kernel(wmat, exact, rank_tol)
    return [_combine_forms(n, hb, coeffs[:, k])
            for k in range(coeffs.shape[1])]


def primitive_11_rep(model, a, tol=1e-9, rank_tol=RANK_TOL):
    """Primitive representative of a primitive (1,1) class: the harmonic
    representative corrected by dbar of the unique (1,0)-potential, so
    that omega^(n-1) kills the output exactly."""
    _require_balanced(model)
    n = model.n
    metric = model.metric
    alpha = harmonic_representative(model, a, "Dolbeault", rank_tol, tol)
    opow = wedge_power(omega_form(metric), n - 1)
    rhs = -1.0 * wedge(opow, alpha)
    w, residual = solve_minimal_norm(model, _mat(model, "dbar", n, n - 1),
                                     rhs, (n, n - 1), (n, n), rank_tol)
    b_norm = float(np.linalg.norm(metric._T(n, n) @ pq_vec(rhs, n, n)))
    if residual > tol * max(b_norm, 1.0):
        raise NotPrimitiveClass(
            "omega power does not kill the class (residual %.3e)" % residual)
    lmat = matrix_of(lambda f: wedge(opow, f), n,
                     basis(n, 1, 0), basis(n, n, n - 1))
    uvec = np.linalg.solve(lmat, pq_vec(w, n, n - 1))
    uprime = vec_pq(n, uvec, 1, 0)
    return alpha + model.dbar(uprime)


# ---------------------------------------------------------------------------
# holomorphic symplectic contraction maps

def symplectic_maps(model, sigma, tol=1e-9, rank_tol=RANK_TOL):
    """Contraction maps against a dbar-closed nondegenerate (2,0)-form.

    Returns the form-level matrix from (0,1) vector forms to (1,1) blades,
    the class-level matrix on the harmonic (1,1) basis, subspace
    preservation flags for the dbar kernel and image, and whether the
    copolarised classes land exactly on the primitive (1,1) classes.
    """
    n = model.n
    if sigma.n != n:
        raise DimMismatch("form does not match the model dimension")
    if not sigma.is_zero() and sigma.bidegree() != (2, 0):
        raise WrongDegree("contraction map needs a (2,0)-form")
    scale = max(sigma.max_abs(), 1.0)
    if not model.dbar(sigma).is_zero(tol * scale):
        raise NotInKernel("the (2,0)-form is not dbar-closed")
    smat = np.zeros((n, n), dtype=complex)
    for (h, _), c in sigma.items():
        a, b = _indices(h)
        smat[a - 1, b - 1] = c
        smat[b - 1, a - 1] = -c
    if _linalg.rank(smat, rank_tol) < n:
        raise Degenerate("the coefficient matrix of the (2,0)-form is "
                         "singular")
    h20 = harmonic_basis(model, "Dolbeault", (2, 0), rank_tol)
    if len(h20) != 1:
        raise NotUnique("the (2,0) class space has dimension %d" % len(h20))
    tmat = _vf_contraction_matrix(model, sigma, (1, 1))
    ker_vf = _linalg.nullspace(vf_operator_matrix(model, 1), rank_tol)
    ker_form = _linalg.nullspace(_mat(model, "dbar", 1, 1), rank_tol)
    img_vf = _linalg.colspace(vf_operator_matrix(model, 0), rank_tol)
    img_form = _linalg.colspace(_mat(model, "dbar", 1, 0), rank_tol)
    kernel_preserved = _spaces_equal(tmat @ ker_vf, ker_form, rank_tol)
    image_preserved = _spaces_equal(
        tmat @ img_vf if img_vf.shape[1] else img_vf, img_form, rank_tol)
    hb11 = harmonic_basis(model, "Dolbeault", (1, 1), rank_tol)
    amb = vf_cohomology_basis(model, 1, rank_tol)
    class_matrix = np.zeros((len(hb11), len(amb)), dtype=complex)
    for j, th in enumerate(amb):
        class_matrix[:, j] = class_coords(model, contract(th, sigma), hb11,
                                          rank_tol, tol)
    primitive_iso = None
    dim_cop = None
    dim_prim = None
    try:
        cop = copolarised_subspace(model, rank_tol)
    except NotBalanced:
        cop = None
    if cop is not None:
        prim = primitive_11(model, rank_tol)
        dim_cop = cop.dim
        dim_prim = len(prim)
        image_coords = np.column_stack(
            [class_coords(model, contract(th, sigma), hb11, rank_tol, tol)
             for th in cop.basis]) if cop.basis else \
            np.zeros((len(hb11), 0), dtype=complex)
        prim_coords = np.column_stack(
            [class_coords(model, b, hb11, rank_tol, tol)
             for b in prim]) if prim else \
            np.zeros((len(hb11), 0), dtype=complex)
        primitive_iso = _spaces_equal(image_coords, prim_coords, rank_tol)
    return {
        "matrix": tmat,
        "class_matrix": class_matrix,
        "bijective": _linalg.rank(tmat, rank_tol) == tmat.shape[0]
        and tmat.shape[0] == tmat.shape[1],
        "kernel_preserved": bool(kernel_preserved),
        "image_preserved": bool(image_preserved),
        "primitive_iso_check": primitive_iso,
        "d_closed": bool(model.d(sigma).is_zero(tol * scale)),
        "dim_copolarised": dim_cop,
        "dim_primitive_11": dim_prim,
    }


# ---------------------------------------------------------------------------
# kernel-matching identities

def codifferential_kernel_match(model, rank_tol=RANK_TOL):
    """Spans, in (0,1) vector-form coordinates, of the directions killed by
    the codifferential after contraction against omega^(n-1) and of those
    killed by the holomorphic differential after contraction against omega;
    on balanced models the two agree."""
    n = model.n
    metric = model.metric
    om = omega_form(metric)
    opow = wedge_power(om, n - 1)
    c_high = _vf_contraction_matrix(model, opow, (n - 2, n))
    c_low = _vf_contraction_matrix(model, om, (0, 2))
    a = _mat(model, "dbar_star", n - 2, n) @ c_high
    b = _mat(model, "partial", 0, 2) @ c_low
    span_a = _linalg.nullspace(a, rank_tol)
    span_b = _linalg.nullspace(b, rank_tol)
    return {
        "kernel_codifferential": span_a,
        "kernel_differential": span_b,
        "equal": _spaces_equal(span_a, span_b, rank_tol),
    }


def primitivity_kernel_match(model, u=None, rank_tol=RANK_TOL, tol=1e-9):
    """Spans of the directions with omega ^ (theta -| u) = 0, with
    theta -| omega = 0, and with theta -| omega^(n-1) = 0; the three kernels
    agree pointwise."""
    n = model.n
    metric = model.metric
    if u is None:
        u = canonical_trivialization(model, tol)
    om = omega_form(metric)
    opow = wedge_power(om, n - 1)
    t_u = _vf_contraction_matrix(model, u, (n - 1, 1))
    lmat = matrix_of(lambda f: wedge(om, f), n,
                     basis(n, n - 1, 1), basis(n, n, 2))
    k1 = _linalg.nullspace(lmat @ t_u, rank_tol)
    k2 = _linalg.nullspace(_vf_contraction_matrix(model, om, (0, 2)),
                           rank_tol)
    k3 = _linalg.nullspace(_vf_contraction_matrix(model, opow, (n - 2, n)),
                           rank_tol)
    equal = _spaces_equal(k1, k2, rank_tol) and \
        _spaces_equal(k2, k3, rank_tol)
    return {"lefschetz_kernel": k1, "omega_kernel": k2,
            "omega_power_kernel": k3, "equal": equal}


def contraction_class_matrix(model, u=None, rank_tol=RANK_TOL, tol=1e-9):
    """Matrix of [theta] -> [theta -| u] from the harmonic (0,1) vector-form
    classes to the harmonic (n-1,1) classes; full column rank means the
    class-level contraction is injective."""
    n = model.n
    if u is None:
        u = canonical_trivialization(model, tol)
    amb = vf_cohomology_basis(model, 1, rank_tol)
    hb = harmonic_basis(model, "Dolbeault", (n - 1, 1), rank_tol)
    mat = np.zeros((len(hb), len(amb)), dtype=complex)
    for j, th in enumerate(amb):
        mat[:, j] = class_coords(model, cy_contract(u, th), hb, rank_tol,
                                 tol)
    return mat
