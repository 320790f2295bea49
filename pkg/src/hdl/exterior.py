"""Complex exterior algebra over an n-dimensional Hermitian vector space.

Forms are finite sums of (p,q)-blades e^{i1}..e^{ip} ^ ebar^{j1}..ebar^{jq}
with strictly increasing indices inside each factor and all holomorphic
factors written first. A blade is stored as a pair of bitmasks (holo, anti),
bit i-1 standing for the frame index i. All operations normalize back to
this canonical order through explicit permutation signs.

A Hermitian metric h (the coefficient matrix of omega = i sum h_jk e^j^ebar^k)
is reduced to an orthonormal coframe by a Cholesky factor; the Hodge star,
the Lefschetz dual and the pointwise inner product are evaluated there and
mapped back. Inner products use the convention in which orthonormal blades
have norm one.

The star operator implemented here is the one acting on primitive (p,q)-forms
v of total degree k as (-1)^(k(k-1)/2) i^(p-q) omega^(n-k)^v/(n-k)!; it sends
1 to the volume form and (n,0)-forms u to i^(n^2) u, squares to (-1)^k, and
pairs with the inner product through a ^ star(conj b) = (-1)^k <a,b> dV.
"""

from functools import lru_cache
from math import factorial

import numpy as np

from .errors import DimMismatch, UnsupportedBidegree, WrongDegree

__all__ = [
    "Form", "VectorForm", "HermitianMetric",
    "wedge", "wedge_power", "contract", "vf_dbar_frame_term",
    "lefschetz", "lambda_op", "hodge_star", "primitive_decompose",
    "star_split_n", "torsion_tau", "torsion_tau_conj",
    "inner", "l2_inner", "norm", "l2_norm", "integrate",
    "omega_form", "volume_form", "sq_norm_canonical",
    "basis", "degree_basis", "pq_vec", "vec_pq", "form_vec", "vec_form",
    "matrix_of", "gram_matrix", "l2_gram", "adjoint_matrix",
    "vf_basis", "vf_vec", "vec_vf", "vf_inner", "vf_l2_inner", "vf_norm",
    "vf_gram",
]


# ---------------------------------------------------------------------------
# bitmask blade helpers

def _popcount(m):
    return int(m).bit_count()


def _indices(mask):
    """1-based frame indices of a mask, increasing."""
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def _mask(indices):
    m = 0
    for i in indices:
        b = 1 << (i - 1)
        if m & b:
            raise ValueError("repeated index %d" % i)
        m |= b
    return m


def _merge_sign(m1, m2):
    """Sign of sorting the concatenation (incr m1, incr m2) into one
    increasing sequence; masks must be disjoint."""
    sign = 1
    m = m2
    while m:
        low = m & -m
        # elements of m1 above this element of m2 each contribute a swap
        if _popcount(m1 & ~(low | (low - 1))) & 1:
            sign = -sign
        m ^= low
    return sign


def _drop_sign(mask, j):
    """Sign from moving factor j to the front of the increasing mask."""
    below = mask & ((1 << (j - 1)) - 1)
    return -1 if _popcount(below) & 1 else 1


# ---------------------------------------------------------------------------
# Form

class Form:
    """Complex exterior form: map from (holo mask, anti mask) to coefficient.

    Treat instances as immutable; all operations return new forms.
    """

    __slots__ = ("n", "_c")

    def __init__(self, n, coeffs=None):
        self.n = int(n)
        self._c = {}
        if coeffs:
            full = (1 << self.n) - 1
            for (h, a), c in coeffs.items():
                if (h | full) != full or (a | full) != full:
                    raise ValueError("blade index out of range for n=%d" % n)
                if c != 0:
                    self._c[(h, a)] = complex(c)

    @classmethod
    def blade(cls, n, holo=(), anti=(), coeff=1.0):
        return cls(n, {(_mask(holo), _mask(anti)): coeff})

    @classmethod
    def zero(cls, n):
        return cls(n)

    @classmethod
    def scalar(cls, n, value):
        return cls(n, {(0, 0): value})

    def items(self):
        return self._c.items()

    def coefficient(self, holo=(), anti=()):
        return self._c.get((_mask(holo), _mask(anti)), 0j)

    def __add__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        if self.n != other.n:
            raise DimMismatch("forms over different dimensions")
        out = dict(self._c)
        for k, c in other._c.items():
            out[k] = out.get(k, 0j) + c
        return Form(self.n, out)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, scalar):
        if isinstance(scalar, Form):
            return NotImplemented
        s = complex(scalar)
        return Form(self.n, {k: s * c for k, c in self._c.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / complex(scalar))

    def conjugate(self):
        """Complex conjugate form; swaps each blade's factors with the
        sign (-1)^(pq) of the reordering."""
        out = {}
        for (h, a), c in self._c.items():
            s = -1 if (_popcount(h) * _popcount(a)) & 1 else 1
            out[(a, h)] = s * c.conjugate()
        return Form(self.n, out)

    def bidegrees(self):
        return sorted({(_popcount(h), _popcount(a)) for (h, a) in self._c})

    def bidegree_part(self, p, q):
        return Form(self.n, {k: c for k, c in self._c.items()
                             if _popcount(k[0]) == p and _popcount(k[1]) == q})

    def degree_part(self, k):
        return Form(self.n, {key: c for key, c in self._c.items()
                             if _popcount(key[0]) + _popcount(key[1]) == k})

    def bidegree(self, tol=0.0):
        """The (p,q) of a homogeneous form; raises WrongDegree if mixed."""
        degs = [pq for pq in self.bidegrees()
                if self.bidegree_part(*pq).max_abs() > tol]
        if len(degs) > 1:
            raise WrongDegree("form is not of pure type: %s" % (degs,))
        return degs[0] if degs else (0, 0)

    def max_abs(self):
        return max((abs(c) for c in self._c.values()), default=0.0)

    def is_zero(self, tol=0.0):
        return self.max_abs() <= tol

    def prune(self, tol):
        return Form(self.n, {k: c for k, c in self._c.items() if abs(c) > tol})

    def __repr__(self):
        if not self._c:
            return "Form(0)"
        bits = []
        for (h, a) in sorted(self._c):
            c = self._c[(h, a)]
            fac = ["e%d" % i for i in _indices(h)]
            fac += ["ē%d" % i for i in _indices(a)]
            word = "^".join(fac) if fac else "1"
            bits.append("(%.6g%+.6gj)*%s" % (c.real, c.imag, word))
        return " + ".join(bits)


def wedge(a, b):
    """Exterior product of two forms."""
    if a.n != b.n:
        raise DimMismatch("forms over different dimensions")
    out = {}
    for (h1, a1), c1 in a._c.items():
        pa1 = _popcount(a1)
        for (h2, a2), c2 in b._c.items():
            if (h1 & h2) or (a1 & a2):
                continue
            s = _merge_sign(h1, h2) * _merge_sign(a1, a2)
            # anti factors of the left operand slide past holo factors
            # of the right operand
            if (pa1 * _popcount(h2)) & 1:
                s = -s
            key = (h1 | h2, a1 | a2)
            out[key] = out.get(key, 0j) + s * c1 * c2
    return Form(a.n, out)


def wedge_power(a, r):
    """a^r by iterated wedge; r = 0 gives the constant 1."""
    if r < 0:
        raise ValueError("negative wedge power")
    out = Form.scalar(a.n, 1.0)
    for _ in range(r):
        out = wedge(out, a)
    return out


# ---------------------------------------------------------------------------
# VectorForm: (0,q)-form with values in the holomorphic frame vectors Z_j

class VectorForm:
    """Sum of terms ebar^K (x) Z_j, stored as {(j, anti mask): coefficient}."""

    __slots__ = ("n", "_c")

    def __init__(self, n, coeffs=None):
        self.n = int(n)
        self._c = {}
        if coeffs:
            full = (1 << self.n) - 1
            for (j, a), c in coeffs.items():
                if not (1 <= j <= self.n) or (a | full) != full:
                    raise ValueError("vector form index out of range")
                if c != 0:
                    self._c[(int(j), a)] = complex(c)

    @classmethod
    def basis_element(cls, n, j, anti=(), coeff=1.0):
        return cls(n, {(j, _mask(anti)): coeff})

    @classmethod
    def zero(cls, n):
        return cls(n)

    def items(self):
        return self._c.items()

    def __add__(self, other):
        if not isinstance(other, VectorForm):
            return NotImplemented
        if self.n != other.n:
            raise DimMismatch("vector forms over different dimensions")
        out = dict(self._c)
        for k, c in other._c.items():
            out[k] = out.get(k, 0j) + c
        return VectorForm(self.n, out)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, scalar):
        if isinstance(scalar, (Form, VectorForm)):
            return NotImplemented
        s = complex(scalar)
        return VectorForm(self.n, {k: s * c for k, c in self._c.items()})

    __rmul__ = __mul__

    def degrees(self):
        return sorted({_popcount(a) for (_, a) in self._c})

    def degree_part(self, q):
        return VectorForm(self.n, {k: c for k, c in self._c.items()
                                   if _popcount(k[1]) == q})

    def component_form(self, j):
        """The (0,q) scalar form multiplying Z_j."""
        return Form(self.n, {(0, a): c for (i, a), c in self._c.items()
                             if i == j})

    def max_abs(self):
        return max((abs(c) for c in self._c.values()), default=0.0)

    def is_zero(self, tol=0.0):
        return self.max_abs() <= tol

    def __repr__(self):
        if not self._c:
            return "VectorForm(0)"
        bits = []
        for (j, a) in sorted(self._c):
            c = self._c[(j, a)]
            word = "^".join("ē%d" % i for i in _indices(a)) or "1"
            bits.append("(%.6g%+.6gj)*%s@Z%d" % (c.real, c.imag, word, j))
        return " + ".join(bits)


def _contract_holo_blade(j, h, a):
    """Z_j into blade (h,a): returns (sign, new key) or None."""
    b = 1 << (j - 1)
    if not (h & b):
        return None
    return _drop_sign(h, j), (h ^ b, a)


def _contract_anti_blade(j, h, a):
    """conj(Z_j) into blade (h,a): returns (sign, new key) or None."""
    b = 1 << (j - 1)
    if not (a & b):
        return None
    s = _drop_sign(a, j)
    if _popcount(h) & 1:
        s = -s
    return s, (h, a ^ b)


def contract(theta, a):
    """Contraction theta -| a.

    theta may be a frame index j (the vector Z_j), a mapping {j: coefficient}
    describing a constant (1,0) vector, or a VectorForm, in which case each
    term ebar^K (x) Z_j contributes ebar^K ^ (Z_j -| a).
    """
    if isinstance(theta, VectorForm):
        if theta.n != a.n:
            raise DimMismatch("contraction across dimensions")
        out = Form.zero(a.n)
        for (j, amask), c in theta.items():
            piece = {}
            for (h, am), ca in a._c.items():
                hit = _contract_holo_blade(j, h, am)
                if hit is None:
                    continue
                s, key = hit
                piece[key] = piece.get(key, 0j) + s * ca
            if piece:
                left = Form(a.n, {(0, amask): c})
                out = out + wedge(left, Form(a.n, piece))
        return out
    if isinstance(theta, dict):
        vf = VectorForm(a.n, {(j, 0): c for j, c in theta.items()})
        return contract(vf, a)
    j = int(theta)
    if not (1 <= j <= a.n):
        raise DimMismatch("frame index out of range")
    out = {}
    for (h, am), ca in a._c.items():
        hit = _contract_holo_blade(j, h, am)
        if hit is None:
            continue
        s, key = hit
        out[key] = out.get(key, 0j) + s * ca
    return Form(a.n, out)


def _contract_anti(j, a):
    """Contraction by the conjugate frame vector; used by the Lefschetz dual."""
    out = {}
    for (h, am), ca in a._c.items():
        hit = _contract_anti_blade(j, h, am)
        if hit is None:
            continue
        s, key = hit
        out[key] = out.get(key, 0j) + s * ca
    return Form(a.n, out)


# ---------------------------------------------------------------------------
# bases and coefficient vectors

@lru_cache(maxsize=None)
def _mask_basis(n, k):
    return tuple(m for m in range(1 << n) if _popcount(m) == k)


@lru_cache(maxsize=None)
def basis(n, p, q):
    """Canonical ordered blade basis of the (p,q) slot."""
    return tuple((h, a) for h in _mask_basis(n, p) for a in _mask_basis(n, q))


@lru_cache(maxsize=None)
def degree_basis(n, k):
    """Basis of total degree k: bidegrees (p, k-p) with p decreasing."""
    out = []
    for p in range(min(n, k), max(0, k - n) - 1, -1):
        out.extend(basis(n, p, k - p))
    return tuple(out)


def form_vec(a, blade_list):
    return np.array([a._c.get(key, 0j) for key in blade_list], dtype=complex)


def vec_form(n, vec, blade_list):
    return Form(n, {key: c for key, c in zip(blade_list, vec)})


def pq_vec(a, p, q):
    return form_vec(a, basis(a.n, p, q))


def vec_pq(n, vec, p, q):
    return vec_form(n, vec, basis(n, p, q))


def matrix_of(fn, n, dom, cod):
    """Matrix of a linear map between blade bases.

    dom and cod are blade lists as produced by basis()/degree_basis().
    """
    cols = []
    for key in dom:
        img = fn(Form(n, {key: 1.0}))
        cols.append(form_vec(img, cod))
    if not cols:
        return np.zeros((len(cod), 0), dtype=complex)
    return np.column_stack(cols)


# ---------------------------------------------------------------------------
# Hermitian metric and the orthonormal-frame reduction

class HermitianMetric:
    """Positive definite Hermitian coefficient matrix h of
    omega = i sum h_jk e^j ^ ebar^k; defaults to the identity."""

    def __init__(self, n, h=None, tol=1e-10):
        self.n = int(n)
        if h is None:
            h = np.eye(self.n)
        h = np.asarray(h, dtype=complex)
        if h.shape != (self.n, self.n):
            raise DimMismatch("metric matrix must be %dx%d" % (n, n))
        scale = max(np.abs(h).max(), 1.0)
        if np.abs(h - h.conj().T).max() > tol * scale:
            raise ValueError("metric matrix is not Hermitian")
        eig = np.linalg.eigvalsh(h)
        if eig.min() <= tol * max(eig.max(), 1.0):
            raise ValueError("metric matrix is not positive definite")
        self.h = h
        self.chol = np.linalg.cholesky(h)            # h = C C^H
        inv_c = np.linalg.inv(self.chol)
        self.to_f = inv_c.T      # e^j = sum_a to_f[j,a] f^a
        self.from_f = self.chol.T                    # f^a = sum_j from_f[a,j] e^j
        self.det = float(np.linalg.det(h).real)
        self._cache = {}

    # -- cached per-bidegree matrices ------------------------------------

    def _T(self, p, q):
        """Blade-coefficient change e-coframe -> orthonormal coframe."""
        key = ("T", p, q)
        if key not in self._cache:
            dom = basis(self.n, p, q)
            cols = [form_vec(_substitute_blade(self.n, h, a, self.to_f), dom)
                    for (h, a) in dom]
            self._cache[key] = (np.column_stack(cols) if cols
                                else np.zeros((0, 0), dtype=complex))
        return self._cache[key]

    def gram(self, p, q):
        key = ("G", p, q)
        if key not in self._cache:
            t = self._T(p, q)
            g = t.conj().T @ t
            self._cache[key] = 0.5 * (g + g.conj().T)
        return self._cache[key]

    def lambda_matrix(self, p, q):
        """Lefschetz dual (p,q) -> (p-1,q-1) on blade coefficients."""
        key = ("lam", p, q)
        if key not in self._cache:
            t_dom = self._T(p, q)
            t_cod = self._T(p - 1, q - 1)
            lam_f = _frame_lambda_matrix(self.n, p, q)
            self._cache[key] = np.linalg.solve(t_cod, lam_f @ t_dom) \
                if t_cod.size else np.zeros((0, t_dom.shape[1]), dtype=complex)
        return self._cache[key]

    def star_matrix(self, p, q):
        """Hodge star (p,q) -> (n-q,n-p) on blade coefficients."""
        key = ("star", p, q)
        if key not in self._cache:
            t_dom = self._T(p, q)
            t_cod = self._T(self.n - q, self.n - p)
            s_f = _frame_star_matrix(self.n, p, q)
            self._cache[key] = np.linalg.solve(t_cod, s_f @ t_dom)
        return self._cache[key]

    def omega(self):
        key = ("omega",)
        if key not in self._cache:
            coeffs = {}
            for j in range(self.n):
                for k in range(self.n):
                    c = 1j * self.h[j, k]
                    if c != 0:
                        coeffs[(1 << j, 1 << k)] = c
            self._cache[key] = Form(self.n, coeffs)
        return self._cache[key]

    def omega_power(self, r):
        key = ("omega_pow", r)
        if key not in self._cache:
            self._cache[key] = wedge_power(self.omega(), r)
        return self._cache[key]


def _substitute_blade(n, hmask, amask, m):
    """Expand one blade under e^j -> sum_a m[j-1,a] f^(a+1) (conjugated
    coefficients on anti factors)."""
    out = Form.scalar(n, 1.0)
    for j in _indices(hmask):
        one = Form(n, {(1 << b, 0): m[j - 1, b] for b in range(n)
                       if m[j - 1, b] != 0})
        out = wedge(out, one)
    for j in _indices(amask):
        one = Form(n, {(0, 1 << b): np.conj(m[j - 1, b]) for b in range(n)
                       if m[j - 1, b] != 0})
        out = wedge(out, one)
    return out


def substitute(a, m):
    """Coframe change applied to every blade of a."""
    out = Form.zero(a.n)
    for (h, am), c in a._c.items():
        out = out + c * _substitute_blade(a.n, h, am, m)
    return out


@lru_cache(maxsize=None)
def _frame_lambda_matrix(n, p, q):
    """Lefschetz dual on orthonormal-frame blades:
    -i sum_j (conj frame vector j) -| (frame vector j -| .)."""
    dom = basis(n, p, q)
    cod = basis(n, p - 1, q - 1)

    def lam(form):
        out = Form.zero(n)
        for j in range(1, n + 1):
            out = out + _contract_anti(j, contract(j, form))
        return -1j * out

    return matrix_of(lam, n, dom, cod)


@lru_cache(maxsize=None)
def _frame_star_matrix(n, p, q):
    """Star on orthonormal-frame blades, mapping (p,q) to (n-q,n-p)."""
    dom = basis(n, p, q)
    cod = basis(n, n - q, n - p)
    full = (1 << n) - 1
    phase = 1j ** (n * n % 4)
    sign_pq = -1 if (p + q) & 1 else 1
    mat = np.zeros((len(cod), len(dom)), dtype=complex)
    pos = {key: i for i, key in enumerate(cod)}
    for col, (h, a) in enumerate(dom):
        hc, ac = full ^ h, full ^ a
        tau = (_merge_sign(a, ac) * _merge_sign(h, hc)
               * (-1 if (_popcount(h) * _popcount(ac)) & 1 else 1))
        s = tau * (-1 if (_popcount(h) * _popcount(a)) & 1 else 1)
        mat[pos[(ac, hc)], col] = sign_pq * s * phase
    return mat


# ---------------------------------------------------------------------------
# metric operations

def _check_metric(a, metric):
    if a.n != metric.n:
        raise DimMismatch("form and metric dimensions differ")


def omega_form(metric):
    """The fundamental (1,1)-form of the metric."""
    return metric.omega()


def volume_form(metric):
    """dV = omega^n / n!."""
    return metric.omega_power(metric.n) / factorial(metric.n)


def integrate(a):
    """Invariant integral: coefficient of the top blade divided by i^(n^2),
    normalizing the total volume of the identity metric to one."""
    full = (1 << a.n) - 1
    return complex(a._c.get((full, full), 0j) / (1j ** (a.n * a.n % 4)))


def inner(a, b, metric):
    """Pointwise Hermitian inner product <a, b> (orthonormal blades have
    norm one); forms of different bidegree are orthogonal."""
    _check_metric(a, metric)
    if a.n != b.n:
        raise DimMismatch("forms over different dimensions")
    total = 0j
    degs = set(a.bidegrees()) & set(b.bidegrees())
    for (p, q) in degs:
        g = metric.gram(p, q)
        va = pq_vec(a, p, q)
        vb = pq_vec(b, p, q)
        total += vb.conj() @ (g @ va)
    return complex(total)


def l2_inner(a, b, metric):
    """<<a, b>> = <a, b> times the total volume of the metric."""
    return inner(a, b, metric) * metric.det


def norm(a, metric):
    return float(np.sqrt(max(inner(a, a, metric).real, 0.0)))


def l2_norm(a, metric):
    return float(np.sqrt(max(l2_inner(a, a, metric).real, 0.0)))


def sq_norm_canonical(u, metric):
    """Squared norm of an (n,0)-form as a section of the canonical bundle,
    scaled so that i^(n^2) u ^ conj(u) = |u|^2 omega^n holds exactly."""
    return inner(u, u, metric).real / factorial(metric.n)


def lefschetz(a, metric, r=1):
    """L^r a = omega^r ^ a."""
    _check_metric(a, metric)
    if r < 0:
        raise ValueError("negative Lefschetz power")
    return wedge(metric.omega_power(r), a)


def lambda_op(a, metric):
    """Adjoint of the Lefschetz operator w.r.t. the pointwise inner product."""
    _check_metric(a, metric)
    out = Form.zero(a.n)
    for (p, q) in a.bidegrees():
        if p == 0 or q == 0:
            continue
        lam = metric.lambda_matrix(p, q)
        v = lam @ pq_vec(a, p, q)
        out = out + vec_pq(a.n, v, p - 1, q - 1)
    return out


def hodge_star(a, metric):
    """Hodge star associated with the metric, sending (p,q) to (n-q,n-p)."""
    _check_metric(a, metric)
    out = Form.zero(a.n)
    for (p, q) in a.bidegrees():
        s = metric.star_matrix(p, q)
        v = s @ pq_vec(a, p, q)
        out = out + vec_pq(a.n, v, a.n - q, a.n - p)
    return out


def primitive_decompose(a, metric, rank_tol=1e-8):
    """Split a = primitive + omega ^ residual at the supported bidegrees.

    (n-1,1): residual in (n-2,0); (1,2): residual in (0,1). The parts are
    orthogonal and the primitive one is annihilated by the Lefschetz dual.
    """
    _check_metric(a, metric)
    n = metric.n
    try:
        pq = a.bidegree()
    except WrongDegree as exc:
        raise UnsupportedBidegree(str(exc)) from None
    if pq == (n - 1, 1):
        res_pq = (n - 2, 0)
    elif pq == (1, 2):
        res_pq = (0, 1)
    else:
        raise UnsupportedBidegree("primitive split supports (n-1,1) and (1,2),"
                                  " got %s" % (pq,))
    p, q = pq
    rp, rq = res_pq
    dom = basis(n, rp, rq)
    cod = basis(n, p, q)
    lmat = matrix_of(lambda f: lefschetz(f, metric), n, dom, cod)
    t_cod = metric._T(p, q)
    sol = np.linalg.pinv(t_cod @ lmat, rcond=rank_tol) @ (t_cod @ pq_vec(a, p, q))
    residual = vec_form(n, sol, dom)
    prim = a - lefschetz(residual, metric)
    return prim, residual


def star_split_n(a, metric):
    """Eigencomponents of the star operator on forms of total degree n.

    Returns (plus, minus) with star(plus) = eps*plus, star(minus) = -eps*minus,
    eps = 1 for even n and i for odd n.
    """
    _check_metric(a, metric)
    n = metric.n
    for (p, q) in a.bidegrees():
        if p + q != n:
            raise WrongDegree("star splitting needs a form of total degree n")
    eps = 1.0 if n % 2 == 0 else 1j
    sa = hodge_star(a, metric)
    plus = 0.5 * (a + (1.0 / eps) * sa)
    minus = 0.5 * (a - (1.0 / eps) * sa)
    return plus, minus


def torsion_tau(a, metric, d_omega):
    """Torsion operator: commutator of the Lefschetz dual with wedging by
    the given (2,1)-form (the holomorphic differential of omega)."""
    _check_metric(a, metric)
    if d_omega.n != a.n:
        raise DimMismatch("forms over different dimensions")
    if not d_omega.is_zero() and d_omega.bidegree() != (2, 1):
        raise WrongDegree("torsion operator expects a (2,1)-form")
    return lambda_op(wedge(d_omega, a), metric) - wedge(d_omega, lambda_op(a, metric))


def torsion_tau_conj(a, metric, dbar_omega):
    """Conjugate torsion operator, built from the (1,2) differential of omega."""
    _check_metric(a, metric)
    if dbar_omega.n != a.n:
        raise DimMismatch("forms over different dimensions")
    if not dbar_omega.is_zero() and dbar_omega.bidegree() != (1, 2):
        raise WrongDegree("conjugate torsion operator expects a (1,2)-form")
    return lambda_op(wedge(dbar_omega, a), metric) - wedge(dbar_omega, lambda_op(a, metric))


def gram_matrix(metric, p, q):
    """Pointwise Gram matrix on the canonical blade basis of (p,q)."""
    return metric.gram(p, q)


def l2_gram(metric, p, q):
    return metric.gram(p, q) * metric.det


def adjoint_matrix(m, g_dom, g_cod):
    """Adjoint of the matrix m w.r.t. Gram matrices on domain and codomain:
    <m a, b>_cod = <a, adj b>_dom."""
    return np.linalg.solve(g_dom, m.conj().T @ g_cod)


# ---------------------------------------------------------------------------
# vector-form bases and inner products

@lru_cache(maxsize=None)
def vf_basis(n, q):
    """Canonical basis of (0,q) vector forms: (frame index, anti mask)."""
    return tuple((j, a) for j in range(1, n + 1) for a in _mask_basis(n, q))


def vf_vec(theta, q):
    bas = vf_basis(theta.n, q)
    return np.array([theta._c.get(key, 0j) for key in bas], dtype=complex)


def vec_vf(n, vec, q):
    bas = vf_basis(n, q)
    return VectorForm(n, {key: c for key, c in zip(bas, vec)})


def vf_inner(theta, eta, metric):
    """Pointwise inner product of vector forms: form part paired with the
    inner product on (0,q), vector part with the metric matrix itself."""
    if theta.n != eta.n or theta.n != metric.n:
        raise DimMismatch("vector forms over different dimensions")
    total = 0j
    for j in range(1, metric.n + 1):
        a_j = theta.component_form(j)
        if a_j.is_zero():
            continue
        for k in range(1, metric.n + 1):
            b_k = eta.component_form(k)
            if b_k.is_zero():
                continue
            total += metric.h[j - 1, k - 1] * inner(a_j, b_k, metric)
    return complex(total)


def vf_l2_inner(theta, eta, metric):
    return vf_inner(theta, eta, metric) * metric.det


def vf_norm(theta, metric):
    return float(np.sqrt(max(vf_inner(theta, theta, metric).real, 0.0)))


def vf_gram(metric, q):
    """Gram matrix of the canonical (0,q) vector-form basis."""
    key = ("vfG", q)
    if key not in metric._cache:
        n = metric.n
        bas = vf_basis(n, q)
        g_form = metric.gram(0, q)
        form_pos = {a: i for i, a in enumerate(_mask_basis(n, q))}
        g = np.zeros((len(bas), len(bas)), dtype=complex)
        for r, (jr, ar) in enumerate(bas):
            for c, (jc, ac) in enumerate(bas):
                # entry <basis_c, basis_r>: rows conjugate-linear slot
                g[r, c] = metric.h[jc - 1, jr - 1] * \
                    g_form[form_pos[ar], form_pos[ac]]
        metric._cache[key] = 0.5 * (g + g.conj().T)
    return metric._cache[key]


def vf_dbar_frame_term(n, structure_coeff):
    """Helper used by models: the frame-vector differential
    dbar Z_b = sum_(k,c) coeff(e^b ^ ebar^k in the structure form of c)
    ebar^k (x) Z_c; structure_coeff is a callable (b, k, c) -> coefficient."""
    terms = {}
    for b in range(1, n + 1):
        for k in range(1, n + 1):
            for c in range(1, n + 1):
                v = structure_coeff(b, k, c)
                if v:
                    terms[(b, k, c)] = v
    return terms
