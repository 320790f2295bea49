"""Finite invariant-form models of compact complex manifolds.

A model is a complex dimension n together with structure equations
d e^c = (2-form with constant coefficients) for the holomorphic coframe
e^1..e^n; conjugation determines d on the conjugate coframe. Exterior
differentiation extends to all invariant forms by the Leibniz rule, so every
differential operator in sight becomes a finite matrix on blade coefficients.

Validity checks at build time: each structure form must have no (0,2)
component (integrability of the complex structure) and d must square to
zero. Whether d kills all (2n-1)-forms (unimodularity, ie invariance of the
integral) is recorded as a flag; operations that integrate by parts check it.

Models are described by JSON: see the bundled fixture files for the format.
"""

import json
from math import comb
from pathlib import Path

import numpy as np

from . import _linalg
from .errors import (
    DimMismatch, IntegrabilityViolated, NoDClosedRepresentative,
    NotClosedSquare, NotInKernel, ParseError, WrongDegree,
)
from .exterior import (
    Form, HermitianMetric, VectorForm, adjoint_matrix, basis, degree_basis,
    form_vec, gram_matrix, lambda_op, matrix_of, pq_vec, vec_form,
    vec_pq, vec_vf, vf_basis, vf_gram, vf_vec, wedge, _indices,
)

__all__ = [
    "Model", "load_model", "build_model", "builtin_model", "builtin_names",
    "operator_matrix", "cohomology", "ddbar_lemma_check", "metric_flags",
    "harmonic_representative", "minimal_d_closed_rep", "harmonic_basis",
    "dbar_vector_form", "vf_operator_matrix", "vf_cohomology_basis",
    "solve_minimal_norm",
]

_TOP_KEYS = {"schema", "name", "complex_dim", "structure", "metric"}
_STRUCT_KEYS = {"d_of", "terms"}
_TERM_KEYS = {"coeff", "holo", "anti"}


# ---------------------------------------------------------------------------
# parsing

def _parse_index_list(raw, n, where):
    if not isinstance(raw, list) or not all(isinstance(i, int) for i in raw):
        raise ParseError("%s must be a list of integers" % where)
    if any(not (1 <= i <= n) for i in raw):
        raise ParseError("%s indices must lie in 1..%d" % (where, n))
    if any(a >= b for a, b in zip(raw, raw[1:])):
        raise ParseError("%s indices must be strictly increasing" % where)
    return raw


def _parse_complex(raw, where):
    if (not isinstance(raw, list) or len(raw) != 2
            or not all(isinstance(x, (int, float)) for x in raw)):
        raise ParseError("%s must be a [re, im] pair" % where)
    return complex(raw[0], raw[1])


def load_model(source):
    """Parse a model description from a path, JSON text is not accepted;
    pass a dict for in-memory descriptions. Raises ParseError on any
    malformed content, including unknown keys."""
    if isinstance(source, (str, Path)):
        try:
            raw = json.loads(Path(source).read_text())
        except OSError as exc:
            raise ParseError("cannot read model file: %s" % exc) from None
        except json.JSONDecodeError as exc:
            raise ParseError("invalid JSON: %s" % exc) from None
    elif isinstance(source, dict):
        raw = source
    else:
        raise ParseError("model source must be a path or a dict")
    if not isinstance(raw, dict):
        raise ParseError("model description must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ParseError("unknown keys: %s" % ", ".join(sorted(unknown)))
    if raw.get("schema") != 1:
        raise ParseError("schema must be 1")
    name = raw.get("name")
    if not isinstance(name, str) or not name:
        raise ParseError("name must be a nonempty string")
    n = raw.get("complex_dim")
    if not isinstance(n, int) or n < 1:
        raise ParseError("complex_dim must be a positive integer")
    structure = raw.get("structure")
    if not isinstance(structure, list):
        raise ParseError("structure must be a list")
    d_holo = {c: Form.zero(n) for c in range(1, n + 1)}
    seen = set()
    for entry in structure:
        if not isinstance(entry, dict):
            raise ParseError("structure entries must be objects")
        unknown = set(entry) - _STRUCT_KEYS
        if unknown:
            raise ParseError("unknown structure keys: %s"
                             % ", ".join(sorted(unknown)))
        c = entry.get("d_of")
        if not isinstance(c, int) or not (1 <= c <= n):
            raise ParseError("d_of must be a coframe index in 1..%d" % n)
        if c in seen:
            raise ParseError("duplicate structure equation for index %d" % c)
        seen.add(c)
        terms = entry.get("terms")
        if not isinstance(terms, list):
            raise ParseError("terms must be a list")
        total = Form.zero(n)
        for term in terms:
            if not isinstance(term, dict):
                raise ParseError("terms must be objects")
            unknown = set(term) - _TERM_KEYS
            if unknown:
                raise ParseError("unknown term keys: %s"
                                 % ", ".join(sorted(unknown)))
            coeff = _parse_complex(term.get("coeff"), "coeff")
            holo = _parse_index_list(term.get("holo", []), n, "holo")
            anti = _parse_index_list(term.get("anti", []), n, "anti")
            if len(holo) + len(anti) != 2:
                raise ParseError("each structure term must be a 2-form")
            total = total + Form.blade(n, holo, anti, coeff)
        d_holo[c] = total
    metric = None
    if "metric" in raw:
        rows = raw["metric"]
        if (not isinstance(rows, list) or len(rows) != n
                or any(not isinstance(r, list) or len(r) != n for r in rows)):
            raise ParseError("metric must be an %dx%d matrix" % (n, n))
        metric = np.array([[_parse_complex(x, "metric entry") for x in r]
                           for r in rows])
    return {"name": name, "complex_dim": n, "d_holo": d_holo, "metric": metric}


def builtin_names():
    return sorted(p.stem for p in
                  (Path(__file__).parent / "fixtures").glob("*.json"))


def builtin_model(name, metric=None):
    path = Path(__file__).parent / "fixtures" / ("%s.json" % name)
    if not path.exists():
        raise ParseError("no bundled model named %r (have: %s)"
                         % (name, ", ".join(builtin_names())))
    return build_model(load_model(path), metric=metric)


# ---------------------------------------------------------------------------
# model

class Model:
    """Structure equations plus a Hermitian metric, with cached operator
    matrices for the differential machinery."""

    def __init__(self, name, n, d_holo, metric):
        self.name = name
        self.n = n
        self.d_holo = d_holo
        self.d_anti = {c: f.conjugate() for c, f in d_holo.items()}
        self.metric = metric
        self._dblade = {}
        self._mats = {}
        self._dbar_z = None
        self.unimodular = self._check_unimodular()

    # -- exterior derivative ---------------------------------------------

    def _d_blade(self, h, a):
        key = (h, a)
        if key not in self._dblade:
            out = Form.zero(self.n)
            word = [("h", i) for i in _indices(h)] + \
                [("a", i) for i in _indices(a)]
            for t, (kind, idx) in enumerate(word):
                df = self.d_holo[idx] if kind == "h" else self.d_anti[idx]
                if df.is_zero():
                    continue
                if kind == "h":
                    rest = (h ^ (1 << (idx - 1)), a)
                else:
                    rest = (h, a ^ (1 << (idx - 1)))
                sign = -1.0 if t & 1 else 1.0
                # df is a 2-form, so it slides freely to the front
                out = out + sign * wedge(df, Form(self.n, {rest: 1.0}))
            self._dblade[key] = out
        return self._dblade[key]

    def d(self, a):
        if a.n != self.n:
            raise DimMismatch("form does not match the model dimension")
        out = Form.zero(self.n)
        for (h, am), c in a.items():
            out = out + c * self._d_blade(h, am)
        return out

    def partial(self, a):
        out = Form.zero(self.n)
        for (p, q) in a.bidegrees():
            out = out + self.d(a.bidegree_part(p, q)).bidegree_part(p + 1, q)
        return out

    def dbar(self, a):
        out = Form.zero(self.n)
        for (p, q) in a.bidegrees():
            out = out + self.d(a.bidegree_part(p, q)).bidegree_part(p, q + 1)
        return out

    def _check_unimodular(self, tol=1e-12):
        k = 2 * self.n - 1
        for key in degree_basis(self.n, k):
            if not self._d_blade(*key).is_zero(tol):
                return False
        return True

    def omega(self):
        return self.metric.omega()

    def d_omega(self):
        return self.d(self.metric.omega())

    # -- frame-vector differential ----------------------------------------

    def dbar_frame_vectors(self):
        """dbar Z_b as (0,1) vector forms, from the structure equations:
        the e^b ^ ebar^k coefficient of d e^c feeds ebar^k (x) Z_c."""
        if self._dbar_z is None:
            out = {b: VectorForm.zero(self.n) for b in range(1, self.n + 1)}
            for c in range(1, self.n + 1):
                for (h, am), v in self.d_holo[c].items():
                    if bin(h).count("1") == 1 and bin(am).count("1") == 1:
                        b = h.bit_length()
                        k = am.bit_length()
                        out[b] = out[b] + VectorForm(
                            self.n, {(c, 1 << (k - 1)): v})
            self._dbar_z = out
        return self._dbar_z


def build_model(parsed, metric=None, tol=1e-12):
    """Construct a Model from load_model output (or a raw description dict).

    Raises IntegrabilityViolated when some structure form has a (0,2)
    component and NotClosedSquare when d does not square to zero.
    """
    if "d_holo" not in parsed:
        parsed = load_model(parsed)
    n = parsed["complex_dim"]
    d_holo = parsed["d_holo"]
    for c, f in d_holo.items():
        if not f.bidegree_part(0, 2).is_zero(tol):
            raise IntegrabilityViolated(
                "structure form of e^%d has a (0,2) component" % c)
    if metric is None:
        metric = parsed.get("metric")
    if metric is None:
        hm = HermitianMetric(n)
    elif isinstance(metric, HermitianMetric):
        hm = metric
    else:
        hm = HermitianMetric(n, metric)
    model = Model(parsed["name"], n, d_holo, hm)
    for c, f in d_holo.items():
        dd = model.d(f)
        if not dd.is_zero(tol * max(f.max_abs(), 1.0)):
            raise NotClosedSquare(
                "d squared is nonzero on e^%d (defect %.3e)"
                % (c, dd.max_abs()))
    return model


# ---------------------------------------------------------------------------
# operator matrices

_PURE_OPS = {
    "partial": "partial", "∂": "partial",
    "dbar": "dbar", "∂̄": "dbar",
    "partial_star": "partial_star", "∂*": "partial_star",
    "dbar_star": "dbar_star", "∂̄*": "dbar_star",
    "delta_p": "delta_p", "Δ'": "delta_p",
    "delta_pp": "delta_pp", "Δ''": "delta_pp",
    "delta_a": "delta_a", "Δ_A": "delta_a",
}
_DEGREE_OPS = {
    "d": "d", "d_star": "d_star", "d*": "d_star",
    "delta": "delta", "Δ": "delta",
}


def _mat(model, name, *args):
    key = (name,) + args
    if key in model._mats:
        return model._mats[key]
    n = model.n
    m = None
    if name == "d":
        (k,) = args
        dom = degree_basis(n, k)
        cod = degree_basis(n, k + 1)
        m = matrix_of(model.d, n, dom, cod)
    elif name == "partial":
        p, q = args
        m = matrix_of(model.partial, n, basis(n, p, q), basis(n, p + 1, q))
    elif name == "dbar":
        p, q = args
        m = matrix_of(model.dbar, n, basis(n, p, q), basis(n, p, q + 1))
    elif name == "gram_k":
        (k,) = args
        blades = degree_basis(n, k)
        g = np.zeros((len(blades), len(blades)), dtype=complex)
        pos = 0
        for p in range(min(n, k), max(0, k - n) - 1, -1):
            q = k - p
            sz = comb(n, p) * comb(n, q)
            g[pos:pos + sz, pos:pos + sz] = gram_matrix(model.metric, p, q)
            pos += sz
        m = g
    elif name == "d_star":
        (k,) = args
        m = adjoint_matrix(_mat(model, "d", k - 1),
                           _mat(model, "gram_k", k - 1),
                           _mat(model, "gram_k", k))
    elif name == "partial_star":
        p, q = args
        m = adjoint_matrix(_mat(model, "partial", p - 1, q),
                           gram_matrix(model.metric, p - 1, q),
                           gram_matrix(model.metric, p, q))
    elif name == "dbar_star":
        p, q = args
        m = adjoint_matrix(_mat(model, "dbar", p, q - 1),
                           gram_matrix(model.metric, p, q - 1),
                           gram_matrix(model.metric, p, q))
    elif name == "delta":
        (k,) = args
        m = _mat(model, "d_star", k + 1) @ _mat(model, "d", k) + \
            _mat(model, "d", k - 1) @ _mat(model, "d_star", k)
    elif name == "delta_p":
        p, q = args
        m = _mat(model, "partial_star", p + 1, q) @ _mat(model, "partial", p, q) + \
            _mat(model, "partial", p - 1, q) @ _mat(model, "partial_star", p, q)
    elif name == "delta_pp":
        p, q = args
        m = _mat(model, "dbar_star", p, q + 1) @ _mat(model, "dbar", p, q) + \
            _mat(model, "dbar", p, q - 1) @ _mat(model, "dbar_star", p, q)
    elif name == "delta_a":
        p, q = args
        g = gram_matrix(model.metric, p, q)
        dd = _mat(model, "partial", p, q + 1) @ _mat(model, "dbar", p, q)
        dd_in = _mat(model, "partial", p - 1, q) @ _mat(model, "dbar", p - 1, q - 1)
        dd_in_adj = adjoint_matrix(dd_in, gram_matrix(model.metric, p - 1, q - 1), g)
        dd_adj = adjoint_matrix(dd, g, gram_matrix(model.metric, p + 1, q + 1))
        c_out = _mat(model, "partial", p, q - 1) @ _mat(model, "dbar_star", p, q)
        c_out_adj = adjoint_matrix(c_out, g, gram_matrix(model.metric, p + 1, q - 1))
        c_in = _mat(model, "partial", p - 1, q) @ _mat(model, "dbar_star", p - 1, q + 1)
        c_in_adj = adjoint_matrix(c_in, gram_matrix(model.metric, p - 1, q + 1), g)
        m = (_mat(model, "partial", p - 1, q) @ _mat(model, "partial_star", p, q)
             + _mat(model, "dbar", p, q - 1) @ _mat(model, "dbar_star", p, q)
             + dd_adj @ dd + dd_in @ dd_in_adj
             + c_out_adj @ c_out + c_in @ c_in_adj)
    else:
        raise ValueError("unknown operator %r" % name)
    model._mats[key] = m
    return m


def operator_matrix(model, op, bidegree):
    """Matrix of a differential operator on blade coefficients.

    Pure-type operators (partial, dbar, their adjoints, delta_p, delta_pp,
    delta_a) take a (p,q) pair; d, d_star and delta take a total degree.
    """
    if op in _PURE_OPS:
        if not (isinstance(bidegree, (tuple, list)) and len(bidegree) == 2):
            raise ValueError("%s needs a (p, q) bidegree" % op)
        p, q = int(bidegree[0]), int(bidegree[1])
        return _mat(model, _PURE_OPS[op], p, q)
    if op in _DEGREE_OPS:
        if isinstance(bidegree, (tuple, list)):
            raise ValueError("%s needs a total degree" % op)
        return _mat(model, _DEGREE_OPS[op], int(bidegree))
    raise ValueError("unknown operator name %r" % op)


# ---------------------------------------------------------------------------
# cohomology

def _derham_dims(model, tol):
    n2 = 2 * model.n
    dims = {}
    for k in range(n2 + 1):
        zk = len(degree_basis(model.n, k)) - _linalg.rank(_mat(model, "d", k), tol)
        bk = _linalg.rank(_mat(model, "d", k - 1), tol) if k else 0
        dims[k] = zk - bk
    return dims


def _dolbeault_dims(model, tol):
    dims = {}
    for p in range(model.n + 1):
        for q in range(model.n + 1):
            sz = comb(model.n, p) * comb(model.n, q)
            z = sz - _linalg.rank(_mat(model, "dbar", p, q), tol)
            b = _linalg.rank(_mat(model, "dbar", p, q - 1), tol)
            dims[(p, q)] = z - b
    return dims


def _aeppli_dims(model, tol):
    dims = {}
    for p in range(model.n + 1):
        for q in range(model.n + 1):
            sz = comb(model.n, p) * comb(model.n, q)
            dd = _mat(model, "partial", p, q + 1) @ _mat(model, "dbar", p, q)
            z = sz - _linalg.rank(dd, tol)
            span = np.hstack([_mat(model, "partial", p - 1, q),
                              _mat(model, "dbar", p, q - 1)])
            dims[(p, q)] = z - _linalg.rank(span, tol)
    return dims


def _harmonic_dims(model, theory, tol):
    if theory == "deRham":
        return {k: len(degree_basis(model.n, k))
                - _linalg.rank(_mat(model, "delta", k), tol)
                for k in range(2 * model.n + 1)}
    op = "delta_pp" if theory == "Dolbeault" else "delta_a"
    return {(p, q): comb(model.n, p) * comb(model.n, q)
            - _linalg.rank(_mat(model, op, p, q), tol)
            for p in range(model.n + 1) for q in range(model.n + 1)}


_THEORIES = {"derham": "deRham", "dolbeault": "Dolbeault", "aeppli": "Aeppli"}


def cohomology(model, theory="deRham", rank_tol=_linalg.DEFAULT_RANK_TOL):
    """Dimensions of the chosen cohomology, computed two independent ways
    (rank-nullity on the raw operators, and kernels of the matching
    Laplacian); both gradings are reported together with agreement."""
    key = _THEORIES.get(str(theory).lower())
    if key is None:
        raise ValueError("theory must be one of %s" % sorted(_THEORIES.values()))
    if key == "deRham":
        dims = _derham_dims(model, rank_tol)
    elif key == "Dolbeault":
        dims = _dolbeault_dims(model, rank_tol)
    else:
        dims = _aeppli_dims(model, rank_tol)
    harm = _harmonic_dims(model, key, rank_tol)
    return {
        "theory": key,
        "dims": dims,
        "dims_harmonic": harm,
        "agree": dims == harm,
    }


def harmonic_basis(model, theory, deg, rank_tol=_linalg.DEFAULT_RANK_TOL):
    """Forms spanning the harmonic space of the chosen theory at the given
    degree ((p,q) pair, or total degree for deRham)."""
    key = _THEORIES.get(str(theory).lower())
    if key == "deRham":
        k = int(deg)
        ns = _linalg.nullspace(_mat(model, "delta", k), rank_tol)
        blades = degree_basis(model.n, k)
        return [vec_form(model.n, ns[:, i], blades) for i in range(ns.shape[1])]
    if key is None:
        raise ValueError("theory must be one of %s" % sorted(_THEORIES.values()))
    p, q = deg
    op = "delta_pp" if key == "Dolbeault" else "delta_a"
    ns = _linalg.nullspace(_mat(model, op, p, q), rank_tol)
    return [vec_pq(model.n, ns[:, i], p, q) for i in range(ns.shape[1])]


# ---------------------------------------------------------------------------
# ddbar lemma

def _pure_type_d_image(model, p, q, rank_tol):
    """Basis, in (p,q) blade coordinates, of the d-exact forms of pure
    type (p,q)."""
    n = model.n
    img = _linalg.colspace(_mat(model, "d", p + q - 1), rank_tol)
    blades = degree_basis(n, p + q)
    rows = [i for i, (h, _) in enumerate(blades) if bin(h).count("1") == p]
    other = [i for i in range(len(blades)) if i not in rows]
    if other and img.shape[1]:
        off_block = img[other, :]
        inside = _linalg.nullspace(off_block, rank_tol)
        img = img @ inside
    return img[rows, :] if img.shape[1] else \
        np.zeros((len(rows), 0), dtype=complex)


def ddbar_lemma_check(model, rank_tol=_linalg.DEFAULT_RANK_TOL):
    """Check, bidegree by bidegree, whether closed pure-type forms have all
    exactness notions agree; on failure return a witness that is exact in
    one of the weak senses but not in the image of partial dbar."""
    n = model.n
    report = {}
    holds = True
    witness = None
    witness_pq = None
    for k in range(2 * n + 1):
        for p in range(min(n, k), max(0, k - n) - 1, -1):
            q = k - p
            z = _linalg.intersect(
                _linalg.nullspace(_mat(model, "partial", p, q), rank_tol),
                _linalg.nullspace(_mat(model, "dbar", p, q), rank_tol),
                rank_tol)
            im_p = _linalg.intersect(z, _mat(model, "partial", p - 1, q),
                                     rank_tol)
            im_q = _linalg.intersect(z, _mat(model, "dbar", p, q - 1),
                                     rank_tol)
            im_d = _linalg.intersect(z, _pure_type_d_image(model, p, q,
                                                           rank_tol), rank_tol)
            im_dd = _linalg.colspace(
                _mat(model, "partial", p - 1, q)
                @ _mat(model, "dbar", p - 1, q - 1), rank_tol)
            dims = {"closed": z.shape[1], "partial_exact": im_p.shape[1],
                    "dbar_exact": im_q.shape[1], "d_exact": im_d.shape[1],
                    "ddbar_exact": im_dd.shape[1]}
            ok = (dims["partial_exact"] == dims["ddbar_exact"]
                  and dims["dbar_exact"] == dims["ddbar_exact"]
                  and dims["d_exact"] == dims["ddbar_exact"])
            report[(p, q)] = {"dims": dims, "holds": ok}
            if not ok and witness is None:
                g = gram_matrix(model.metric, p, q)
                proj = _linalg.gram_projector(im_dd, g, rank_tol) \
                    if im_dd.shape[1] else \
                    np.zeros((g.shape[0], g.shape[0]), dtype=complex)
                for candidate_space in (im_d, im_p, im_q):
                    for i in range(candidate_space.shape[1]):
                        v = candidate_space[:, i] - proj @ candidate_space[:, i]
                        if np.abs(v).max() > 1e-8:
                            first = int(np.nonzero(np.abs(v) > 1e-8)[0][0])
                            v = v / v[first]
                            witness = vec_pq(n, v, p, q).prune(1e-12)
                            witness_pq = (p, q)
                            break
                    if witness is not None:
                        break
            holds = holds and ok
    return {"holds": holds, "by_bidegree": report,
            "witness": witness, "witness_bidegree": witness_pq}


# ---------------------------------------------------------------------------
# metric flags

def metric_flags(model, tol=1e-10):
    """Closedness properties of the model metric's fundamental form, plus
    the trace condition on its differential."""
    n = model.n
    omega = model.metric.omega()
    d_omega = model.d(omega)
    omega_n1 = model.metric.omega_power(n - 1)
    d_omega_n1 = model.d(omega_n1)
    ddbar_omega_n1 = model.partial(model.dbar(omega_n1))
    lam = lambda_op(d_omega, model.metric)
    flags = {
        "kahler": d_omega.is_zero(tol),
        "balanced": d_omega_n1.is_zero(tol),
        "gauduchon": ddbar_omega_n1.is_zero(tol),
        "lambda_d_omega_zero": lam.is_zero(tol),
    }
    flags["balanced_matches_trace_condition"] = \
        flags["balanced"] == flags["lambda_d_omega_zero"]
    return flags


# ---------------------------------------------------------------------------
# representatives

def harmonic_representative(model, a, theory="Dolbeault",
                            rank_tol=_linalg.DEFAULT_RANK_TOL, tol=1e-9):
    """Project a closed form onto the harmonic space of the theory; raises
    NotInKernel when the input is not closed for that theory."""
    key = _THEORIES.get(str(theory).lower())
    if key is None:
        raise ValueError("theory must be one of %s" % sorted(_THEORIES.values()))
    scale = max(a.max_abs(), 1.0)
    if key == "deRham":
        degs = {p + q for (p, q) in a.bidegrees()}
        if len(degs) > 1:
            raise WrongDegree("deRham representative needs a homogeneous degree")
        k = degs.pop() if degs else 0
        if not model.d(a).is_zero(tol * scale):
            raise NotInKernel("form is not d-closed")
        blades = degree_basis(model.n, k)
        vec = form_vec(a, blades)
        ns = _linalg.nullspace(_mat(model, "delta", k), rank_tol)
        g = _mat(model, "gram_k", k)
        proj = _linalg.gram_projector(ns, g, rank_tol) if ns.shape[1] else \
            np.zeros((len(blades), len(blades)))
        return vec_form(model.n, proj @ vec, blades)
    p, q = a.bidegree()
    vec = pq_vec(a, p, q)
    g = gram_matrix(model.metric, p, q)
    if key == "Dolbeault":
        if not model.dbar(a).is_zero(tol * scale):
            raise NotInKernel("form is not dbar-closed")
        op = "delta_pp"
    else:
        if not model.partial(model.dbar(a)).is_zero(tol * scale):
            raise NotInKernel("form is not partial-dbar-closed")
        op = "delta_a"
    ns = _linalg.nullspace(_mat(model, op, p, q), rank_tol)
    proj = _linalg.gram_projector(ns, g, rank_tol) if ns.shape[1] else \
        np.zeros((len(vec), len(vec)))
    return vec_pq(model.n, proj @ vec, p, q)


def solve_minimal_norm(model, mat, b_form, dom_pq, cod_pq,
                       rank_tol=_linalg.DEFAULT_RANK_TOL):
    """Minimal-norm least-squares solve of mat x = b between (p,q) slots,
    in the metric norms; returns (x as a Form, residual in the codomain
    norm)."""
    t_dom = model.metric._T(*dom_pq)
    t_cod = model.metric._T(*cod_pq)
    b = pq_vec(b_form, *cod_pq)
    x, residual = _linalg.minimal_norm_solve(mat, b, t_dom, t_cod, rank_tol)
    return vec_pq(model.n, x, *dom_pq), residual


def minimal_d_closed_rep(model, a, tol=1e-9,
                         rank_tol=_linalg.DEFAULT_RANK_TOL):
    """Smallest d-closed form in the Dolbeault class of a.

    Takes the harmonic representative h and corrects it to h + dbar(v) with
    partial(dbar v) = -partial(h), choosing the minimal-norm potential v.
    Raises NoDClosedRepresentative when that equation has no solution, ie
    the class admits no d-closed representative of pure type.
    """
    p, q = a.bidegree()
    harm = harmonic_representative(model, a, "Dolbeault", rank_tol, tol)
    target = -1.0 * model.partial(harm)
    scale = max(harm.max_abs(), 1.0)
    candidate = harm
    if not target.is_zero(1e-14 * scale):
        if q == 0:
            raise NoDClosedRepresentative(
                "harmonic form at (%d, 0) is not d-closed" % p)
        pd = _mat(model, "partial", p, q) @ _mat(model, "dbar", p, q - 1)
        v, residual = solve_minimal_norm(model, pd, target, (p, q - 1),
                                         (p + 1, q), rank_tol)
        b_norm = float(np.linalg.norm(model.metric._T(p + 1, q)
                                      @ pq_vec(target, p + 1, q)))
        if residual > tol * max(b_norm, 1.0):
            raise NoDClosedRepresentative(
                "no d-closed representative: residual %.3e" % residual)
        candidate = harm + model.dbar(v)
    if q == 0:
        return candidate
    # minimize over the remaining freedom: dbar-exact corrections that stay
    # d-closed, ie dbar of potentials killed by partial dbar
    pd = _mat(model, "partial", p, q) @ _mat(model, "dbar", p, q - 1)
    stay = _linalg.nullspace(pd, rank_tol)
    correction_span = _mat(model, "dbar", p, q - 1) @ stay
    if correction_span.shape[1]:
        g = gram_matrix(model.metric, p, q)
        proj = _linalg.gram_projector(correction_span, g, rank_tol)
        vec = pq_vec(candidate, p, q)
        candidate = vec_pq(model.n, vec - proj @ vec, p, q)
    return candidate


# ---------------------------------------------------------------------------
# vector-form differential

def dbar_vector_form(model, theta):
    """dbar on (0,q) forms valued in the holomorphic frame vectors:
    dbar(alpha (x) Z_b) = (dbar alpha) (x) Z_b + (-1)^q alpha ^ dbar Z_b."""
    if theta.n != model.n:
        raise DimMismatch("vector form does not match the model dimension")
    conn = model.dbar_frame_vectors()
    out = VectorForm.zero(model.n)
    for (b, amask), c in theta.items():
        alpha = Form(model.n, {(0, amask): c})
        q = bin(amask).count("1")
        d_alpha = model.dbar(alpha)
        for (h, am), v in d_alpha.items():
            out = out + VectorForm(model.n, {(b, am): v})
        sign = -1.0 if q & 1 else 1.0
        for (cvec, am2), v2 in conn[b].items():
            prod = wedge(alpha, Form(model.n, {(0, am2): 1.0}))
            for (h, am3), v3 in prod.items():
                out = out + VectorForm(model.n, {(cvec, am3): sign * v2 * v3})
    return out


def vf_operator_matrix(model, q):
    """Matrix of the vector-form dbar from (0,q) to (0,q+1) components."""
    key = ("vf_dbar", q)
    if key not in model._mats:
        dom = vf_basis(model.n, q)
        cod = vf_basis(model.n, q + 1)
        cols = []
        for (j, amask) in dom:
            img = dbar_vector_form(
                model, VectorForm(model.n, {(j, amask): 1.0}))
            cols.append(vf_vec(img, q + 1))
        model._mats[key] = (np.column_stack(cols) if cols
                            else np.zeros((len(cod), 0), dtype=complex))
    return model._mats[key]


def vf_cohomology_basis(model, q=1, rank_tol=_linalg.DEFAULT_RANK_TOL):
    """Harmonic representatives of the (0,q) vector-form cohomology, w.r.t.
    the vector-form inner product of the model metric."""
    a = vf_operator_matrix(model, q)
    g = vf_gram(model.metric, q)
    g_up = vf_gram(model.metric, q + 1)
    a_star = np.linalg.solve(g, a.conj().T @ g_up)
    lap = a_star @ a
    if q >= 1:
        b = vf_operator_matrix(model, q - 1)
        g_dn = vf_gram(model.metric, q - 1)
        b_star = np.linalg.solve(g_dn, b.conj().T @ g)
        lap = lap + b @ b_star
    ns = _linalg.nullspace(lap, rank_tol)
    return [vec_vf(model.n, ns[:, i], q) for i in range(ns.shape[1])]
