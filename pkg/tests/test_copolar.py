"""Copolarised subspaces, pairings, star split, metrics, symplectic maps."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from hdl.copolar import (
    CopolarisedSpace, class_coords, codifferential_kernel_match,
    contraction_class_matrix, copolarised_subspace, harmonic_star_matrix,
    pairings, period_domain_check, polarised_subspace, primitive_11,
    primitive_11_rep, primitive_n11_space, primitive_rep_search,
    primitivity_kernel_match, star_cohomology_matrix, star_projectors,
    symplectic_maps, wp_metrics, _split_potential,
)
from hdl.deformation import canonical_trivialization, cy_contract
from hdl.errors import (
    Degenerate, DimMismatch, DimTooSmall, NotBalanced, NotInKernel,
    NotInPlusSpace, NotPrimitiveClass, NotUnimodular, NotUnique, WrongDegree,
)
from hdl.exterior import (
    Form, VectorForm, contract, degree_basis, form_vec, integrate, l2_norm,
    omega_form, pq_vec, primitive_decompose, vf_basis, vf_vec, wedge,
    wedge_power,
)
from hdl.model import (
    _mat, build_model, builtin_model, cohomology, dbar_vector_form,
    harmonic_basis, harmonic_representative, metric_flags,
    vf_cohomology_basis,
)
from hdl import _linalg
from oracles import random_form, random_metric


def rng():
    return np.random.default_rng(20260814)


def _desc(n, name="m", structure=()):
    return {"schema": 1, "name": name, "complex_dim": n,
            "structure": list(structure)}


def _term(coeff, holo=(), anti=()):
    return {"coeff": [coeff.real, coeff.imag] if isinstance(coeff, complex)
            else [coeff, 0.0], "holo": list(holo), "anti": list(anti)}


def torus(n, metric=None):
    return build_model(_desc(n, "torus%d" % n), metric=metric)


def nil3ab(metric=None):
    # abelian complex structure, d e^3 = e^1 ^ ebar^2; balanced, not ddbar
    return build_model(_desc(3, "nil3ab", [
        {"d_of": 3, "terms": [_term(1.0, [1], [2])]}]), metric=metric)


def vf_span(members, q=1):
    if not members:
        return np.zeros((0, 0), dtype=complex)
    return np.column_stack([vf_vec(th, q) for th in members])


def spans_match(a, b):
    return _linalg.contains(a, b) and _linalg.contains(b, a)


def random_vf(r, n, q=1):
    bas = vf_basis(n, q)
    vals = r.standard_normal(len(bas)) + 1j * r.standard_normal(len(bas))
    return VectorForm(n, dict(zip(bas, vals)))


# ---------------------------------------------------------------------------
# copolarised and polarised subspaces


def test_copolarised_dimensions():
    for name, want in (("torus2", 3), ("torus3", 6), ("iwasawa", 3)):
        m = builtin_model(name)
        cop = copolarised_subspace(m)
        assert cop.dim == want
        assert cop.ambient_dim == len(vf_cohomology_basis(m, 1))
        assert cop.dim <= cop.ambient_dim


def test_copolarised_membership_is_exact_on_fixtures():
    # Im dbar vanishes at (n-2, n) on these models, so membership in the
    # kernel means the contraction form itself vanishes
    for name in ("torus2", "torus3", "iwasawa"):
        m = builtin_model(name)
        cop = copolarised_subspace(m)
        for th in cop.basis:
            assert contract(th, cop.omega_power).max_abs() < 1e-12


def test_copolarised_torus2_dim_matches_h11_minus_one():
    m = builtin_model("torus2")
    grid = cohomology(m, "Dolbeault")["dims"]
    assert copolarised_subspace(m).dim == grid[(1, 1)] - 1


def test_copolarised_zero_map_gives_full_ambient():
    # n = 1: omega^(n-1) is a scalar, the contraction map is identically zero
    m = torus(1)
    cop = copolarised_subspace(m)
    assert cop.ambient_dim == 1
    assert cop.dim == 1


def test_copolarised_requires_balanced():
    with pytest.raises(NotBalanced):
        copolarised_subspace(builtin_model("kodaira_thurston"))


def test_polarised_equals_copolarised_on_kahler_tori():
    r = rng()
    for n in (2, 3):
        for metric in (None, random_metric(r, n)):
            m = torus(n, metric=metric)
            pol = vf_span(polarised_subspace(m))
            cop = vf_span(copolarised_subspace(m).basis)
            assert pol.shape[1] == cop.shape[1]
            assert spans_match(pol, cop)


def test_polarised_differs_from_copolarised_on_iwasawa():
    m = builtin_model("iwasawa")
    pol = polarised_subspace(m)
    cop = copolarised_subspace(m)
    assert len(pol) == 4
    assert cop.dim == 3
    assert _linalg.contains(vf_span(pol), vf_span(cop.basis))
    assert not _linalg.contains(vf_span(cop.basis), vf_span(pol))


def test_lefschetz_mechanism_on_kahler_tori():
    # omega^(n-2) carries the harmonic (0,2) space onto the harmonic
    # (n-2, n) space; on the flat models both harmonic spaces are full, so
    # the content is that the Lefschetz power is a bijection between them
    r = rng()
    for n in (2, 3):
        m = torus(n, metric=random_metric(r, n))
        low = harmonic_basis(m, "Dolbeault", (0, 2))
        high = harmonic_basis(m, "Dolbeault", (n - 2, n))
        opow = wedge_power(omega_form(m.metric), n - 2)
        img = np.column_stack(
            [pq_vec(wedge(opow, b), n - 2, n) for b in low])
        hi = np.column_stack([pq_vec(b, n - 2, n) for b in high])
        assert spans_match(img, hi)
        # both dbar images vanish here, which is the degenerate case of the
        # three-space part of the comparison
        assert _linalg.colspace(_mat(m, "dbar", 0, 1)).shape[1] == 0
        assert _linalg.colspace(_mat(m, "dbar", n - 2, n - 1)).shape[1] == 0


def test_class_membership_independent_of_theta_representative():
    # shifting theta by dbar xi moves the contraction by a dbar-exact form
    m = nil3ab()
    n = m.n
    r = rng()
    opow = wedge_power(omega_form(m.metric), n - 1)
    exact = _linalg.colspace(_mat(m, "dbar", n - 2, n - 1))
    for th in vf_cohomology_basis(m, 1):
        xi = random_vf(r, n, q=0)
        shift = contract(dbar_vector_form(m, xi), opow)
        vec = pq_vec(shift, n - 2, n)
        if exact.shape[1]:
            sol = np.linalg.lstsq(exact, vec, rcond=None)[0]
            resid = float(np.linalg.norm(exact @ sol - vec))
        else:
            resid = float(np.linalg.norm(vec))
        assert resid < 1e-9 * max(float(np.linalg.norm(vec)), 1.0)


def test_class_membership_independent_of_omega_representative():
    # shifting omega^(n-1) by dbar lambda moves the contraction by
    # dbar(theta -| lambda) when dbar theta = 0
    m = nil3ab()
    n = m.n
    r = rng()
    exact = _linalg.colspace(_mat(m, "dbar", n - 2, n - 1))
    for th in vf_cohomology_basis(m, 1):
        lam = random_form(r, n, n - 1, n - 2)
        shift = contract(th, m.dbar(lam))
        vec = pq_vec(shift, n - 2, n)
        sol = np.linalg.lstsq(exact, vec, rcond=None)[0]
        resid = float(np.linalg.norm(exact @ sol - vec))
        assert resid < 1e-9 * max(float(np.linalg.norm(vec)), 1.0)


# ---------------------------------------------------------------------------
# primitive (n-1,1) classes and the representative search


def test_primitive_n11_space_dimensions_and_closedness():
    for name, want in (("torus2", 3), ("torus3", 6), ("iwasawa", 3)):
        m = builtin_model(name)
        reps = primitive_n11_space(m)
        assert len(reps) == want
        for a in reps:
            assert a.bidegree() == (m.n - 1, 1)
            assert m.dbar(a).max_abs() < 1e-10


def test_primitive_n11_reps_are_primitive_forms_on_tori():
    for n in (2, 3):
        m = torus(n)
        om = omega_form(m.metric)
        for a in primitive_n11_space(m):
            assert wedge(om, a).max_abs() < 1e-12


def test_split_potential_reassembles():
    r = rng()
    for n, metric in ((3, None), (3, random_metric(rng(), 3)),
                      (4, None), (4, random_metric(rng(), 4))):
        m = torus(n, metric=metric)
        w = random_form(r, n, n - 2, n - 1)
        alpha0, xi = _split_potential(m, w)
        om = omega_form(m.metric)
        opow = wedge_power(om, n - 1)
        back = wedge(wedge_power(om, n - 3), alpha0) + contract(xi, opow)
        assert_allclose(
            pq_vec(back, n - 2, n - 1), pq_vec(w, n - 2, n - 1), atol=1e-10)
        prim, resid = primitive_decompose(alpha0, m.metric)
        assert resid.max_abs() < 1e-10


def test_split_potential_zero_input():
    m = torus(3)
    alpha0, xi = _split_potential(m, Form.zero(3))
    assert alpha0.is_zero()
    assert xi.is_zero()


def test_primitive_rep_search_kahler_found_and_harmonic():
    m = torus(3)
    u = canonical_trivialization(m)
    om = omega_form(m.metric)
    for th in copolarised_subspace(m).basis:
        out = primitive_rep_search(m, th, u=u)
        assert out["found"]
        rep = out["representative"]
        # flat model: the corrected representative is the harmonic one
        harm = harmonic_representative(m, cy_contract(u, th), "Dolbeault")
        assert (rep - harm).max_abs() < 1e-10
        assert wedge(om, rep).max_abs() < 1e-10
        assert out["defect"] < 1e-12


def test_primitive_rep_search_trivial_path():
    # contraction vanishes identically, so the potential, the correction
    # and the obstruction all come back zero
    m = torus(3)
    th = copolarised_subspace(m).basis[0]
    out = primitive_rep_search(m, th)
    assert out["found"]
    assert out["potential"].max_abs() < 1e-12
    assert out["xi"].max_abs() < 1e-12
    assert out["obstruction"].max_abs() < 1e-12


def test_primitive_rep_search_accepts_form_input():
    m = torus(3)
    u = canonical_trivialization(m)
    th = copolarised_subspace(m).basis[1]
    out_vf = primitive_rep_search(m, th, u=u)
    out_form = primitive_rep_search(m, cy_contract(u, th), u=u)
    diff = out_vf["representative"] - out_form["representative"]
    assert diff.max_abs() < 1e-10


def test_primitive_rep_search_iwasawa_empirical():
    # every copolarised contraction vanishes exactly here, so the search
    # reports success with a primitive representative
    m = builtin_model("iwasawa")
    u = canonical_trivialization(m)
    om = omega_form(m.metric)
    for th in copolarised_subspace(m).basis:
        out = primitive_rep_search(m, th, u=u)
        assert out["found"]
        assert wedge(om, out["representative"]).max_abs() < 1e-10


def test_primitive_rep_search_found_matches_primitivity():
    m = nil3ab()
    u = canonical_trivialization(m)
    om = omega_form(m.metric)
    for th in copolarised_subspace(m).basis:
        out = primitive_rep_search(m, th, u=u)
        is_prim = wedge(om, out["representative"]).max_abs() < 1e-8
        assert out["found"] == is_prim


def test_primitive_rep_search_rejects_small_dimension():
    m = torus(2)
    th = copolarised_subspace(m).basis[0]
    with pytest.raises(DimTooSmall):
        primitive_rep_search(m, th)


def test_primitive_rep_search_rejects_nonmember():
    # ebar^1 (x) Z_2 pairs two different frame directions, so its
    # contraction with omega^2 is a nonzero constant form with no potential
    m = torus(3)
    th = VectorForm.basis_element(3, 2, anti=(1,))
    with pytest.raises(NotPrimitiveClass):
        primitive_rep_search(m, th)


def test_primitive_rep_search_rejects_non_closed():
    m = nil3ab()
    th = VectorForm.basis_element(3, 1, anti=(1,))  # ebar^1 (x) Z_1
    assert dbar_vector_form(m, th).max_abs() > 1e-9
    with pytest.raises(NotInKernel):
        primitive_rep_search(m, th)


# ---------------------------------------------------------------------------
# pairings, star split, period membership


def test_harmonic_star_matrix_square():
    for name in ("torus2", "torus3", "iwasawa"):
        m = builtin_model(name)
        hb, _, s = harmonic_star_matrix(m)
        want = ((-1.0) ** m.n) * np.eye(len(hb))
        assert_allclose(s @ s, want, atol=1e-10)


def test_pairings_dimensions_and_patterns():
    for name, total, half in (("torus2", 6, 3), ("iwasawa", 10, 5)):
        m = builtin_model(name)
        rep = pairings(m)
        assert len(rep.basis) == total
        assert len(rep.plus_basis) == half
        assert len(rep.minus_basis) == half
        assert _linalg.rank(rep.q) == total
        hp = rep.plus_coords.conj().T @ rep.h @ rep.plus_coords
        hm = rep.minus_coords.conj().T @ rep.h @ rep.minus_coords
        hx = rep.plus_coords.conj().T @ rep.h @ rep.minus_coords
        assert np.linalg.eigvalsh(0.5 * (hp + hp.conj().T)).min() > 0
        assert np.linalg.eigvalsh(0.5 * (hm + hm.conj().T)).max() < 0
        assert np.abs(hx).max() < 1e-10


def test_pairings_h_is_squared_norm_on_plus_space():
    r = rng()
    for name in ("torus2", "torus3", "iwasawa"):
        m = builtin_model(name)
        rep = pairings(m)
        n = m.n
        phase = 1j ** (n * n)
        coeff = r.standard_normal(len(rep.plus_basis)) \
            + 1j * r.standard_normal(len(rep.plus_basis))
        a = Form.zero(n)
        for c, b in zip(coeff, rep.plus_basis):
            a = a + complex(c) * b
        hval = (phase * integrate(wedge(a, a.conjugate()))).real
        assert_allclose(hval, l2_norm(a, m.metric) ** 2, rtol=1e-10)
        bm = rep.minus_basis[0]
        hneg = (phase * integrate(wedge(bm, bm.conjugate()))).real
        assert_allclose(hneg, -l2_norm(bm, m.metric) ** 2, rtol=1e-10)


def test_pairings_trivialization_class_is_isotropic_and_positive():
    m = builtin_model("torus3")
    u = canonical_trivialization(m)
    rep = pairings(m)
    bl = degree_basis(m.n, m.n)
    hbmat = np.column_stack([form_vec(b, bl) for b in rep.basis])
    coords = np.linalg.lstsq(hbmat, form_vec(u, bl), rcond=None)[0]
    assert abs(coords @ rep.q @ coords) < 1e-12
    assert (coords.conj() @ rep.h @ coords).real > 0


def test_pairings_require_unimodular():
    bad = build_model(_desc(2, "aff2", [
        {"d_of": 2, "terms": [_term(1.0, [1, 2], [])]}]))
    assert not bad.unimodular
    with pytest.raises(NotUnimodular):
        pairings(bad)


def test_period_domain_check_accepts_trivialization():
    for name in ("torus2", "torus3"):
        m = builtin_model(name)
        rep = pairings(m)
        u = canonical_trivialization(m)
        assert period_domain_check(rep, u) is True


def test_period_domain_check_rejects_non_isotropic():
    # the fundamental class is a plus class with nonzero self-intersection
    m = builtin_model("torus2")
    rep = pairings(m)
    assert period_domain_check(rep, omega_form(m.metric)) is False


def test_period_domain_check_zero_class():
    m = builtin_model("torus2")
    rep = pairings(m)
    assert period_domain_check(rep, Form.zero(2)) is False


def test_period_domain_check_rejects_minus_class():
    m = builtin_model("torus3")
    rep = pairings(m)
    with pytest.raises(NotInPlusSpace):
        period_domain_check(rep, rep.minus_basis[0])


def test_period_domain_check_rejects_wrong_degree():
    m = builtin_model("torus3")
    rep = pairings(m)
    with pytest.raises(WrongDegree):
        period_domain_check(rep, omega_form(m.metric))


def test_star_cohomology_matrix_properties():
    r = rng()
    for name in ("torus2", "torus3", "iwasawa"):
        base = builtin_model(name)
        n = base.n
        ref = harmonic_basis(base, "deRham", n)
        eps = 1.0 if n % 2 == 0 else 1j
        for metric in (None, random_metric(r, n)):
            m = builtin_model(name, metric=metric)
            s = star_cohomology_matrix(m, reference=ref)
            assert_allclose(s @ s, ((-1.0) ** n) * np.eye(len(ref)),
                            atol=1e-9)
            pp, pm = star_projectors(m, reference=ref)
            assert_allclose(pp @ pp, pp, atol=1e-9)
            assert_allclose(pp + pm, np.eye(len(ref)), atol=1e-12)
            assert_allclose(s @ pp, eps * pp, atol=1e-9)
            assert_allclose(s @ pm, -eps * pm, atol=1e-9)
            rep = pairings(m)
            assert _linalg.rank(pp) == len(rep.plus_basis)


def test_star_projector_fixes_own_fundamental_class():
    # the plus projector built from a metric fixes the de Rham class of
    # that metric's fundamental form (n = 2: the form is its own star)
    r = rng()
    base = builtin_model("torus2")
    ref = harmonic_basis(base, "deRham", 2)
    bl = degree_basis(2, 2)
    refmat = np.column_stack([form_vec(b, bl) for b in ref])
    for _ in range(3):
        m = builtin_model("torus2", metric=random_metric(r, 2))
        pp, _ = star_projectors(m, reference=ref)
        c = np.linalg.lstsq(refmat, form_vec(omega_form(m.metric), bl),
                            rcond=None)[0]
        assert np.linalg.norm(pp @ c - c) < 1e-9 * np.linalg.norm(c)


def test_star_requires_unimodular():
    bad = build_model(_desc(2, "aff2", [
        {"d_of": 2, "terms": [_term(1.0, [1, 2], [])]}]))
    with pytest.raises(NotUnimodular):
        star_cohomology_matrix(bad)


# ---------------------------------------------------------------------------
# metrics on the copolarised directions


def test_wp_metrics_flat_tori_all_equal():
    r = rng()
    for n in (2, 3):
        for metric in (None, random_metric(r, n)):
            m = torus(n, metric=metric)
            rep = wp_metrics(m)
            assert rep.dim == copolarised_subspace(m).dim
            assert not rep.warnings and not rep.excluded
            # constant-coefficient metric: both L2 metrics and the wedge
            # metric coincide and the omega-trace parts vanish
            assert_allclose(rep.gram_g1, rep.gram_g2, atol=1e-10)
            assert_allclose(rep.gram_g2, rep.gram_gamma, atol=1e-10)
            assert np.max(rep.zeta_sq) < 1e-12
            assert np.linalg.eigvalsh(rep.gram_g1).min() > 0
            assert rep.identity_defect < 1e-10


def test_wp_metrics_iwasawa():
    m = builtin_model("iwasawa")
    rep = wp_metrics(m)
    assert rep.dim == 3
    assert not rep.excluded
    for g in (rep.gram_g1, rep.gram_g2, rep.gram_gamma):
        assert_allclose(g, g.conj().T, atol=1e-12)
        assert np.linalg.eigvalsh(g).min() > 0
    gap = rep.gram_g2 - rep.gram_gamma
    assert np.linalg.eigvalsh(gap).min() > -1e-12
    for i in range(rep.dim):
        assert_allclose(gap[i, i].real, 4.0 * rep.zeta_sq[i] / rep.den,
                        atol=1e-12)


def test_wp_metrics_excludes_direction_without_closed_rep():
    m = nil3ab()
    rep = wp_metrics(m)
    assert rep.excluded == [3]
    assert len(rep.warnings) == 1
    assert "no d-closed representative" in rep.warnings[0]
    assert rep.dim == 3
    assert np.linalg.eigvalsh(rep.gram_g2).min() > 0


def test_wp_metrics_gap_formula_nonzero_zeta():
    # a non-copolarised direction passed explicitly: its d-closed
    # representative has a nonzero omega-trace part, which separates the
    # second metric from the wedge metric by exactly 4 zeta^2 / den
    m = torus(3)
    th = VectorForm.basis_element(3, 2, anti=(1,))
    amb = len(vf_cohomology_basis(m, 1))
    space = CopolarisedSpace([th], amb, wedge_power(omega_form(m.metric), 2))
    rep = wp_metrics(m, space=space)
    assert rep.zeta_sq[0] > 1e-3
    gap = (rep.gram_g2 - rep.gram_gamma)[0, 0].real
    assert_allclose(gap, 4.0 * rep.zeta_sq[0] / rep.den, rtol=1e-10)
    assert rep.gram_g2[0, 0].real > rep.gram_gamma[0, 0].real


def test_wp_metrics_requires_balanced():
    with pytest.raises(NotBalanced):
        wp_metrics(builtin_model("kodaira_thurston"))


# ---------------------------------------------------------------------------
# primitive (1,1) classes


def test_primitive_11_dimensions():
    for name, want in (("torus2", 3), ("torus3", 8), ("iwasawa", 5)):
        m = builtin_model(name)
        assert len(primitive_11(m)) == want


def test_primitive_11_torus_dim_is_h11_minus_one():
    for n in (2, 3):
        m = torus(n)
        grid = cohomology(m, "Dolbeault")["dims"]
        assert len(primitive_11(m)) == grid[(1, 1)] - 1


def test_primitive_11_rep_postcondition():
    for name in ("torus2", "torus3", "iwasawa"):
        m = builtin_model(name)
        opow = wedge_power(omega_form(m.metric), m.n - 1)
        for cls in primitive_11(m):
            rep = primitive_11_rep(m, cls)
            assert wedge(opow, rep).max_abs() < 1e-10
            # the correction is dbar-exact, so the class is unchanged
            diff = rep - harmonic_representative(m, cls, "Dolbeault")
            vec = pq_vec(diff, 1, 1)
            exact = _linalg.colspace(_mat(m, "dbar", 1, 0))
            if exact.shape[1]:
                sol = np.linalg.lstsq(exact, vec, rcond=None)[0]
                assert np.linalg.norm(exact @ sol - vec) < 1e-10
            else:
                assert np.linalg.norm(vec) < 1e-10


def test_primitive_11_rep_is_harmonic_on_kahler():
    m = torus(3)
    for cls in primitive_11(m):
        rep = primitive_11_rep(m, cls)
        harm = harmonic_representative(m, cls, "Dolbeault")
        assert (rep - harm).max_abs() < 1e-10


def test_primitive_11_rep_rejects_fundamental_class():
    m = builtin_model("torus2")
    with pytest.raises(NotPrimitiveClass):
        primitive_11_rep(m, omega_form(m.metric))


def test_primitive_11_requires_balanced():
    with pytest.raises(NotBalanced):
        primitive_11(builtin_model("kodaira_thurston"))


# ---------------------------------------------------------------------------
# symplectic contraction maps


def test_symplectic_maps_torus2():
    m = builtin_model("torus2")
    sigma = Form.blade(2, (1, 2), (), 1.0)
    out = symplectic_maps(m, sigma)
    assert out["bijective"]
    assert out["kernel_preserved"]
    assert out["image_preserved"]
    assert out["primitive_iso_check"] is True
    assert out["d_closed"]
    assert out["dim_copolarised"] == 3
    assert out["dim_primitive_11"] == 3
    assert out["class_matrix"].shape == (4, 4)
    assert _linalg.rank(out["matrix"]) == out["matrix"].shape[0]


def test_symplectic_maps_odd_dimension_degenerate():
    m = builtin_model("torus3")
    sigma = Form.blade(3, (1, 2), (), 1.0)
    with pytest.raises(Degenerate):
        symplectic_maps(m, sigma)


def test_symplectic_maps_zero_rows_degenerate():
    m = torus(4)
    sigma = Form.blade(4, (1, 2), (), 1.0)  # rows 3 and 4 vanish
    with pytest.raises(Degenerate):
        symplectic_maps(m, sigma)


def test_symplectic_maps_nonunique_top_class():
    m = torus(4)
    sigma = Form.blade(4, (1, 2), (), 1.0) + Form.blade(4, (3, 4), (), 1.0)
    with pytest.raises(NotUnique):
        symplectic_maps(m, sigma)


def test_symplectic_maps_rejects_wrong_degree():
    m = builtin_model("torus2")
    with pytest.raises(WrongDegree):
        symplectic_maps(m, omega_form(m.metric))


def test_symplectic_maps_rejects_dimension_mismatch():
    m = builtin_model("torus2")
    with pytest.raises(DimMismatch):
        symplectic_maps(m, Form.blade(3, (1, 2), (), 1.0))


def test_symplectic_maps_rejects_non_dbar_closed():
    # d e^2 = e^2 ^ ebar^1 makes dbar(e^1 ^ e^2) nonzero
    m = build_model(_desc(2, "tw2", [
        {"d_of": 2, "terms": [_term(1.0, [2], [1])]}]))
    sigma = Form.blade(2, (1, 2), (), 1.0)
    assert m.dbar(sigma).max_abs() > 1e-9
    with pytest.raises(NotInKernel):
        symplectic_maps(m, sigma)


# ---------------------------------------------------------------------------
# kernel matches and the class-level contraction


def test_codifferential_kernel_match():
    r = rng()
    for name in ("torus2", "torus3", "iwasawa"):
        n = builtin_model(name).n
        for metric in (None, random_metric(r, n)):
            m = builtin_model(name, metric=metric)
            assert metric_flags(m)["balanced"]
            out = codifferential_kernel_match(m)
            assert out["equal"]


def test_primitivity_kernel_match():
    r = rng()
    for name in ("torus2", "torus3", "iwasawa"):
        n = builtin_model(name).n
        for metric in (None, random_metric(r, n)):
            m = builtin_model(name, metric=metric)
            out = primitivity_kernel_match(m)
            assert out["equal"]


def test_contraction_class_matrix_injective_on_ddbar_models():
    for n in (2, 3):
        m = torus(n)
        mat = contraction_class_matrix(m)
        amb = len(vf_cohomology_basis(m, 1))
        assert mat.shape[1] == amb
        assert _linalg.rank(mat) == amb


def test_contraction_identity_omega_powers():
    # theta -| omega^2 = 2 omega ^ (theta -| omega) for (0,1) inputs
    r = rng()
    for n in (3, 4):
        m = torus(n, metric=random_metric(r, n))
        om = omega_form(m.metric)
        for _ in range(5):
            th = random_vf(r, n)
            lhs = contract(th, wedge(om, om))
            rhs = 2.0 * wedge(om, contract(th, om))
            assert (lhs - rhs).max_abs() < 1e-9 * max(lhs.max_abs(), 1.0)


def test_class_coords_roundtrip_mod_exact():
    m = builtin_model("iwasawa")
    hb = harmonic_basis(m, "Dolbeault", (0, 2))
    shift = m.dbar(Form.blade(3, (), (3,), 1.0))
    assert shift.max_abs() > 0.5
    a = hb[0] + 2.0 * hb[1] + shift
    coords = class_coords(m, a, hb)
    assert_allclose(coords, np.array([1.0, 2.0]), atol=1e-10)


def test_class_coords_errors():
    m = nil3ab()
    hb = harmonic_basis(m, "Dolbeault", (1, 0))
    assert len(hb) == 2
    bad = Form.blade(3, (3,), (), 1.0)
    assert m.dbar(bad).max_abs() > 1e-9
    with pytest.raises(NotInKernel):
        class_coords(m, bad, hb)
    t = builtin_model("torus2")
    tb = harmonic_basis(t, "Dolbeault", (1, 1))
    with pytest.raises(Degenerate):
        class_coords(t, tb[0], tb[1:])
