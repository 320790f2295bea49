"""Release gate: the full verification ladder at shipping tolerances.

One test per gate entry, so the verbose run reads as a checklist:
pointwise identity families at scale, the contraction Leibniz oracle,
commutation relations as matrix identities, cohomology regressions,
ddbar verdicts with witness, the quadratic bracket identity, power
series behaviour, intersection pairing structure, metric comparison
formulas, symplectic transfer, subspace coincidence, and byte-level
report determinism.
"""

import hashlib
import time
from math import comb, factorial
from pathlib import Path

import numpy as np
from numpy.testing import assert_allclose

import hdl.cli
from hdl import _linalg
from hdl.cli import RunConfig, cmd_identities, cmd_wp
from hdl.cli import _family_commutation
from hdl.copolar import (CopolarisedSpace, copolarised_subspace, pairings,
                         period_domain_check, polarised_subspace,
                         star_projectors, symplectic_maps, wp_metrics)
from hdl.deformation import (bracket, canonical_trivialization, cy_contract,
                             deformation_directions, kuranishi_series,
                             maurer_cartan_residual, scalar_bracket)
from hdl.exterior import (Form, HermitianMetric, VectorForm, basis, contract,
                          gram_matrix, hodge_star, integrate, l2_inner,
                          l2_norm, lambda_op, lefschetz, matrix_of,
                          omega_form, pq_vec, sq_norm_canonical, vec_pq,
                          vf_basis, vf_vec, wedge, wedge_power)
from hdl.model import (builtin_model, cohomology, dbar_vector_form,
                       ddbar_lemma_check, harmonic_basis, metric_flags,
                       operator_matrix)
from oracles import random_form, random_metric

FIXTURES = Path(hdl.cli.__file__).parent / "fixtures"


def rng(seed=20260814):
    return np.random.default_rng(seed)


def random_vf(r, n, q):
    keys = vf_basis(n, q)
    vals = r.standard_normal(len(keys)) + 1j * r.standard_normal(len(keys))
    return VectorForm(n, dict(zip(keys, vals)))


def random_primitive(r, metric, p, q):
    n = metric.n
    dom = basis(n, p, q)
    lam = matrix_of(lambda f: lambda_op(f, metric), n, dom,
                    basis(n, p - 1, q - 1))
    null = _linalg.nullspace(lam, 1e-8)
    c = null @ (r.standard_normal(null.shape[1])
                + 1j * r.standard_normal(null.shape[1]))
    return vec_pq(n, c, p, q)


def test_gate_01_pointwise_identity_families():
    # eight closed-form identities, 200 fresh random metrics per dimension
    r = rng()
    start = time.monotonic()
    worst = 0.0
    for n in (2, 3, 4):
        pq_all = [(p, q) for p in range(n + 1) for q in range(n + 1)
                  if 0 < p + q < 2 * n]
        pq_low = [(p, q) for p in range(n) for q in range(n) if p + q > 0]
        prim_combos = [(p, q, s) for p in range(n + 1) for q in range(n + 1)
                       if 0 < p + q <= n for s in range(n - p - q + 1)]
        for t in range(200):
            m = HermitianMetric(n, random_metric(r, n))
            # star squares to the degree parity
            p, q = pq_all[t % len(pq_all)]
            a = random_form(r, n, p, q)
            twice = hodge_star(hodge_star(a, m), m)
            worst = max(worst, (twice - ((-1) ** (p + q)) * a).max_abs()
                        / max(a.max_abs(), 1.0))
            # wedging with omega and its trace are adjoint
            p, q = pq_low[t % len(pq_low)]
            a = random_form(r, n, p, q)
            b = random_form(r, n, p + 1, q + 1)
            lhs = l2_inner(lefschetz(a, m), b, m)
            rhs = l2_inner(a, lambda_op(b, m), m)
            worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1.0))
            # [L^s, Lambda] = s (k - n + s - 1) L^(s-1) on k-forms
            p, q = pq_all[t % len(pq_all)]
            k = p + q
            a = random_form(r, n, p, q)
            for s in range(1, n):
                comm = lefschetz(lambda_op(a, m), m, s) - \
                    lambda_op(lefschetz(a, m, s), m)
                want = (s * (k - n + s - 1)) * lefschetz(a, m, s - 1)
                worst = max(worst, (comm - want).max_abs()
                            / max(a.max_abs(), 1.0))
            # star of omega^s ^ primitive, arbitrary type
            p, q, s = prim_combos[t % len(prim_combos)]
            k = p + q
            v = random_primitive(r, m, p, q)
            ov = wedge(m.omega_power(s), v)
            phase = ((-1) ** (k * (k - 1) // 2)) * (1j ** ((p - q) % 4))
            fac = factorial(s) / factorial(n - k - s)
            want = phase * fac * wedge(m.omega_power(n - k - s), v)
            worst = max(worst, (hodge_star(ov, m) - want).max_abs()
                        / max(ov.max_abs(), 1.0))
            # star fixes omega ^ (n-2,0) up to an i power
            v = random_form(r, n, n - 2, 0)
            ov = wedge(m.omega(), v)
            want = (1j ** ((n - 2) ** 2 % 4)) * ov
            worst = max(worst, (hodge_star(ov, m) - want).max_abs()
                        / max(ov.max_abs(), 1.0))
            # omega ^ a = (omega^2/2) ^ trace(a) on (n-1,1)-forms
            a = random_form(r, n, n - 1, 1)
            lhs = wedge(m.omega(), a)
            rhs = 0.5 * wedge(m.omega_power(2), lambda_op(a, m))
            worst = max(worst, (lhs - rhs).max_abs()
                        / max(lhs.max_abs(), 1.0))
            # i^(n^2) u ^ conj(u) = |u|^2 omega^n
            u = random_form(r, n, n, 0)
            lhs = (1j ** (n * n % 4)) * wedge(u, u.conjugate())
            rhs = sq_norm_canonical(u, m) * m.omega_power(n)
            worst = max(worst, (lhs - rhs).max_abs()
                        / max(lhs.max_abs(), 1.0))
            # wedging (0,2)-forms up the omega ladder rescales the metric
            if n >= 3:
                al = random_form(r, n, 0, 2)
                be = random_form(r, n, 0, 2)
                base = l2_inner(wedge(m.omega_power(n - 2), al),
                                wedge(m.omega_power(n - 2), be), m)
                for level in range(3, n + 1):
                    fac = factorial(n - 2) * factorial(level - 2) \
                        / factorial(n - level)
                    rhs = fac * l2_inner(wedge(m.omega_power(n - level), al),
                                         wedge(m.omega_power(n - level), be),
                                         m)
                    worst = max(worst, abs(base - rhs) / max(abs(base), 1.0))
    elapsed = time.monotonic() - start
    assert worst < 1e-9, worst
    assert elapsed < 30.0, elapsed


def test_gate_02_contraction_leibniz_oracle():
    # dbar through a contraction: minus sign for plain vector fields,
    # plus sign for (0,1) vector forms, against the metric's omega
    r = rng()
    worst = 0.0
    for name in ("torus2", "torus3", "iwasawa"):
        m = builtin_model(name)
        om = omega_form(m.metric)
        dbar_om = m.dbar(om)
        for _ in range(100):
            xi = random_vf(r, m.n, 0)
            lhs = m.dbar(contract(xi, om))
            rhs = contract(dbar_vector_form(m, xi), om) - \
                contract(xi, dbar_om)
            worst = max(worst, (lhs - rhs).max_abs())
            th = random_vf(r, m.n, 1)
            lhs = m.dbar(contract(th, om))
            rhs = contract(dbar_vector_form(m, th), om) + \
                contract(th, dbar_om)
            worst = max(worst, (lhs - rhs).max_abs())
    assert worst < 1e-9, worst


def test_gate_03_commutation_matrix_identities():
    # [trace, partial] and [trace, dbar] against the adjoints corrected by
    # the torsion operators, bidegree by bidegree on the iwasawa model
    fam = _family_commutation(builtin_model("iwasawa"), 1e-8)
    assert fam["trials"] > 0
    assert fam["failures"] == 0
    assert fam["max_defect"] < 1e-8, fam


def test_gate_04_cohomology_regression():
    m2 = builtin_model("torus2")
    dol = cohomology(m2, "Dolbeault")
    for p in range(3):
        for q in range(3):
            assert dol["dims"][(p, q)] == comb(2, p) * comb(2, q)
    assert dol["dims"][(1, 1)] == 4
    assert dol["agree"] and dol["dims"] == dol["dims_harmonic"]
    mi = builtin_model("iwasawa")
    doli = cohomology(mi, "Dolbeault")
    assert doli["dims"][(0, 1)] == 2
    assert doli["agree"] and doli["dims"] == doli["dims_harmonic"]
    for m in (m2, mi):
        der = cohomology(m, "deRham")
        assert der["dims"][1] == 4
        assert der["agree"] and der["dims"] == der["dims_harmonic"]


def test_gate_05_ddbar_verdicts_and_flags():
    assert ddbar_lemma_check(builtin_model("torus2"))["holds"]
    assert ddbar_lemma_check(builtin_model("torus3"))["holds"]
    m = builtin_model("iwasawa")
    chk = ddbar_lemma_check(m)
    assert not chk["holds"]
    assert chk["witness_bidegree"] == (2, 0)
    w = chk["witness"]
    assert set(dict(w.items())) == {(0b011, 0)}
    # the witness is the partial of minus the non-closed frame form
    assert (w + m.partial(Form.blade(3, holo=(3,)))).max_abs() < 1e-12
    flags = metric_flags(m)
    assert not flags["kahler"]
    assert flags["balanced"] and flags["gauduchon"]


def test_gate_06_quadratic_bracket_identity():
    # [th1 -| u, th2 -| u] = partial(th1 -| (th2 -| u)) on 50 closed pairs
    r = rng()
    m = builtin_model("iwasawa")
    u = canonical_trivialization(m)
    worst = 0.0
    for _ in range(50):
        th1 = random_vf(r, 3, 1)
        th2 = random_vf(r, 3, 1)
        w1 = cy_contract(u, th1)
        w2 = cy_contract(u, th2)
        assert m.partial(w1).max_abs() < 1e-12
        assert m.partial(w2).max_abs() < 1e-12
        lhs = scalar_bracket(m, u, w1, w2)
        rhs = m.partial(contract(th1, contract(th2, u)))
        worst = max(worst, (lhs - rhs).max_abs()
                    / max(th1.max_abs() * th2.max_abs(), 1.0))
    assert worst < 1e-8, worst
    for name in ("torus3", "iwasawa"):
        mm = builtin_model(name)
        for _ in range(10):
            a = random_vf(r, 3, 1)
            b = random_vf(r, 3, 1)
            assert (bracket(mm, a, b) - bracket(mm, b, a)).max_abs() < 1e-9
            lhs = dbar_vector_form(mm, bracket(mm, a, b))
            rhs = bracket(mm, dbar_vector_form(mm, a), b) - \
                bracket(mm, a, dbar_vector_form(mm, b))
            assert (lhs - rhs).max_abs() < 1e-9


def test_gate_07_power_series_behaviour():
    start = time.monotonic()
    for name in ("torus2", "torus3"):
        m = builtin_model(name)
        n = m.n
        u = canonical_trivialization(m)
        solve = operator_matrix(m, "dbar", (n - 1, 1)) @ \
            operator_matrix(m, "partial", (n - 2, 1))
        ker = _linalg.nullspace(solve, 1e-8)
        g = gram_matrix(m.metric, n - 2, 1)
        for eta in deformation_directions(m):
            s = kuranishi_series(m, u, eta, order=6)
            for k in range(1, 7):
                assert maurer_cartan_residual(s, k) < 1e-10
            for k in range(2, 7):
                assert s.phis[k].max_abs() < 1e-12
            for psi in s.psis.values():
                vec = pq_vec(psi, n - 2, 1)
                if ker.shape[1]:
                    defect = float(np.abs(ker.conj().T @ g @ vec)
                                   .max(initial=0.0))
                    assert defect < 1e-9
    assert time.monotonic() - start < 10.0


def test_gate_08_pairing_structure():
    r = rng()
    for name in ("torus2", "torus3", "iwasawa"):
        m = builtin_model(name)
        rep = pairings(m)
        dim = len(rep.basis)
        assert _linalg.rank(rep.q, 1e-8) == dim
        phase = 1j ** (m.n * m.n % 4)

        def hval(x, y):
            return phase * integrate(wedge(x, y.conjugate()))

        for _ in range(5):
            cp = r.standard_normal(len(rep.plus_basis))
            a = sum((c * b for c, b in zip(cp, rep.plus_basis)),
                    Form.zero(m.n))
            got = hval(a, a)
            want = l2_norm(a, m.metric) ** 2
            assert abs(got - want) < 1e-9 * max(want, 1.0)
            cm = r.standard_normal(len(rep.minus_basis))
            a = sum((c * b for c, b in zip(cm, rep.minus_basis)),
                    Form.zero(m.n))
            got = hval(a, a)
            want = -l2_norm(a, m.metric) ** 2
            assert abs(got - want) < 1e-9 * max(-want, 1.0)
        for pb in rep.plus_basis:
            for mb in rep.minus_basis:
                assert abs(hval(pb, mb)) < 1e-9
    for n, name in ((2, "torus2"), (3, "torus3")):
        m = builtin_model(name)
        u = Form.blade(n, holo=tuple(range(1, n + 1)))
        assert period_domain_check(pairings(m), u) is True
    # the plus projector compared across two random metrics on one
    # reference basis of the middle classes
    ref = harmonic_basis(builtin_model("torus2"), "deRham", 2)
    pa, _ = star_projectors(builtin_model("torus2",
                                          metric=random_metric(r, 2)),
                            reference=ref)
    pb, _ = star_projectors(builtin_model("torus2",
                                          metric=random_metric(r, 2)),
                            reference=ref)
    disagreement = float(np.abs(pa - pb).max())
    assert disagreement < 1e-8, (
        "plus projector moved by %.3e between two random metrics: the "
        "eigenspace split of the middle classes is metric dependent here; "
        "only its dimensions and the pairing signature are stable"
        % disagreement)


def test_gate_09_metric_comparison_formulas():
    rep2 = wp_metrics(builtin_model("torus2"))
    assert_allclose(rep2.gram_g2, rep2.gram_gamma, atol=1e-9)
    assert_allclose(rep2.gram_g1, rep2.gram_g2, atol=1e-9)
    m3 = builtin_model("torus3")
    th = VectorForm.basis_element(3, 2, anti=(1,))
    synthetic = wp_metrics(
        m3, space=CopolarisedSpace(
            [th], 9, wedge_power(omega_form(m3.metric), 2)))
    assert synthetic.zeta_sq[0] > 1e-3
    runs = [rep2, wp_metrics(m3), wp_metrics(builtin_model("iwasawa")),
            synthetic]
    for rep in runs:
        diff = rep.gram_g2 - rep.gram_gamma
        assert np.linalg.eigvalsh(diff).min() > -1e-9
        for i in range(rep.dim):
            gap = diff[i, i].real
            assert abs(gap - 4.0 * rep.zeta_sq[i] / rep.den) < 1e-9


def test_gate_10_symplectic_transfer():
    m = builtin_model("torus2")
    out = symplectic_maps(m, Form.blade(2, holo=(1, 2)))
    assert out["bijective"]
    assert out["kernel_preserved"] and out["image_preserved"]
    assert out["d_closed"]
    assert out["primitive_iso_check"] is True
    grid = cohomology(m, "Dolbeault")["dims"]
    assert out["dim_primitive_11"] == grid[(1, 1)] - 1 == 3
    assert out["dim_copolarised"] == 3


def test_gate_11_subspace_coincidence():
    for name in ("torus2", "torus3"):
        m = builtin_model(name)
        pol = polarised_subspace(m)
        cop = copolarised_subspace(m)
        a = np.column_stack([vf_vec(th, 1) for th in pol])
        b = np.column_stack([vf_vec(th, 1) for th in cop.basis])
        assert a.shape[1] == b.shape[1] > 0
        ra = _linalg.rank(a, 1e-8)
        rb = _linalg.rank(b, 1e-8)
        assert ra == rb == a.shape[1]
        assert _linalg.rank(np.hstack([a, b]), 1e-8) == ra


def test_gate_12_report_determinism():
    cfg = RunConfig(str(FIXTURES / "torus2.json"), seed=11)
    one = hashlib.sha256(cmd_identities(cfg, trials=40).to_json()
                         .encode()).hexdigest()
    two = hashlib.sha256(cmd_identities(cfg, trials=40).to_json()
                         .encode()).hexdigest()
    assert one == two
    wcfg = RunConfig(str(FIXTURES / "iwasawa.json"))
    assert cmd_wp(wcfg).to_json() == cmd_wp(wcfg).to_json()
