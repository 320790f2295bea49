"""Command line front end.

Subcommands validate model files, print cohomology tables, drive the
deformation series order by order, assemble the deformation-space metrics
and run randomized operator identity suites. Reports render as text tables
or as canonical JSON (sorted keys, complex numbers as [re, im] pairs), and
identical configuration plus seed yields byte-identical JSON.
"""

import argparse
import json
import sys

import numpy as np

from .copolar import wp_metrics
from .deformation import (canonical_trivialization, deformation_directions,
                          kuranishi_series)
from .errors import HdlError, ObstructionNotExact
from .exterior import (Form, HermitianMetric, VectorForm, adjoint_matrix,
                       basis, contract, hodge_star, l2_gram, l2_inner,
                       l2_norm, lambda_op, lefschetz, matrix_of, omega_form,
                       pq_vec, primitive_decompose, torsion_tau,
                       torsion_tau_conj, vec_form, vec_pq, vf_basis, wedge,
                       wedge_power)
from .model import (build_model, cohomology, dbar_vector_form,
                    ddbar_lemma_check, load_model, metric_flags)


class RunConfig:
    """Run parameters shared by every subcommand."""

    __slots__ = ("model_path", "tolerance", "rank_tolerance", "seed",
                 "order", "output")

    def __init__(self, model_path, tolerance=1e-9, rank_tolerance=1e-8,
                 seed=0, order=6, output="table"):
        if not tolerance > 0 or not rank_tolerance > 0:
            raise ValueError("tolerances must be positive")
        if int(order) < 1:
            raise ValueError("order must be at least 1")
        if output not in ("table", "json"):
            raise ValueError("output must be 'table' or 'json'")
        self.model_path = model_path
        self.tolerance = float(tolerance)
        self.rank_tolerance = float(rank_tolerance)
        self.seed = int(seed)
        self.order = int(order)
        self.output = output


class Report:
    """Structured outcome of one command run.

    exit_code is 0 for success, 1 when a property check failed and 2 when
    the input itself was rejected; it is carried on the object and not
    serialized, so JSON payloads depend only on configuration and seed.
    """

    __slots__ = ("command", "model", "results", "warnings", "defects",
                 "exit_code")

    def __init__(self, command, model, results, warnings=(), defects=None,
                 exit_code=0):
        self.command = command
        self.model = model
        self.results = results
        self.warnings = list(warnings)
        self.defects = dict(defects or {})
        self.exit_code = int(exit_code)

    def payload(self):
        return {
            "schema": 1,
            "command": self.command,
            "model": self.model,
            "results": _jsonable(self.results),
            "warnings": list(self.warnings),
            "defects": _jsonable(self.defects),
        }

    def to_json(self):
        return json.dumps(self.payload(), sort_keys=True, indent=2)

    def to_table(self):
        lines = ["command: %s" % self.command, "model: %s" % self.model]
        lines.extend(_table_lines(self.results))
        if self.defects:
            lines.append("defects:")
            lines.extend(_table_lines(self.defects, "  "))
        for w in self.warnings:
            lines.append("warning: %s" % w)
        lines.append("status: %s" % ("ok" if self.exit_code == 0 else "FAIL"))
        return "\n".join(lines)

    def render(self, output):
        return self.to_json() if output == "json" else self.to_table()


def _jsonable(value):
    if isinstance(value, dict):
        return {_key_str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (complex, np.complexfloating)):
        value = complex(value)
        return [float(value.real), float(value.imag)]
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if value is None or isinstance(value, str):
        return value
    return str(value)


def _key_str(key):
    if isinstance(key, tuple):
        return ",".join(str(k) for k in key)
    return str(key)


def _scalar_str(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return "%.6e" % float(value)
    if isinstance(value, (complex, np.complexfloating)):
        value = complex(value)
        return "%.6e%+.6ej" % (value.real, value.imag)
    return str(value)


def _table_lines(value, indent=""):
    lines = []
    if isinstance(value, dict):
        for key, item in value.items():
            name = _key_str(key)
            if isinstance(item, dict) or _is_matrix(item):
                lines.append("%s%s:" % (indent, name))
                lines.extend(_table_lines(item, indent + "  "))
            elif isinstance(item, (list, tuple, np.ndarray)):
                if len(item) and isinstance(item[0], (list, tuple)):
                    lines.append("%s%s:" % (indent, name))
                    for row in item:
                        lines.append("%s  [%s]" % (
                            indent, " ".join(_scalar_str(v) for v in row)))
                else:
                    row = " ".join(_scalar_str(v) for v in item)
                    lines.append("%s%s: [%s]" % (indent, name, row))
            else:
                lines.append("%s%s: %s" % (indent, name, _scalar_str(item)))
    elif _is_matrix(value):
        mat = np.asarray(value)
        for row in mat:
            lines.append(indent + "  ".join(_scalar_str(v) for v in row))
    else:
        lines.append("%s%s" % (indent, _scalar_str(value)))
    return lines


def _is_matrix(value):
    return isinstance(value, np.ndarray) and value.ndim == 2


def _load(config):
    return build_model(load_model(config.model_path))


# ---------------------------------------------------------------------------
# validate


def cmd_validate(config):
    """Structural verdicts: parsing, d^2 = 0, integrability, unimodularity
    and metric positivity. Any rejection is reported as a structured
    diagnostic with exit code 2."""
    try:
        parsed = load_model(config.model_path)
        model = build_model(parsed)
    except (HdlError, ValueError) as exc:
        results = {
            "ok": False,
            "error": {"kind": type(exc).__name__, "message": str(exc)},
        }
        return Report("validate", str(config.model_path), results,
                      exit_code=2)
    flags = metric_flags(model)
    results = {
        "ok": True,
        "complex_dim": model.n,
        "d_squared_zero": True,
        "integrable": True,
        "metric_positive": True,
        "unimodular": bool(model.unimodular),
        "zero_structure": all(f.is_zero() for f in parsed["d_holo"].values()),
        "flags": {k: bool(v) for k, v in flags.items()},
    }
    return Report("validate", model.name, results)


# ---------------------------------------------------------------------------
# cohomology


def cmd_cohomology(config, theory="Dolbeault", bidegree=None):
    """Dimension tables for the requested theory, de Rham Betti numbers and
    the ddbar comparison verdict with a witness when it fails."""
    model = _load(config)
    out = cohomology(model, theory, rank_tol=config.rank_tolerance)
    betti = cohomology(model, "deRham", rank_tol=config.rank_tolerance)
    results = {"theory": out["theory"]}
    if out["theory"] == "deRham":
        dims = [out["dims"][k] for k in range(2 * model.n + 1)]
    else:
        dims = [[out["dims"][(p, q)] for q in range(model.n + 1)]
                for p in range(model.n + 1)]
        if bidegree is not None:
            p, q = bidegree
            results["bidegree"] = [int(p), int(q)]
            dims = out["dims"][(int(p), int(q))]
    results["dims"] = dims
    results["harmonic_agree"] = bool(out["agree"] and betti["agree"])
    results["betti"] = [betti["dims"][k] for k in range(2 * model.n + 1)]
    dd = ddbar_lemma_check(model, rank_tol=config.rank_tolerance)
    verdict = {"holds": bool(dd["holds"])}
    if not dd["holds"]:
        verdict["witness"] = str(dd["witness"])
        verdict["witness_bidegree"] = list(dd["witness_bidegree"])
    results["ddbar"] = verdict
    exit_code = 0 if results["harmonic_agree"] else 1
    return Report("cohomology", model.name, results, exit_code=exit_code)


# ---------------------------------------------------------------------------
# kuranishi


def cmd_kuranishi(config, direction="all"):
    """Per-order linear-solve residuals and potential norms for the chosen
    deformation directions, with an unobstructed/obstructed verdict."""
    model = _load(config)
    u = canonical_trivialization(model, config.tolerance)
    dirs = deformation_directions(model, config.rank_tolerance)
    if direction in (None, "all", "ALL"):
        selected = list(enumerate(dirs, start=1))
    else:
        idx = int(direction)
        if not 1 <= idx <= len(dirs):
            raise ValueError("direction must be 'all' or in 1..%d"
                             % len(dirs))
        selected = [(idx, dirs[idx - 1])]
    per_direction = {}
    worst = 0.0
    obstructed = []
    for idx, eta in selected:
        label = "direction_%02d" % idx
        try:
            series = kuranishi_series(model, u, eta, order=config.order,
                                      tol=config.tolerance,
                                      rank_tol=config.rank_tolerance)
        except ObstructionNotExact as exc:
            per_direction[label] = {
                "verdict": "obstructed",
                "failing_order": int(exc.order),
                "residual": float(exc.residual or 0.0),
            }
            obstructed.append(idx)
            continue
        residuals = {k: float(series.solve_residuals[k])
                     for k in sorted(series.solve_residuals)}
        psi_norms = {k: float(l2_norm(series.psis[k], model.metric))
                     for k in sorted(series.psis)}
        worst = max(worst, max(residuals.values(), default=0.0))
        per_direction[label] = {
            "verdict": "unobstructed to order %d" % config.order,
            "residuals": residuals,
            "psi_norms": psi_norms,
        }
    results = {
        "order": config.order,
        "directions_total": len(dirs),
        "directions_run": len(selected),
        "obstructed": obstructed,
        "per_direction": per_direction,
    }
    return Report("kuranishi", model.name, results,
                  defects={"max_solve_residual": worst},
                  exit_code=1 if obstructed else 0)


# ---------------------------------------------------------------------------
# deformation-space metrics


def cmd_wp(config):
    """Gram matrices of the two L2 metrics and the intersection-form metric
    on the copolarised directions, with the PSD verdict for their gap."""
    model = _load(config)
    warnings = []
    dd = ddbar_lemma_check(model, rank_tol=config.rank_tolerance)
    if not dd["holds"]:
        warnings.append(
            "NotDdbar: the ddbar comparison fails at bidegree %s; class "
            "representatives are metric-dependent and the report is partial"
            % (tuple(dd["witness_bidegree"]),))
    rep = wp_metrics(model, tol=config.tolerance,
                     rank_tol=config.rank_tolerance)
    warnings.extend(rep.warnings)
    gap = rep.gram_g2 - rep.gram_gamma
    gap = 0.5 * (gap + gap.conj().T)
    if gap.size:
        min_eig = float(np.linalg.eigvalsh(gap).min())
        scale = max(float(np.abs(rep.gram_g2).max()), 1.0)
    else:
        min_eig, scale = 0.0, 1.0
    psd = min_eig >= -config.tolerance * scale
    results = {
        "dim": rep.dim,
        "excluded": list(rep.excluded),
        "gram_g1": rep.gram_g1,
        "gram_g2": rep.gram_g2,
        "gram_gamma": rep.gram_gamma,
        "zeta_sq": [float(z) for z in rep.zeta_sq],
        "den": float(np.real(rep.den)),
        "volume": float(np.real(rep.vol)),
        "gap_psd": bool(psd),
        "gap_min_eigenvalue": min_eig,
    }
    defects = {"identity_defect": float(rep.identity_defect)}
    return Report("wp", model.name, results, warnings=warnings,
                  defects=defects, exit_code=0 if psd else 1)


# ---------------------------------------------------------------------------
# identity suites


def _suite_rng(seed, tag):
    ss = np.random.SeedSequence((int(seed), sum(map(ord, tag))))
    return np.random.default_rng(ss)


def _random_metric(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return HermitianMetric(n, a @ a.conj().T + n * np.eye(n))


def _random_form(rng, n, p, q):
    bl = basis(n, p, q)
    vec = rng.standard_normal(len(bl)) + 1j * rng.standard_normal(len(bl))
    return vec_form(n, vec, bl)


def _random_vf(rng, n, q):
    keys = vf_basis(n, q)
    vals = rng.standard_normal(len(keys)) + 1j * rng.standard_normal(len(keys))
    return VectorForm(n, dict(zip(keys, vals)))


def _family_star(rng, n, trials, tol, star_fn):
    bidegs = [(p, q) for p in range(n + 1) for q in range(n + 1)]
    failures, worst = 0, 0.0
    for t in range(trials):
        metric = _random_metric(rng, n)
        p, q = bidegs[t % len(bidegs)]
        a = _random_form(rng, n, p, q)
        scale = max(a.max_abs(), 1.0)
        sa = star_fn(a, metric)
        sign = -1.0 if (p + q) % 2 else 1.0
        defect = (star_fn(sa, metric) - sign * a).max_abs() / scale
        norm_a = l2_norm(a, metric)
        defect = max(defect, abs(l2_norm(sa, metric) - norm_a)
                     / max(norm_a, 1.0))
        worst = max(worst, defect)
        failures += defect > tol
    return {"trials": trials, "failures": int(failures), "max_defect": worst}


def _family_lefschetz(rng, n, trials, tol):
    failures, worst = 0, 0.0
    for t in range(trials):
        metric = _random_metric(rng, n)
        om = omega_form(metric)
        p = int(rng.integers(0, n))
        q = int(rng.integers(0, n))
        a = _random_form(rng, n, p, q)
        b = _random_form(rng, n, p + 1, q + 1)
        lhs = l2_inner(lefschetz(a, metric), b, metric)
        rhs = l2_inner(a, lambda_op(b, metric), metric)
        defect = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0)
        r = int(rng.integers(1, n + 1))
        got = lambda_op(wedge_power(om, r), metric)
        want = float(r * (n - r + 1)) * wedge_power(om, r - 1)
        defect = max(defect, (got - want).max_abs()
                     / max(want.max_abs(), 1.0))
        worst = max(worst, defect)
        failures += defect > tol
    return {"trials": trials, "failures": int(failures), "max_defect": worst}


def _pq_dim(n, p, q):
    if p < 0 or q < 0 or p > n or q > n:
        return 0
    return len(basis(n, p, q))


def _mat_between(fn, n, dom, cod):
    rows, cols = _pq_dim(n, *cod), _pq_dim(n, *dom)
    if rows == 0 or cols == 0:
        return np.zeros((rows, cols), dtype=complex)
    return matrix_of(fn, n, basis(n, dom[0], dom[1]),
                     basis(n, cod[0], cod[1]))


def _pure_part(a, n, p, q):
    if _pq_dim(n, p, q) == 0:
        return Form.zero(n)
    return vec_pq(n, pq_vec(a, p, q), p, q)


def _family_commutation(model, tol):
    """Matrix identities [Lam, partial] = i(dbar* + conj-torsion*) and
    [Lam, dbar] = -i(partial* + torsion*) at every bidegree."""
    n, metric = model.n, model.metric
    d_om = model.d_omega()
    t21 = _pure_part(d_om, n, 2, 1)
    t12 = _pure_part(d_om, n, 1, 2)
    lam = lambda a: lambda_op(a, metric)
    tau = lambda a: torsion_tau(a, metric, t21)
    tau_c = lambda a: torsion_tau_conj(a, metric, t12)
    checks, failures, worst = 0, 0, 0.0
    for p in range(n + 1):
        for q in range(n + 1):
            g_here = l2_gram(metric, p, q)
            lam_here = _mat_between(lam, n, (p, q), (p - 1, q - 1))
            lhs = _mat_between(lam, n, (p + 1, q), (p, q - 1)) \
                @ _mat_between(model.partial, n, (p, q), (p + 1, q)) \
                - _mat_between(model.partial, n, (p - 1, q - 1), (p, q - 1)) \
                @ lam_here
            if _pq_dim(n, p, q - 1):
                g_below = l2_gram(metric, p, q - 1)
                rhs = 1j * (
                    adjoint_matrix(_mat_between(model.dbar, n, (p, q - 1),
                                                (p, q)), g_below, g_here)
                    + adjoint_matrix(_mat_between(tau_c, n, (p, q - 1),
                                                  (p, q)), g_below, g_here))
            else:
                rhs = np.zeros_like(lhs)
            defect = float(np.abs(lhs - rhs).max()) if lhs.size else 0.0
            lhs = _mat_between(lam, n, (p, q + 1), (p - 1, q)) \
                @ _mat_between(model.dbar, n, (p, q), (p, q + 1)) \
                - _mat_between(model.dbar, n, (p - 1, q - 1), (p - 1, q)) \
                @ lam_here
            if _pq_dim(n, p - 1, q):
                g_left = l2_gram(metric, p - 1, q)
                rhs = -1j * (
                    adjoint_matrix(_mat_between(model.partial, n, (p - 1, q),
                                                (p, q)), g_left, g_here)
                    + adjoint_matrix(_mat_between(tau, n, (p - 1, q),
                                                  (p, q)), g_left, g_here))
            else:
                rhs = np.zeros_like(lhs)
            defect = max(defect,
                         float(np.abs(lhs - rhs).max()) if lhs.size else 0.0)
            checks += 2
            worst = max(worst, defect)
            failures += defect > tol
    return {"trials": checks, "failures": int(failures), "max_defect": worst}


def _family_contraction(model, rng, trials, tol):
    """Leibniz rules: the wedge rule for the (0,1) contraction and the
    dbar rule for plain and (0,1) vector fields, with the parity sign."""
    n = model.n
    failures, worst = 0, 0.0
    for t in range(trials):
        metric = _random_metric(rng, n)
        om = omega_form(metric)
        theta = _random_vf(rng, n, 1)
        a = _random_form(rng, n, 1, 1)
        lhs = contract(theta, wedge(om, a))
        rhs = wedge(contract(theta, om), a) + wedge(om, contract(theta, a))
        scale = max(lhs.max_abs(), 1.0)
        defect = (lhs - rhs).max_abs() / scale
        q = t % 2
        eta = _random_vf(rng, n, q)
        target = omega_form(model.metric) if q else \
            wedge_power(omega_form(model.metric), n - 1)
        sign = 1.0 if q else -1.0
        lhs = model.dbar(contract(eta, target))
        rhs = contract(dbar_vector_form(model, eta), target) \
            + sign * contract(eta, model.dbar(target))
        defect = max(defect, (lhs - rhs).max_abs()
                     / max(lhs.max_abs(), 1.0))
        worst = max(worst, defect)
        failures += defect > tol
    return {"trials": trials, "failures": int(failures), "max_defect": worst}


def _family_primitive(rng, n, trials, tol):
    failures, worst = 0, 0.0
    for t in range(trials):
        metric = _random_metric(rng, n)
        pq = (n - 1, 1) if t % 2 == 0 else (1, 2)
        a = _random_form(rng, n, *pq)
        prim, residual = primitive_decompose(a, metric)
        scale = max(a.max_abs(), 1.0)
        defect = (prim + lefschetz(residual, metric) - a).max_abs() / scale
        defect = max(defect, lambda_op(prim, metric).max_abs() / scale)
        cross = l2_inner(prim, lefschetz(residual, metric), metric)
        defect = max(defect, abs(cross) / max(l2_norm(a, metric) ** 2, 1.0))
        worst = max(worst, defect)
        failures += defect > tol
    return {"trials": trials, "failures": int(failures), "max_defect": worst}


def cmd_identities(config, trials=200, star_fn=None):
    """Randomized identity suites per operator family on the model's
    dimension, plus commutation matrix identities on the model itself."""
    model = _load(config)
    n = model.n
    warnings = []
    if n > 6:
        warnings.append("dimension %d is large; suites may be slow" % n)
    star = star_fn if star_fn is not None else hodge_star
    tol = config.tolerance
    families = {
        "star": _family_star(_suite_rng(config.seed, "star"), n, trials,
                             tol, star),
        "lefschetz": _family_lefschetz(_suite_rng(config.seed, "lefschetz"),
                                       n, trials, tol),
        "commutation": _family_commutation(model, tol),
        "contraction": _family_contraction(
            model, _suite_rng(config.seed, "contraction"), trials, tol),
        "primitive-decomposition": _family_primitive(
            _suite_rng(config.seed, "primitive"), n, trials, tol),
    }
    all_pass = all(f["failures"] == 0 for f in families.values())
    results = {
        "dim": n,
        "trials": trials,
        "families": families,
        "all_pass": bool(all_pass),
    }
    defects = {name: f["max_defect"] for name, f in families.items()}
    return Report("identities", model.name, results, warnings=warnings,
                  defects=defects, exit_code=0 if all_pass else 1)


# ---------------------------------------------------------------------------
# argument parsing and dispatch


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="hdl",
        description="Validate and analyze invariant complex-manifold "
                    "models: cohomology, deformation series, "
                    "deformation-space metrics, operator identities.")
    parser.add_argument("command",
                        choices=["validate", "cohomology", "kuranishi",
                                 "wp", "identities"])
    parser.add_argument("model", help="path to a model JSON file")
    parser.add_argument("--theory", default="Dolbeault",
                        help="cohomology theory: deRham, Dolbeault or Aeppli")
    parser.add_argument("--order", type=int, default=6,
                        help="truncation order of the deformation series")
    parser.add_argument("--direction", default="all",
                        help="1-based deformation direction index, or 'all'")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for the randomized suites")
    parser.add_argument("--tolerance", type=float, default=1e-9,
                        help="defect tolerance for verdicts")
    parser.add_argument("--json", action="store_true", dest="as_json",
                        help="emit a canonical JSON report")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        config = RunConfig(args.model, tolerance=args.tolerance,
                           seed=args.seed, order=args.order,
                           output="json" if args.as_json else "table")
        if args.command == "validate":
            report = cmd_validate(config)
        elif args.command == "cohomology":
            report = cmd_cohomology(config, theory=args.theory)
        elif args.command == "kuranishi":
            report = cmd_kuranishi(config, direction=args.direction)
        elif args.command == "wp":
            report = cmd_wp(config)
        else:
            report = cmd_identities(config)
    except (HdlError, ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    print(report.render(config.output))
    return report.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
