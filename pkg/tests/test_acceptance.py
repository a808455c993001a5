"""The acceptance matrix: one test per criterion, one printed line each.

Criteria 3, 4, 9 and 11 share one bundle of 100 randomized certification
cases (fixed seed, so the matrix is reproducible); the bundle records the
wall time of the certification loop itself for the runtime budget.
"""

import time

import numpy as np
import pytest

from feistab.cli import main as cli_main
from feistab.domain import cube_grid, dk_grid, simplex_grid
from feistab.errors import NoWitness
from feistab.feim import (
    Exact,
    certify,
    construct_ab,
    sup_F,
    sup_residual,
    uniform_bound,
)
from feistab.harness import NoiseSpec, minimax_fit, perturb, random_certify_cases
from feistab.measures import (
    ExactJ,
    JFamily,
    PerturbedLevels,
    Recursive,
    certify_system,
    semisymmetry_defect,
)
from feistab.multiplicative import (
    ONE,
    Family,
    MultiplicativeSpec,
    additivity_defect,
    classify,
    dk_additivity_defect,
    find_witness,
    power,
    powers,
)

SEED = 20260810
AB_VALUES = (-2, -1, 0, 1, 2)
ALPHAS = (0.5, 1.0, 2.0, 3.0)


def report(num, name, ok):
    print(f"ACCEPTANCE {num:02d} {name}: {'PASS' if ok else 'FAIL'}")
    assert ok, f"criterion {num} ({name}) failed"


@pytest.fixture(scope="module")
def grids():
    return {
        "dk": {k: dk_grid(k, 16) for k in (1, 2)},
        "cube": {k: cube_grid(k, 16) for k in (1, 2)},
    }


@pytest.fixture(scope="module")
def certify_bundle(grids):
    """Materialized randomized cases with certificates and certify timing."""
    cases = random_certify_cases(100, SEED)
    prepared = []
    for case in cases:
        M = MultiplicativeSpec.from_json(case["M"])
        noise = NoiseSpec(
            amplitude=case["noise"]["amplitude"],
            seed=case["noise"]["seed"],
            kind=case["noise"]["kind"],
        )
        f = perturb(Exact(case["exact"][0], case["exact"][1], M), noise)
        prepared.append((case, M, f))
    start = time.perf_counter()
    entries = []
    for case, M, f in prepared:
        cert = certify(f, M, grids["dk"][M.k], grids["cube"][M.k])
        entries.append({"case": case, "M": M, "f": f, "cert": cert})
    elapsed = time.perf_counter() - start
    return {"entries": entries, "certify_seconds": elapsed}


def test_criterion_01_exact_solution_residual(grids):
    start = time.perf_counter()
    worst = 0.0
    for k in (1, 2):
        dgrid = grids["dk"][k]
        for alpha in ALPHAS:
            M = powers(*([alpha] * k))
            for a in AB_VALUES:
                for b in AB_VALUES:
                    worst = max(worst, sup_residual(Exact(a, b, M), M, dgrid).sup)
    elapsed = time.perf_counter() - start
    report(1, "exact-solution residual <= 1e-10 in < 2 s", worst <= 1e-10 and elapsed < 2.0)


def test_criterion_02_construct_ab_round_trip(grids):
    worst = 0.0
    for k in (1, 2):
        pts = grids["cube"][k].points
        for alpha in ALPHAS:
            M = powers(*([alpha] * k))
            if classify(M).family is not Family.NON_ADDITIVE:
                continue  # k=1, alpha=1: no witness, the fit is undefined
            qstar = find_witness(M, 16)
            for a in AB_VALUES:
                for b in AB_VALUES:
                    f = Exact(a, b, M)
                    a2, b2 = construct_ab(f, M, qstar)
                    diff = np.abs(f.many(pts) - Exact(a2, b2, M).many(pts)).max()
                    worst = max(worst, float(diff))
    report(2, "round-trip of the constructive fit <= 1e-10", worst <= 1e-10)


def test_criterion_03_randomized_certification(certify_bundle):
    failures = [
        e["case"]["id"]
        for e in certify_bundle["entries"]
        if not (e["cert"].passed and e["cert"].max_violation <= 1e-9)
    ]
    elapsed = certify_bundle["certify_seconds"]
    ok = not failures and elapsed < 20.0
    if failures:
        print("failing cases:", failures)
    report(3, "100 randomized certificates pass in < 20 s", ok)


def test_criterion_04_superstability(certify_bundle):
    ok = True
    for e in certify_bundle["entries"]:
        cert = e["cert"]
        top = uniform_bound(e["M"], cert.qstar, cert.eps_measured)
        ok = ok and cert.sup_deviation <= top + 1e-9
    report(4, "uniform superstability bound", ok)


def test_criterion_05_additivity_equivalence():
    specs = [
        powers(0.5), powers(1.0), powers(2.0), powers(3.0),
        MultiplicativeSpec((ONE,)),
        MultiplicativeSpec((power(1.0), ONE)),
        MultiplicativeSpec((ONE, power(1.0))),
        powers(0.5, 0.5), powers(0.5, 1.0), powers(0.5, 2.0), powers(0.5, 3.0),
        powers(1.0, 1.0), powers(1.0, 2.0), powers(2.0, 2.0), powers(2.0, 3.0),
        powers(3.0, 3.0), powers(3.0, 1.0),
        MultiplicativeSpec((power(2.0), ONE)),
        MultiplicativeSpec((ONE, ONE)),
        MultiplicativeSpec((ONE, power(3.0))),
    ]
    assert len(specs) == 20
    ok = True
    for spec in specs:
        pair_defect = dk_additivity_defect(spec, dk_grid(spec.k, 20))
        pts = cube_grid(spec.k, 20).points
        point_defect = float(np.abs(spec.many(pts) + spec.many(1.0 - pts) - 1.0).max())
        agree = (pair_defect <= 1e-10 and point_defect <= 1e-10) or (
            pair_defect >= 1e-6 and point_defect >= 1e-6
        )
        ok = ok and agree
    report(5, "pointwise and pair-domain defects vanish together", ok)


def test_criterion_06_witness_quality():
    q = find_witness(powers(2.0), 100)
    defect = additivity_defect(powers(2.0), q)
    report(6, "witness defect >= 0.49 at m=100", abs(defect) >= 0.49)


def test_criterion_07_closed_form_identities():
    worst_gap = 0.0
    worst_sym = 0.0
    for alpha in (0.5, 2.0, 3.0):
        M = powers(alpha)
        sym_grid = simplex_grid(3, 1, 8)
        level_grids = {n: list(simplex_grid(n, 1, 8)) for n in (2, 3, 4, 5)}
        for c in (-1, 0, 1, 2):
            for d in (-1, 0, 1, 2):
                J = JFamily(float(c), float(d), M)
                exact = ExactJ(J)
                rec = Recursive(J.base_fcn(), M)
                for n in (2, 3, 4, 5):
                    for t in level_grids[n]:
                        gap = abs(rec.eval(t) - exact.eval(t))
                        worst_gap = max(worst_gap, gap)
                worst_sym = max(worst_sym, semisymmetry_defect(exact, sym_grid))
    ok = worst_gap <= 1e-10 and worst_sym <= 1e-12
    report(7, "recursion matches the closed form; semisymmetry exact", ok)


def test_criterion_08_system_certificate():
    M = powers(2.0)
    noise = {n: NoiseSpec(1e-3, seed=SEED + n, kind="uniform") for n in (2, 3, 4, 5)}
    family = PerturbedLevels(ExactJ(JFamily(1.0, 0.5, M)), noise)
    start = time.perf_counter()
    cert = certify_system(family, M, 5, 8)
    elapsed = time.perf_counter() - start
    report(8, "perturbed system certificate passes in < 30 s", cert.passed and elapsed < 30.0)


def test_criterion_09_minimax_oracle_dominance(certify_bundle, grids):
    ok = True
    for e in certify_bundle["entries"]:
        cert = e["cert"]
        cube = grids["cube"][e["M"].k]
        _, _, dev = minimax_fit(e["f"], e["M"], cube, qstar=cert.qstar)
        ok = ok and dev <= cert.sup_deviation + 1e-9
    report(9, "minimax deviation never exceeds the constructive fit", ok)


def test_criterion_10_projection_failure_paths(tmp_path):
    projections = [powers(1.0), MultiplicativeSpec((power(1.0), ONE))]
    ok = True
    for M in projections:
        k = M.k
        try:
            certify(Exact(1.0, 0.0, M), M, dk_grid(k, 8), cube_grid(k, 8))
            ok = False
        except NoWitness:
            pass
        try:
            certify_system(ExactJ(JFamily(1.0, 0.0, M)), M, 3, 6)
            ok = False
        except NoWitness:
            pass
    ok = ok and cli_main(["certify", "--alpha", "1", "--k", "1", "--grid", "8"]) == 2
    ok = ok and cli_main(["certify-system", "--alpha", "1", "--k", "1", "--grid", "6"]) == 2
    cfg = tmp_path / "proj.json"
    cfg.write_text('{"M": [{"kind": "power", "alpha": 1.0}, {"kind": "one"}]}')
    ok = ok and cli_main(["certify", "--config", str(cfg), "--grid", "8"]) == 2
    report(10, "projections fail with NoWitness and exit code 2", ok)


def test_criterion_11_F_bound(certify_bundle, grids):
    ok = True
    for e in certify_bundle["entries"]:
        cert = e["cert"]
        f_sup = sup_F(e["f"], e["M"], grids["dk"][e["M"].k])
        ok = ok and f_sup <= cert.eps_measured + 1e-9
    report(11, "reparametrized residual F stays within eps", ok)
