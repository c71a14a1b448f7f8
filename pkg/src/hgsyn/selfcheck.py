"""The invariant suite behind `hg selfcheck`.

Each check returns a dict with `passed` plus the residual valuations or
deficits it looked at; nothing time-dependent goes into the report.
"""

import random

from .errors import HgsynError, NonOrdinary
from .frobenius_structure import (
    GUARD,
    conjugation_residual,
    determinant_residual,
    eigen_component,
    first_failure_exponent,
    horizontality_check,
    horizontality_residual,
    kappa_constants,
    tau_series_via_K,
    working_ring,
)
from .hg_functions import build_hg, build_polylog
from .series import SigmaLift, TruncSeries

UPTO = 58
FROB_UPTO = 40


def _upto(cfg, want):
    return min(want, cfg.L - 2)


def check_hg_ode(cfg, comps):
    deficits = {}
    for n in range(1, cfg.N):
        hg = build_hg(cfg.ctx, n, L=cfg.L, ring=working_ring(cfg.ctx))
        deficits[n] = hg.ode_residual().deficit(cfg.M - 4, _upto(cfg, UPTO))
    return {"passed": all(d == 0 for d in deficits.values()), "deficits": deficits}


def check_polylog_chain(cfg, comps):
    deficits = {}
    fns = {r: build_polylog(cfg.p, r, cfg.M) for r in range(0, 5)}
    for k in range(0, 4):
        hi = fns[k + 1].x_expansion
        lo = fns[k].x_expansion
        ring = hi.ring
        lhs = TruncSeries.polynomial(ring, [0, -1, 1]) * hi.derivative()
        deficits[k] = (lhs - lo).deficit(cfg.M, UPTO)
    return {"passed": all(d == 0 for d in deficits.values()), "deficits": deficits}


def check_tau(cfg, comps):
    deficits = {}
    for n in range(1, cfg.N):
        comp = comps[(n, 0)]
        F = comp.F.series
        diff = comp.tau_tilde - tau_series_via_K(n, cfg.N, F)
        conj = max(e.deficit(cfg.M - 4, _upto(cfg, UPTO)) for row in conjugation_residual(n, cfg.N, F)
                   for e in row)
        deficits[n] = max(diff.deficit(cfg.M - 4, _upto(cfg, UPTO)), conj)
    return {"passed": all(d == 0 for d in deficits.values()), "deficits": deficits}


def check_kappa(cfg, comps, mutate=0):
    out = {}
    ring = working_ring(cfg.ctx)
    for n in range(1, cfg.N):
        k = kappa_constants(cfg.ctx, n, ring=ring, check=False, mutate=mutate)
        diff = k.first_form - k.second_form
        out[n] = min(diff.valuation(), diff.prec)
    return {"passed": all(v >= cfg.M - GUARD for v in out.values()), "residual_valuations": out}


def check_determinant(cfg, comps):
    deficits = {}
    for (n, shift), comp in sorted(comps.items()):
        deficits[f"{n},{shift}"] = determinant_residual(comp).deficit(cfg.M - 6, _upto(cfg, FROB_UPTO))
    return {"passed": all(d == 0 for d in deficits.values()), "deficits": deficits}


def check_horizontality(cfg, comps):
    deficits = {}
    mutation = {}
    for (n, shift), comp in sorted(comps.items()):
        key = f"{n},{shift}"
        deficits[key] = horizontality_check(comp, cfg.M - 6, _upto(cfg, FROB_UPTO))
        R = horizontality_residual(comp, flip_f12=True)
        mutation[key] = first_failure_exponent(R, cfg.M - 6)
    ok = all(d == 0 for d in deficits.values())
    caught = all(e is not None and e <= 3 for e in mutation.values())
    return {"passed": ok and caught, "deficits": deficits, "mutation_first_failure": mutation}


def check_unit_roots(cfg, comps):
    from .padic_core import unramified_ring
    from .point_count_oracle import CurveInstance, verify_unit_root

    ring = unramified_ring(cfg.p, 1, cfg.M)
    results = {}
    ok = True
    for lam in range(2, cfg.p):
        curve = CurveInstance(cfg.p, cfg.N, 1, lam, M=cfg.M)
        for n in range(1, cfg.N):
            key = f"{lam},{n}"
            try:
                rep = verify_unit_root(curve, n, ring.teichmuller(lam))
                results[key] = rep["agreement_digits"]
                ok = ok and rep["match"]
            except NonOrdinary:
                results[key] = "non-ordinary"
            except HgsynError as exc:
                results[key] = f"{type(exc).__name__}"
                ok = False
    return {"passed": ok, "agreement_digits": results}


def check_regulator(cfg, comps):
    from .regulator_series import build_regulator_series, initial_E2, ode_residuals, rederive_from_connection

    out = {}
    ok = True
    for (n, shift), comp in sorted(comps.items()):
        b = build_regulator_series(cfg.ctx, n, L=cfg.L, comp=comp)
        r1, r2 = ode_residuals(b)
        upto = _upto(cfg, UPTO)
        d = max(r1.deficit(cfg.M - 4, upto), r2.deficit(cfg.M - 4, upto))
        E1_0 = b.E1[0].is_zero()
        E1r, E2r = rederive_from_connection(comp, b.initial_E2)
        rd = max((E1r - b.E1).deficit(cfg.M - 4, upto), (E2r - b.E2).deficit(cfg.M - 4, upto))
        entry = {"ode_deficit": d, "E1_0_zero": E1_0, "rederive_deficit": rd}
        if shift == 0:
            lim = initial_E2(cfg.ctx, n, method="limit", s=3)
            entry["E2_0_methods_agree"] = b.initial_E2.agrees(lim, 3)
            ok = ok and entry["E2_0_methods_agree"]
        ok = ok and d == 0 and E1_0 and rd == 0
        out[f"{n},{shift}"] = entry
    return {"passed": ok, "components": out}


def check_coleman(cfg, comps, count=20):
    from .padic_core import unramified_ring
    from .regulator_series import coleman_solve, synthetic_frobenius_values

    ring = unramified_ring(cfg.p, 1, cfg.M)
    rng = random.Random(20240)
    target = cfg.M - 2
    worst_agree = cfg.M
    worst_res = cfg.M
    for _ in range(count):
        alpha = ring.teichmuller(rng.randrange(2, cfg.p))
        F = synthetic_frobenius_values(alpha, rng)
        eps = [ring.random_element(rng), ring.random_element(rng)]
        d = coleman_solve(alpha, F, eps, method="direct")
        s = coleman_solve(alpha, F, eps, method="series")
        diff = d.coleman_value - s.coleman_value
        worst_agree = min(worst_agree, min(diff.valuation(), diff.prec))
        worst_res = min(worst_res, d.residual_valuation, s.residual_valuation)
    return {"passed": worst_agree >= target and worst_res >= target,
            "min_agreement": worst_agree, "min_residual_valuation": worst_res}


def check_fiber(cfg, comps):
    from .fiber_oracle import fiber_regulator

    Mf = 6
    out = {}
    ok = True
    for alpha in range(2, min(cfg.p, 4)):
        base = fiber_regulator(cfg.p, cfg.N, alpha, cfg.zeta1, cfg.zeta2, a=1, M=Mf)
        swap = fiber_regulator(cfg.p, cfg.N, alpha, cfg.zeta1, cfg.zeta2, a=1, M=Mf, order="h2h1")
        lifted = fiber_regulator(cfg.p, cfg.N, alpha, cfg.zeta1, cfg.zeta2, a=1 + cfg.p, M=Mf)
        anti = min(min((base.coords[n][i] + swap.coords[n][i]).valuation() for i in (0, 1))
                   for n in base.coords)
        lift = min(min((base.coords[n][i] - lifted.coords[n][i]).valuation() for i in (0, 1))
                   for n in base.coords)
        out[alpha] = {"antisymmetry_valuation": anti, "lift_valuation": lift}
        ok = ok and anti >= Mf - 2 and lift >= Mf - 2
    return {"passed": ok, "alphas": out}


def run_selfcheck(cfg, mutate_kappa=0, fiber=False):
    ring = working_ring(cfg.ctx)
    comps = {}
    for n in range(1, cfg.N):
        for shift in (0, 1):
            lift = SigmaLift.standard(ring, shift)
            comps[(n, shift)] = eigen_component(cfg.ctx, n, lift=lift, L=cfg.L)
    checks = {
        "hg_ode": check_hg_ode(cfg, comps),
        "polylog_chain": check_polylog_chain(cfg, comps),
        "tau_tilde": check_tau(cfg, comps),
        "kappa": check_kappa(cfg, comps, mutate=mutate_kappa),
        "determinant": check_determinant(cfg, comps),
        "horizontality": check_horizontality(cfg, comps),
        "unit_root": check_unit_roots(cfg, comps),
        "regulator_ode": check_regulator(cfg, comps),
        "coleman": check_coleman(cfg, comps),
    }
    if fiber:
        checks["fiber"] = check_fiber(cfg, comps)
    return {"config": cfg.as_json(), "checks": checks,
            "passed": all(c["passed"] for c in checks.values())}
