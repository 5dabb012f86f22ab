"""Suite for the difference-moment isometry of the exponential family.

The inner-product series of the two functionals' difference-moment
kernels telescopes, for exponentials, into a scalar exponential series;
the suite pins that series against the closed product mean, the exact
enumeration of the product, and a sampled product mean.
"""

from __future__ import annotations

import numpy as np

from ..estimation import PoissonEnumeration, mc_expectation
from ..functionals import Exponential
from .base import Case, CasePayload, SuiteContext

SERIES_TERM_FLOOR = 1e-14


def isometry_series(f: Exponential, g: Exponential) -> float:
    """Mean product plus the weighted inner products of difference moments.

    For exponentials every inner product reduces to a power of one
    scalar, so the series is summed termwise until terms fall below the
    floor.
    """
    space = f.space
    w = space.weights
    t = float(np.sum(w * (np.exp(-f.v.values) - 1.0) * (np.exp(-g.v.values) - 1.0)))
    scale = f.closed_form_mean() * g.closed_form_mean()
    total = 0.0
    term = 1.0
    n = 0
    while abs(term) > SERIES_TERM_FLOOR and n < 400:
        total += term
        n += 1
        term *= t / n
    return scale * total


def _pairs(ctx: SuiteContext) -> list[tuple[str, Exponential, Exponential]]:
    pairs = []
    for space_name in ("S1", "S2", "S3"):
        space = ctx.space(space_name)
        exps = ctx.exponentials(space)
        for i, (name_f, f) in enumerate(exps):
            for name_g, g in exps[i:]:
                pairs.append((f"{name_f}__{name_g}", f, g))
    return pairs


def build_fock_isometry(ctx: SuiteContext) -> list[Case]:
    cases = []
    pairs = _pairs(ctx)
    for pair_id, f, g in pairs:
        case_id = f"series_vs_closed_{pair_id}"

        def run(f=f, g=g):
            series = isometry_series(f, g)
            closed = Exponential(f.space, f.v + g.v).closed_form_mean()
            return CasePayload(lhs=series, rhs=closed, tolerance=1e-10)

        cases.append(Case(case_id, "fock-isometry", run))

        case_id = f"series_vs_oracle_{pair_id}"

        def run(f=f, g=g):
            series = isometry_series(f, g)
            enum = PoissonEnumeration.get(f.space, ctx.budget(f.space))
            oracle = enum.expectation_of(f * g)
            return CasePayload(lhs=series, rhs=oracle, tolerance=1e-6)

        cases.append(Case(case_id, "fock-isometry", run))

    for pair_id, f, g in pairs[:3]:
        case_id = f"series_vs_mc_{pair_id}"

        def run(f=f, g=g, case_id=case_id):
            plan = ctx.plan(case_id)
            series = isometry_series(f, g)
            est = mc_expectation(f.space, f * g, plan)
            return CasePayload(lhs=est, rhs=series, replicates=plan.replicates)

        cases.append(Case(case_id, "fock-isometry", run))
    return cases
