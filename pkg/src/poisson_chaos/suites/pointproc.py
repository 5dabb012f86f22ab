"""Suites for the point-process primitives: Laplace functional, the
add-one-point integral identities, and factorial moment measures."""

from __future__ import annotations

import numpy as np

from ..estimation import mc_expectation
from ..functionals import CountPolynomial, Exponential, Functional, Opaque
from ..patterns import factorial_counts
from ..space import Kernel, integrate, tensor_power
from .base import Case, CasePayload, SuiteContext


def _pool_kernel(ctx: SuiteContext, space) -> Kernel:
    """First configured arity-1 kernel on the space, name-sorted."""
    for name in sorted(ctx.config.kernels):
        k = ctx.config.kernels[name]
        if k.arity == 1 and k.space.same_as(space):
            return k
    return Kernel(space, 0.5 + np.arange(space.size, dtype=np.float64) / space.size)


def build_laplace(ctx: SuiteContext) -> list[Case]:
    cases = []
    for name, f in ctx.exponentials():
        case_id = f"exp_transform_{name}"

        def run(f=f, case_id=case_id):
            plan = ctx.plan(case_id)
            est = mc_expectation(f.space, f, plan)
            return CasePayload(lhs=est, rhs=f.closed_form_mean(),
                               replicates=plan.replicates)

        cases.append(Case(case_id, "laplace-functional", run))
    return cases


def _field_lhs(space, fields) -> Functional:
    """Counting-measure integral of a per-atom field, as a functional."""

    def counts_fn(counts: np.ndarray) -> np.ndarray:
        out = np.zeros(counts.shape[0])
        for x, h in enumerate(fields):
            out += counts[:, x] * h.evaluate_counts(counts)
        return out

    return Opaque(space, counts_fn=counts_fn)


def _field_rhs(space, fields) -> Functional:
    """Measure integral of the field with one point added at the argument."""

    def counts_fn(counts: np.ndarray) -> np.ndarray:
        out = np.zeros(counts.shape[0])
        for x, h in enumerate(fields):
            shift = np.zeros(space.size, dtype=np.int64)
            shift[x] = 1
            out += space.weights[x] * h.evaluate_counts(counts + shift)
        return out

    return Opaque(space, counts_fn=counts_fn)


def _pair_field_lhs(space, fields) -> Functional:
    """Second factorial-measure integral of a per-atom-pair field."""

    def counts_fn(counts: np.ndarray) -> np.ndarray:
        c = counts.astype(np.float64)
        out = np.zeros(counts.shape[0])
        for x in range(space.size):
            for y in range(space.size):
                pairs = c[:, x] * (c[:, y] - (1.0 if x == y else 0.0))
                out += pairs * fields[x][y].evaluate_counts(counts)
        return out

    return Opaque(space, counts_fn=counts_fn)


def _pair_field_rhs(space, fields) -> Functional:
    def counts_fn(counts: np.ndarray) -> np.ndarray:
        out = np.zeros(counts.shape[0])
        for x in range(space.size):
            for y in range(space.size):
                shift = np.zeros(space.size, dtype=np.int64)
                shift[x] += 1
                shift[y] += 1
                out += (space.weights[x] * space.weights[y]
                        * fields[x][y].evaluate_counts(counts + shift))
        return out

    return Opaque(space, counts_fn=counts_fn)


def _mecke_fields(ctx: SuiteContext, space) -> list[tuple[str, list[Functional]]]:
    """Battery of integrands h(pattern, atom), one functional per atom."""
    total = CountPolynomial.total_count(space)
    exps = ctx.exponentials(space)
    batteries = []
    if exps:
        _, f = exps[0]
        g = 1.0 + np.arange(space.size, dtype=np.float64)
        batteries.append(("exp_weighted",
                          [f * float(g[x]) for x in range(space.size)]))
    g2 = 2.0 - 0.5 * np.arange(space.size, dtype=np.float64)
    batteries.append(("count_weighted",
                      [total * float(g2[x]) for x in range(space.size)]))
    batteries.append(("total_count", [total for _ in range(space.size)]))
    return batteries


def build_mecke(ctx: SuiteContext) -> list[Case]:
    cases = []
    for space_name in ("S1", "S2"):
        space = ctx.space(space_name)
        for battery_name, fields in _mecke_fields(ctx, space):
            case_id = f"add_point_{space_name}_{battery_name}"

            def run(space=space, fields=fields, case_id=case_id):
                plan = ctx.plan(case_id)
                lhs = mc_expectation(space, _field_lhs(space, fields), plan)
                rhs = mc_expectation(space, _field_rhs(space, fields), plan)
                return CasePayload(lhs=lhs, rhs=rhs, replicates=plan.replicates)

            cases.append(Case(case_id, "mecke-equation", run))

        # analytic anchor: h = total count makes both sides mass*(mass+1)
        mass = space.total_mass
        anchor = mass * (mass + 1.0)
        for side, maker in (("lhs", _field_lhs), ("rhs", _field_rhs)):
            case_id = f"analytic_{space_name}_{side}"

            def run(space=space, maker=maker, anchor=anchor, case_id=case_id):
                plan = ctx.plan(case_id)
                total = CountPolynomial.total_count(space)
                fields = [total for _ in range(space.size)]
                est = mc_expectation(space, maker(space, fields), plan)
                return CasePayload(lhs=est, rhs=anchor, replicates=plan.replicates)

            cases.append(Case(case_id, "mecke-equation", run))

        # order-2 version on a product field
        case_id = f"pair_{space_name}_exp"

        def run(space=space, ctx=ctx, case_id=case_id):
            plan = ctx.plan(case_id)
            exps = ctx.exponentials(space)
            f = exps[0][1] if exps else Exponential.one(space)
            g = 1.0 + 0.5 * np.arange(space.size, dtype=np.float64)
            fields = [[f * float(g[x] * g[y]) for y in range(space.size)]
                      for x in range(space.size)]
            lhs = mc_expectation(space, _pair_field_lhs(space, fields), plan)
            rhs = mc_expectation(space, _pair_field_rhs(space, fields), plan)
            return CasePayload(lhs=lhs, rhs=rhs, replicates=plan.replicates)

        cases.append(Case(case_id, "multivariate-mecke", run))

        case_id = f"pair_{space_name}_analytic"

        def run(space=space, case_id=case_id):
            plan = ctx.plan(case_id)
            one = CountPolynomial(space, [(1.0, (0,) * space.size)])
            fields = [[one for _ in range(space.size)] for _ in range(space.size)]
            lhs = mc_expectation(space, _pair_field_lhs(space, fields), plan)
            return CasePayload(lhs=lhs, rhs=space.total_mass**2,
                               replicates=plan.replicates)

        cases.append(Case(case_id, "multivariate-mecke", run))
    return cases


def build_factorial_moments(ctx: SuiteContext) -> list[Case]:
    cases = []
    for space_name in ("S2", "S3"):
        space = ctx.space(space_name)
        base = _pool_kernel(ctx, space)
        for m in (1, 2, 3):
            f = tensor_power(base, m)
            case_id = f"moment_{space_name}_m{m}"

            def run(space=space, f=f, case_id=case_id):
                plan = ctx.plan(case_id)
                G = Opaque(space, counts_fn=lambda c, f=f: factorial_counts(c, f))
                est = mc_expectation(space, G, plan)
                return CasePayload(lhs=est, rhs=integrate(space, f),
                                   replicates=plan.replicates)

            cases.append(Case(case_id, "factorial-moments", run))
    return cases
