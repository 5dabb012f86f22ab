"""Measure spaces and the kernel algebra, held against brute-force loops."""

import itertools
import math

import numpy as np
import pytest

from poisson_chaos.errors import ContractViolationError, UnsupportedArityError
from poisson_chaos.space import (Kernel, MeasureSpace, contraction,
                                 inner_product, integrate, norm, symmetrize,
                                 tensor, tensor_power)


@pytest.fixture
def s2():
    return MeasureSpace(["a", "b"], [0.5, 1.0])


@pytest.fixture
def s3():
    return MeasureSpace(["a", "b", "c"], [0.4, 0.25, 0.6])


class TestMeasureSpace:
    def test_rejects_nonpositive_weights(self):
        with pytest.raises(ContractViolationError):
            MeasureSpace(["a"], [0.0])
        with pytest.raises(ContractViolationError):
            MeasureSpace(["a", "b"], [1.0, -0.5])
        with pytest.raises(ContractViolationError):
            MeasureSpace(["a"], [float("inf")])

    def test_rejects_empty_or_duplicate_atoms(self):
        with pytest.raises(ContractViolationError):
            MeasureSpace([], [])
        with pytest.raises(ContractViolationError):
            MeasureSpace(["a", "a"], [1.0, 2.0])

    def test_total_mass(self, s2):
        assert s2.total_mass == 1.5

    def test_weights_are_immutable(self, s2):
        with pytest.raises(ValueError):
            s2.weights[0] = 2.0


class TestIntegrate:
    def test_total_mass_arity_one(self, s2):
        assert integrate(s2, Kernel.constant(s2, 1)) == pytest.approx(1.5)

    def test_product_mass_arity_two(self, s2):
        assert integrate(s2, Kernel.constant(s2, 2)) == pytest.approx(2.25)

    def test_weighted_sum(self, s2):
        assert integrate(s2, Kernel(s2, [2.0, 0.0])) == pytest.approx(1.0)

    def test_arity_zero_is_identity(self, s2):
        assert integrate(s2, Kernel.scalar(s2, 3.5)) == 3.5

    def test_dimension_mismatch_rejected(self, s2, s3):
        with pytest.raises(ContractViolationError):
            integrate(s2, Kernel.constant(s3, 1))

    def test_fubini_on_products(self, s3):
        rng = np.random.default_rng(0)
        for _ in range(10):
            f = Kernel(s3, rng.normal(size=3))
            g = Kernel(s3, rng.normal(size=3))
            lhs = integrate(s3, tensor(f, g))
            rhs = integrate(s3, f) * integrate(s3, g)
            assert lhs == pytest.approx(rhs, abs=1e-12)


class TestInnerProduct:
    def test_examples(self, s2):
        one = Kernel.constant(s2, 1)
        assert inner_product(s2, one, one) == pytest.approx(1.5)
        assert inner_product(s2, Kernel(s2, [1, 0]), Kernel(s2, [0, 1])) == 0.0
        f = Kernel(s2, [1, 2])
        assert inner_product(s2, f, f) == pytest.approx(4.5)

    def test_symmetry_and_positivity(self, s3):
        rng = np.random.default_rng(1)
        for _ in range(10):
            f = Kernel(s3, rng.normal(size=(3, 3)))
            g = Kernel(s3, rng.normal(size=(3, 3)))
            assert inner_product(s3, f, g) == pytest.approx(inner_product(s3, g, f))
            assert inner_product(s3, f, f) >= 0.0

    def test_zero_norm_only_for_zero(self, s3):
        zero = Kernel.constant(s3, 2, 0.0)
        assert inner_product(s3, zero, zero) == 0.0
        bump = Kernel(s3, np.eye(3) * 1e-8)
        assert inner_product(s3, bump, bump) > 0.0

    def test_arity_mismatch(self, s2):
        with pytest.raises(ContractViolationError):
            inner_product(s2, Kernel.constant(s2, 1), Kernel.constant(s2, 2))

    def test_norm_is_root_of_self_product(self, s2):
        f = Kernel(s2, [1.0, 2.0])
        assert norm(s2, f) == pytest.approx(math.sqrt(4.5))


class TestTensor:
    def test_outer_product(self, s2):
        out = tensor(Kernel(s2, [1, 2]), Kernel(s2, [3, 4]))
        assert out.values.tolist() == [[3, 4], [6, 8]]

    def test_tensor_power_of_ones(self, s2):
        out = tensor_power(Kernel.constant(s2, 1), 2)
        assert np.array_equal(out.values, np.ones((2, 2)))

    def test_single_support(self, s2):
        out = tensor(Kernel(s2, [0, 1]), Kernel(s2, [0, 1]))
        want = np.zeros((2, 2))
        want[1, 1] = 1.0
        assert np.array_equal(out.values, want)

    def test_empty_factor_list_rejected(self):
        with pytest.raises(ContractViolationError):
            tensor()


class TestSymmetrize:
    def test_fixed_point(self, s2):
        f = Kernel(s2, [[1.0, 2.0], [2.0, 5.0]])
        assert np.array_equal(symmetrize(f).values, f.values)

    def test_two_point_average(self, s2):
        f = Kernel(s2, [[0.0, 1.0], [0.0, 0.0]])
        out = symmetrize(f).values
        assert out[0, 1] == out[1, 0] == 0.5
        assert out[0, 0] == out[1, 1] == 0.0

    def test_arity_one_untouched(self, s2):
        f = Kernel(s2, [3.0, -1.0])
        assert symmetrize(f) is f

    def test_idempotent_exactly(self, s3):
        rng = np.random.default_rng(2)
        f = Kernel(s3, rng.normal(size=(3, 3, 3)))
        once = symmetrize(f)
        twice = symmetrize(once)
        assert np.array_equal(once.values, twice.values)

    def test_norm_never_grows(self, s3):
        rng = np.random.default_rng(3)
        for arity in (2, 3):
            f = Kernel(s3, rng.normal(size=(3,) * arity))
            assert (inner_product(s3, symmetrize(f), symmetrize(f))
                    <= inner_product(s3, f, f) + 1e-12)

    def test_arity_cap(self, s2):
        with pytest.raises(UnsupportedArityError):
            symmetrize(Kernel.constant(s2, 7))


def brute_force_contraction(space, f, g, r, l):
    """Direct nested-loop transcription of the contraction integral."""
    p, q = f.arity, g.arity
    out_arity = p + q - r - l
    out = np.zeros((space.size,) * out_arity if out_arity else ())
    for xs in itertools.product(range(space.size), repeat=out_arity):
        total = 0.0
        for ys in itertools.product(range(space.size), repeat=l):
            weight = math.prod(space.weights[y] for y in ys)
            f_args = ys + xs[: p - l]
            g_args = ys + xs[: r - l] + xs[p - l:]
            total += f.values[f_args] * g.values[g_args] * weight
        if out_arity:
            out[xs] = total
        else:
            out = np.asarray(total)
    return out


class TestContraction:
    def test_full_integration_scalar(self, s2):
        f, g = Kernel(s2, [1, 2]), Kernel(s2, [3, 4])
        out = contraction(f, g, 1, 1)
        assert float(out.values) == pytest.approx(9.5)

    def test_identification_without_integration(self, s2):
        f, g = Kernel(s2, [1, 2]), Kernel(s2, [3, 4])
        assert contraction(f, g, 1, 0).values.tolist() == [3, 8]

    def test_trivial_case_is_tensor(self, s2):
        f, g = Kernel(s2, [1, 2]), Kernel(s2, [3, 4])
        assert np.array_equal(contraction(f, g, 0, 0).values,
                              tensor(f, g).values)

    def test_matches_brute_force_everywhere(self, s3):
        rng = np.random.default_rng(4)
        for p in range(1, 4):
            for q in range(1, 4):
                f = symmetrize(Kernel(s3, rng.normal(size=(3,) * p)))
                g = symmetrize(Kernel(s3, rng.normal(size=(3,) * q)))
                for r in range(min(p, q) + 1):
                    for l in range(r + 1):
                        got = contraction(f, g, r, l)
                        want = brute_force_contraction(s3, f, g, r, l)
                        assert got.arity == p + q - r - l
                        assert np.allclose(got.values, want, atol=1e-12)

    def test_out_of_range_rejected(self, s2):
        f, g = Kernel(s2, [1, 2]), Kernel(s2, [3, 4])
        with pytest.raises(ContractViolationError):
            contraction(f, g, 2, 0)
        with pytest.raises(ContractViolationError):
            contraction(f, g, 1, 2)


class TestKernelValidation:
    def test_shape_must_be_a_power_of_the_side(self, s2):
        with pytest.raises(ContractViolationError):
            Kernel(s2, np.ones((2, 3)))

    def test_entries_must_be_finite(self, s2):
        with pytest.raises(ContractViolationError):
            Kernel(s2, [1.0, float("nan")])
