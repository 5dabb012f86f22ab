"""Registry of the verification suites."""

from __future__ import annotations

from ..errors import ConfigError
from .base import (Case, CasePayload, CaseResult, RunConfig, SuiteContext,
                   SuiteSpec, derive_case_seed, run_cases)
from .correlation import build_covariance, build_fkg, build_poincare
from .fock import build_fock_isometry
from .malliavin_ops import (build_duality, build_malliavin_derivative,
                            build_ou_operators, build_skorohod_isometry)
from .pointproc import build_factorial_moments, build_laplace, build_mecke
from .semigroup import build_mehler
from .wiener import (build_chaos_reconstruction, build_product_formula,
                     build_wi_isometry)

SUITES: dict[str, SuiteSpec] = {}


def _register(name: str, identities: tuple[str, ...], build, description: str) -> None:
    SUITES[name] = SuiteSpec(name, identities, build, description)


_register("laplace", ("laplace-functional",), build_laplace,
          "exponential transform of the process against its closed form")
_register("mecke", ("mecke-equation", "multivariate-mecke"), build_mecke,
          "add-one-point integral identities, single and paired")
_register("factorial_moments", ("factorial-moments",), build_factorial_moments,
          "factorial measures integrate to powers of the intensity")
_register("fock_isometry", ("fock-isometry",), build_fock_isometry,
          "difference-moment series reproduces product means")
_register("wi_isometry", ("wiener-ito-isometry", "wiener-ito-mean-zero"),
          build_wi_isometry,
          "orthogonality and scaling of the stochastic integrals")
_register("chaos_reconstruction",
          ("chaos-expansion", "pathwise-chaos-sum", "chaos-uniqueness"),
          build_chaos_reconstruction,
          "finite chaos sums: exact pathwise identity, convergence, uniqueness")
_register("product_formula", ("product-formula-single", "product-formula-general"),
          build_product_formula,
          "products of stochastic integrals as contraction sums")
_register("malliavin_derivative", ("malliavin-derivative",),
          build_malliavin_derivative,
          "chaos-level difference operator against the pathwise one")
_register("duality", ("duality",), build_duality,
          "partial-integration pairing of the difference and add/drop operators")
_register("skorohod_isometry", ("skorohod-isometry", "skorohod-pathwise"),
          build_skorohod_isometry,
          "second moment of the add/drop integral")
_register("ou_operators", ("ou-generator", "ou-inverse"), build_ou_operators,
          "birth-death generator, its chaos form and pseudo-inverse")
_register("mehler", ("mehler-formula", "semigroup-commutation", "semigroup-mean",
                     "semigroup-contractivity", "ou-inverse"), build_mehler,
          "thinning semigroup closed forms and the inverse-generator integral")
_register("covariance",
          ("covariance-identity-semigroup", "covariance-identity-conditional",
           "thinning-bifurcation"), build_covariance,
          "covariance representations through thinning")
_register("poincare", ("poincare-inequality", "poincare-l1-extension"),
          build_poincare, "variance bounded by the difference energy")
_register("fkg", ("fkg-inequality",), build_fkg,
          "nonnegative correlation of monotone functionals")


def suite_names() -> list[str]:
    return list(SUITES)


def covered_identities() -> set[str]:
    out: set[str] = set()
    for entry in SUITES.values():
        out.update(entry.identities)
    return out


def run_suite(name: str, config: RunConfig) -> list[CaseResult]:
    """Run one named suite; unknown names raise a configuration error."""
    try:
        entry = SUITES[name]
    except KeyError:
        raise ConfigError(f"unknown suite {name!r}; known: {', '.join(SUITES)}") from None
    return run_cases(entry, config)


__all__ = [
    "Case", "CasePayload", "CaseResult", "RunConfig", "SuiteContext",
    "SuiteSpec", "SUITES", "covered_identities", "derive_case_seed",
    "run_suite", "suite_names",
]
