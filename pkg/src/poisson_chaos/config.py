"""Configuration loading and validation for the verification runner.

A configuration is a UTF-8 JSON document with the top-level keys
``space``, ``functionals``, ``kernels``, ``mc``, ``oracle``,
``tolerances`` and ``suites``.  Every referenced space must exist and
every kernel or functional literal must fit its space, checked at load
time.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError, ContractViolationError
from .estimation import TolerancePolicy
from .functionals import CountPolynomial, Exponential, Functional, LinearCombo
from .space import Kernel, MeasureSpace
from .suites import RunConfig, suite_names

DEFAULT_CONFIG_RESOURCE = "default.json"


def _build_spaces(raw: dict) -> dict[str, MeasureSpace]:
    if not isinstance(raw, dict) or not raw:
        raise ConfigError("'space' must map space names to atom-weight objects")
    spaces = {}
    for name, atoms in raw.items():
        if not isinstance(atoms, dict) or not atoms:
            raise ConfigError(f"space {name!r} must map atom ids to weights")
        try:
            spaces[name] = MeasureSpace(tuple(atoms.keys()),
                                        np.array(list(atoms.values()), dtype=float))
        except ContractViolationError as exc:
            raise ConfigError(f"space {name!r}: {exc}") from None
    return spaces


def _space_of(spaces: dict, entry: dict, what: str) -> MeasureSpace:
    name = entry.get("space")
    if name not in spaces:
        raise ConfigError(f"{what} references unknown space {name!r}")
    return spaces[name]


def _build_kernels(raw: dict, spaces: dict) -> dict[str, Kernel]:
    kernels = {}
    for name, entry in (raw or {}).items():
        space = _space_of(spaces, entry, f"kernel {name!r}")
        try:
            kernels[name] = Kernel(space, entry["values"])
        except (KeyError, ContractViolationError) as exc:
            raise ConfigError(f"kernel {name!r}: {exc}") from None
    return kernels


def _build_functionals(raw: dict, spaces: dict) -> dict[str, Functional]:
    functionals: dict[str, Functional] = {}
    for name, entry in (raw or {}).items():
        space = _space_of(spaces, entry, f"functional {name!r}")
        kind = entry.get("kind")
        try:
            if kind == "exponential":
                functionals[name] = Exponential(space, Kernel(space, entry["v"]))
            elif kind == "linear_combo":
                terms = [(float(coef), Exponential(space, Kernel(space, v)))
                         for coef, v in entry["terms"]]
                functionals[name] = LinearCombo(space, terms)
            elif kind == "count_polynomial":
                terms = [(float(coef), tuple(exps)) for coef, exps in entry["terms"]]
                functionals[name] = CountPolynomial(space, terms)
            else:
                raise ConfigError(f"functional {name!r} has unknown kind {kind!r}")
        except (KeyError, ContractViolationError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"functional {name!r}: {exc}") from None
    return functionals


def parse_config(document: dict) -> RunConfig:
    spaces = _build_spaces(document.get("space", {}))
    kernels = _build_kernels(document.get("kernels", {}), spaces)
    functionals = _build_functionals(document.get("functionals", {}), spaces)
    mc = document.get("mc", {})
    oracle = document.get("oracle", {})
    tol = document.get("tolerances", {})
    suites = document.get("suites", suite_names())
    known = set(suite_names())
    for s in suites:
        if s not in known:
            raise ConfigError(f"unknown suite {s!r} in configuration")
    replicates = int(mc.get("replicates", 200_000))
    if replicates < 1:
        raise ConfigError("mc.replicates must be >= 1")
    return RunConfig(
        spaces=spaces,
        functionals=functionals,
        kernels=kernels,
        replicates=replicates,
        seed=int(mc.get("seed", 20260808)),
        oracle_tol=float(oracle.get("tail_tol", 1e-10)),
        max_states=int(oracle.get("max_states", 2_000_000)),
        policy=TolerancePolicy(z=float(tol.get("z", 4.0)),
                               abs_tol=float(tol.get("abs_tol", 1e-6)),
                               exact_tol=float(tol.get("exact_tol", 1e-9))),
        suites=list(suites),
    )


def load_config(path: str | Path | None = None) -> RunConfig:
    """Load a configuration file.

    ``None`` or the literal name ``default`` selects the packaged
    default document.
    """
    if path is None or str(path) == "default":
        text = (resources.files("poisson_chaos") / "data" / DEFAULT_CONFIG_RESOURCE) \
            .read_text(encoding="utf-8")
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read configuration: {exc}") from None
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration is not valid JSON: {exc}") from None
    if not isinstance(document, dict):
        raise ConfigError("configuration root must be an object")
    return parse_config(document)
