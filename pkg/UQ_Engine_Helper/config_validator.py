"""
Configuration validation for UQ Engine Helper package.
Checks experiment trees against module descriptors, applies defaults and
suggests corrections for mistyped keys.
"""

import copy
import logging
import numbers
from difflib import get_close_matches
from typing import Any, Dict, List, Optional, Tuple

from .config import Config
from .config_schema import Descriptor, FieldSpec, EXPERIMENT_DESCRIPTOR
from .exceptions import (
    MissingRequiredError,
    TypeMismatchError,
    UnknownKeyError,
)
from .rng import MAX_SEED

logger = logging.getLogger(__name__)


def _join(path: str, key: str) -> str:
    return f"{path}/{key}" if path else key


def _is_real(value: Any) -> bool:
    return isinstance(value, numbers.Real) and not isinstance(value, bool)


def _is_integer(value: Any) -> bool:
    return isinstance(value, numbers.Integral) and not isinstance(value, bool)


class _Issues:
    """Collects problems found during one validation pass."""

    def __init__(self):
        self.unknown: List[str] = []
        self.suggestions: Dict[str, str] = {}
        self.missing: List[str] = []
        self.mismatches: List[Tuple[str, str, Any]] = []

    def raise_first(self) -> None:
        if self.unknown:
            raise UnknownKeyError(self.unknown, self.suggestions)
        if self.missing:
            raise MissingRequiredError(self.missing[0])
        if self.mismatches:
            raise TypeMismatchError(*self.mismatches[0])


class ConfigValidator:
    """Validates configuration trees and applies defaults."""

    def __init__(self, config: Optional[Config] = None):
        self.config = config or Config()

    @staticmethod
    def suggest_key(key: str, known: List[str]) -> Optional[str]:
        """Closest accepted key for a mistyped one, if any is close enough."""
        matches = get_close_matches(key, known, n=1, cutoff=0.6)
        return matches[0] if matches else None

    def validate(self, tree: Dict[str, Any], descriptor: Descriptor = EXPERIMENT_DESCRIPTOR) -> Dict[str, Any]:
        """
        Validate a configuration tree against a module descriptor.

        Args:
            tree: Nested mapping as parsed from an experiment file or built in code
            descriptor: Module descriptor listing the accepted keys

        Returns:
            A new tree with every field typed and defaulted

        Raises:
            UnknownKeyError, MissingRequiredError, TypeMismatchError (in that precedence)
        """
        issues = _Issues()
        validated = self._validate_tree(tree, descriptor, "", issues)
        issues.raise_first()
        return validated

    def validate_experiment(self, tree: Dict[str, Any]) -> Dict[str, Any]:
        """Schema validation plus the cross-field rules of a whole experiment."""
        validated = self.validate(tree, EXPERIMENT_DESCRIPTOR)
        self._check_experiment(validated)
        return validated

    def _validate_tree(self, tree: Any, descriptor: Descriptor, path: str, issues: _Issues) -> Optional[Dict[str, Any]]:
        if not isinstance(tree, dict):
            issues.mismatches.append((path or descriptor.name, "subtree", tree))
            return None

        variant = None
        if descriptor.variants:
            variant = tree.get(descriptor.variant_key)
        specs = descriptor.fields_for(variant if isinstance(variant, str) else None)
        known = [spec.name for spec in specs]

        for key in tree:
            if key not in known:
                key_path = _join(path, str(key))
                issues.unknown.append(key_path)
                suggestion = self.suggest_key(str(key), known)
                if suggestion:
                    issues.suggestions[key_path] = suggestion

        validated: Dict[str, Any] = {}
        for spec in specs:
            value = tree.get(spec.name)
            field_path = _join(path, spec.name)
            if value is None:
                if spec.required:
                    issues.missing.append(field_path)
                    continue
                value = copy.deepcopy(spec.default)
                if value is None or spec.kind not in ("tree", "tree_list"):
                    validated[spec.name] = value
                    continue
            validated[spec.name] = self._coerce(spec, value, field_path, issues)
        return validated

    def _coerce(self, spec: FieldSpec, value: Any, path: str, issues: _Issues) -> Any:
        kind = spec.kind
        result: Any = None

        if kind == "bool":
            if isinstance(value, bool):
                result = value
            else:
                issues.mismatches.append((path, "boolean", value))
                return None
        elif kind == "int":
            if _is_integer(value):
                result = int(value)
            else:
                issues.mismatches.append((path, "integer", value))
                return None
        elif kind == "real":
            if _is_real(value):
                result = float(value)
            else:
                issues.mismatches.append((path, "real", value))
                return None
        elif kind == "string":
            if isinstance(value, str):
                result = value
            else:
                issues.mismatches.append((path, "string", value))
                return None
        elif kind == "seed":
            if _is_integer(value) and 0 <= int(value) < MAX_SEED:
                result = int(value)
            else:
                issues.mismatches.append((path, "64-bit unsigned integer", value))
                return None
        elif kind == "real_list":
            if isinstance(value, (str, bytes, dict)) or not hasattr(value, "__iter__"):
                issues.mismatches.append((path, "list of reals", value))
                return None
            items = list(value)
            if not all(_is_real(item) for item in items):
                issues.mismatches.append((path, "list of reals", value))
                return None
            result = [float(item) for item in items]
        elif kind == "tree":
            return self._validate_tree(value, spec.descriptor, path, issues)
        elif kind == "tree_list":
            if not isinstance(value, (list, tuple)):
                issues.mismatches.append((path, "list of subtrees", value))
                return None
            return [
                self._validate_tree(item, spec.descriptor, f"{path}/[{index}]", issues)
                for index, item in enumerate(value)
            ]
        elif kind == "model":
            if callable(value):
                return value
            if isinstance(value, str) and ":" in value:
                value = {"Type": "Python", "Function": value}
            return self._validate_tree(value, spec.descriptor, path, issues)
        else:
            raise ValueError(f"Unknown field kind '{kind}' for {path}")

        if spec.choices and result not in spec.choices:
            issues.mismatches.append((path, f"one of {list(spec.choices)}", value))
            return None
        if spec.check is not None and not spec.check(result):
            issues.mismatches.append((path, spec.check_text or "valid value", value))
            return None
        return result

    def _check_experiment(self, experiment: Dict[str, Any]) -> None:
        """Cross-field rules that a single descriptor cannot express."""
        problem = experiment["Problem"]
        solver = experiment["Solver"]
        variables = experiment["Variables"]
        distributions = experiment["Distributions"]

        if not variables:
            raise MissingRequiredError("Variables/[0]")

        distribution_names = []
        for index, dist in enumerate(distributions):
            path = f"Distributions/[{index}]"
            if dist["Name"] in distribution_names:
                raise TypeMismatchError(f"{path}/Name", "unique distribution name", dist["Name"])
            distribution_names.append(dist["Name"])
            if dist["Type"] == "Univariate/Uniform" and not dist["Minimum"] < dist["Maximum"]:
                raise TypeMismatchError(f"{path}/Maximum", f"real > Minimum ({dist['Minimum']})", dist["Maximum"])

        bayesian = problem["Type"] == "Bayesian Inference"
        variable_names = []
        for index, variable in enumerate(variables):
            path = f"Variables/[{index}]"
            if variable["Name"] in variable_names:
                raise TypeMismatchError(f"{path}/Name", "unique variable name", variable["Name"])
            variable_names.append(variable["Name"])

            lower, upper = variable["Lower Bound"], variable["Upper Bound"]
            if lower is not None and upper is not None and not lower < upper:
                raise TypeMismatchError(f"{path}/Upper Bound", f"real > Lower Bound ({lower})", upper)

            prior = variable["Prior Distribution"]
            if prior is None:
                if bayesian:
                    raise MissingRequiredError(f"{path}/Prior Distribution")
            elif prior not in distribution_names:
                raise TypeMismatchError(
                    f"{path}/Prior Distribution", f"one of declared distributions {distribution_names}", prior
                )

        if bayesian and not problem["Reference Data"]:
            raise TypeMismatchError("Problem/Reference Data", "non-empty list of reals", problem["Reference Data"])
        if solver["Type"] == "TMCMC" and not bayesian:
            raise TypeMismatchError("Problem/Type", "'Bayesian Inference' for the TMCMC solver", problem["Type"])

        logger.debug(f"Experiment '{experiment.get('Name')}' passed cross-field validation")


def config_validate(tree: Dict[str, Any], descriptor: Descriptor = EXPERIMENT_DESCRIPTOR) -> Dict[str, Any]:
    """
    Validate ``tree`` against ``descriptor`` and return the defaulted tree.
    Whole experiments also get the cross-field rules.
    """
    validator = ConfigValidator()
    if descriptor is EXPERIMENT_DESCRIPTOR:
        return validator.validate_experiment(tree)
    return validator.validate(tree, descriptor)
