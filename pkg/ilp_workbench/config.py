#!/usr/bin/env python3
"""
Run configuration shared by the library entry points and the CLI.
"""

import re
from dataclasses import dataclass, field, fields, replace
from typing import Tuple

from .errors import ConfigError

_VAR = re.compile(r"[a-z][a-z0-9_]*\Z")


@dataclass(frozen=True)
class Config:
    """
    Budgets, generator settings and output location.

    Args:
        budget: Maximum number of sequents explored by one proof search
        closure_budget: Maximum number of sequents in the oracle's closure
        max_worlds: Largest frame size enumerated by the semantic suites
        valuation_budget: Maximum number of valuations tried per frame
        model_budget: Maximum number of worlds in a built model
        family_budget: Maximum number of maximal consistent sets
        build_budget: Sequents explored by all consistency checks of one canonical build
        memo_limit: Memo entries a prover keeps before it clears them
        seed: Seed for every random generator
        max_size: Largest formula size used by corpus enumeration
        vars: Propositional variables used by the corpus
        jobs: Worker processes for the self-test
        output_dir: Directory for emitted artifacts
    """

    budget: int = 200_000
    closure_budget: int = 20_000
    max_worlds: int = 3
    valuation_budget: int = 1 << 16
    model_budget: int = 200_000
    family_budget: int = 400
    build_budget: int = 2_000_000
    memo_limit: int = 250_000
    seed: int = 0
    max_size: int = 4
    vars: Tuple[str, ...] = field(default=("p", "q"))
    jobs: int = 1
    output_dir: str = "output"

    def __post_init__(self):
        for name in ("budget", "closure_budget", "max_worlds", "valuation_budget",
                     "model_budget", "family_budget", "build_budget", "memo_limit", "max_size",
                     "jobs"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if not isinstance(self.seed, int):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        names = tuple(self.vars)
        for name in names:
            if not _VAR.match(name):
                raise ConfigError(f"invalid variable name {name!r}")
        if len(set(names)) != len(names):
            raise ConfigError("duplicate variable names")
        object.__setattr__(self, "vars", names)

    @classmethod
    def from_namespace(cls, namespace) -> "Config":
        """Build a config from parsed CLI arguments, ignoring unset options."""
        known = {f.name for f in fields(cls)}
        values = {}
        for name, value in vars(namespace).items():
            if name in known and value is not None:
                values[name] = value
        return cls(**values)

    def replace(self, **changes) -> "Config":
        return replace(self, **changes)


DEFAULT_CONFIG = Config()
