"""Search and abstraction configuration records."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

VARIANTS = ("UCT", "OGA", "IPA", "RSTATE", "CONF", "TOPN")
INF = math.inf


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AbstractionPolicy:
    """Which abstraction family runs during search, with its parameters.

    ``UCT`` disables abstraction (every node stays in its own group).  The
    pair rule shared by all other variants uses ``eps_a``, ``eps_t`` and
    ``alpha``; the remaining fields are read only by their variant.
    """

    variant: str = "OGA"
    eps_a: float = 0.0
    eps_t: float = 0.0
    alpha: float = 0.0
    lambda_p: float = INF
    p_move: float = 0.0
    p_c: float = 0.9
    n_matches: int = 1
    n_min: int = 0
    lambda_p_scaled: bool = True
    propagate_bypasses_recency: bool = True

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {', '.join(VARIANTS)}, got {self.variant!r}")
        if self.eps_a < 0 or self.eps_t < 0:
            raise ConfigError("eps_a and eps_t must be >= 0")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError("alpha must lie in [0, 1]")
        if self.lambda_p < 0:
            raise ConfigError("lambda_p must be >= 0")
        if not 0.0 <= self.p_move <= 1.0:
            raise ConfigError("p_move must lie in [0, 1]")
        if not 0.0 < self.p_c < 1.0:
            raise ConfigError("p_c must lie in (0, 1)")
        if self.n_matches < 0 or self.n_min < 0:
            raise ConfigError("n_matches and n_min must be >= 0")

    @property
    def abstracts(self) -> bool:
        return self.variant != "UCT"


@dataclass(frozen=True)
class SearchConfig:
    iterations: int = 500
    exploration_C: float = 2.0
    sigma_fallback: float = 1.0
    abstraction_policy: AbstractionPolicy = field(default_factory=AbstractionPolicy)
    recency_K: int = 3
    rng_seed: int = 0
    # cap on search depth below the root; None means the domain's remaining horizon
    planning_horizon: int | None = None

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        if self.recency_K < 1:
            raise ConfigError("recency_K must be >= 1")
        if not self.exploration_C > 0:
            raise ConfigError("exploration_C must be > 0")
        if not self.sigma_fallback > 0:
            raise ConfigError("sigma_fallback must be > 0")
        if self.planning_horizon is not None and self.planning_horizon < 1:
            raise ConfigError("planning_horizon must be >= 1")

    def with_policy(self, **changes) -> "SearchConfig":
        return replace(self, abstraction_policy=replace(self.abstraction_policy, **changes))


def uct(**kw) -> SearchConfig:
    return SearchConfig(abstraction_policy=AbstractionPolicy("UCT"), **kw)


def oga(eps_a: float = 0.0, eps_t: float = 0.0, alpha: float = 0.0, **kw) -> SearchConfig:
    return SearchConfig(abstraction_policy=AbstractionPolicy("OGA", eps_a, eps_t, alpha), **kw)


def ipa(lambda_p: float, eps_a: float = 0.0, eps_t: float = 0.0, alpha: float = 0.0, **kw) -> SearchConfig:
    return SearchConfig(
        abstraction_policy=AbstractionPolicy("IPA", eps_a, eps_t, alpha, lambda_p=lambda_p), **kw
    )
