"""Define the configurable parameters for the starter-set optimizer."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Optional

from langchain_core.runnables import RunnableConfig, ensure_config

from sinkopt.candidates import DEFAULT_MAX_CARD, ENUMERATION_LIMIT, StarterMode
from sinkopt.errors import ConfigurationError


@dataclass(kw_only=True)
class Configuration:
    """The configuration for one optimizer run."""

    nu: float = field(
        default=0.8,
        metadata={
            "description": "Rank threshold in (0, 1]. Sets with un-normalised rank at "
            "least nu are treated as near optimal."
        },
    )

    max_card: int = field(
        default=DEFAULT_MAX_CARD,
        metadata={
            "description": "Largest cardinality enumerated when building the candidate "
            "family. Clamped to the reference cover size."
        },
    )

    starter_mode: str = field(
        default=StarterMode.ALL_MINIMUM.value,
        metadata={
            "description": "How starters are drawn from the smallest family members: "
            "cover-subsets, greedoid-feasible or all-minimum."
        },
    )

    cover_size: Optional[int] = field(
        default=None,
        metadata={
            "description": "Cardinality of the reference vertex cover. None uses the "
            "maximal-matching cover."
        },
    )

    empty_part_cap: Optional[int] = field(
        default=None,
        metadata={
            "description": "Largest part size when maximising F over disjoint pairs for "
            "F(∅). None applies the size-based policy."
        },
    )

    include_greedy_prefix: bool = field(
        default=False,
        metadata={
            "description": "Whether to add the first m greedy choices to the starters, "
            "which guarantees the offered set is at least as good as greedy."
        },
    )

    swap_refine: bool = field(
        default=False,
        metadata={"description": "Whether to run single-node exchanges on the offered set."},
    )

    with_oracle: bool = field(
        default=False,
        metadata={"description": "Whether to compute the brute-force optimum for comparison."},
    )

    with_backward: bool = field(
        default=False,
        metadata={
            "description": "Whether to run backward greedy from the reference cover and "
            "exchange towards it when it ranks higher than the offered set."
        },
    )

    threads: int = field(
        default=1,
        metadata={"description": "Worker threads. 0 uses every available CPU."},
    )

    tol: float = field(
        default=1e-9,
        metadata={"description": "Tolerance for the guarantee checks."},
    )

    enumeration_limit: int = field(
        default=ENUMERATION_LIMIT,
        metadata={"description": "Maximum number of sets the family enumeration may visit."},
    )

    def __post_init__(self) -> None:
        if not 0 < self.nu <= 1:
            raise ConfigurationError(f"nu must lie in (0, 1], got {self.nu}", field="nu")
        if self.max_card < 1:
            raise ConfigurationError("max_card must be at least 1", field="max_card")
        if self.threads < 0:
            raise ConfigurationError("threads must be non-negative", field="threads")
        if self.tol < 0:
            raise ConfigurationError("tol must be non-negative", field="tol")
        if self.empty_part_cap is not None and self.empty_part_cap < 1:
            raise ConfigurationError("empty_part_cap must be at least 1", field="empty_part_cap")
        try:
            StarterMode(self.starter_mode)
        except ValueError:
            valid = ", ".join(m.value for m in StarterMode)
            raise ConfigurationError(
                f"unknown starter mode {self.starter_mode!r}; expected one of {valid}",
                field="starter_mode",
            ) from None

    @property
    def mode(self) -> StarterMode:
        """The starter mode as an enum member."""
        return StarterMode(self.starter_mode)

    @classmethod
    def from_runnable_config(
        cls, config: Optional[RunnableConfig] = None
    ) -> Configuration:
        """Create a Configuration instance from a RunnableConfig object."""
        config = ensure_config(config)
        configurable = config.get("configurable") or {}
        _fields = {f.name for f in fields(cls) if f.init}
        return cls(**{k: v for k, v in configurable.items() if k in _fields})
