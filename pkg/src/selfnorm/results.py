"""Decision records shared by the deciders, the report writer and the CLI."""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from .errors import ValidationError
from .group import SubgroupHandle

# Routes
BRUTEFORCE = "bruteforce"
NILPOTENT = "nilpotent"
SOLUBLE_SPLIT = "soluble_split"
PERFECT_PSL2 = "perfect_psl2"
PERFECT_SL25 = "perfect_sl25"
REJECTED_FILTER = "rejected_filter"

ROUTES = (BRUTEFORCE, NILPOTENT, SOLUBLE_SPLIT, PERFECT_PSL2, PERFECT_SL25, REJECTED_FILTER)


@dataclass
class Verdict:
    """
    Membership decision for the class of groups whose non-nilpotent subgroups
    are all self-normalizing.

    Attributes:
        member: the decision
        route: which decider branch produced it (one of ROUTES)
        filter: failing necessary condition when route is rejected_filter
        witness: non-nilpotent subgroup with a strictly larger normalizer
            (brute-force rejections only)
        evidence: route-specific payload (splitting, star report, fingerprint match, ...)
    """

    member: bool
    route: str
    filter: Optional[str] = None
    witness: Optional[SubgroupHandle] = None
    evidence: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.route not in ROUTES:
            raise ValidationError(f"unknown route {self.route!r}")

    @property
    def route_label(self) -> str:
        if self.route == REJECTED_FILTER:
            return f"{REJECTED_FILTER}({self.filter})"
        return self.route

    def __str__(self) -> str:
        decision = "member" if self.member else "non-member"
        return f"{decision} via {self.route_label}"
