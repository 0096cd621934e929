"""
selfnorm - finite groups whose non-nilpotent subgroups are self-normalizing.

Decides membership two independent ways and cross-checks them:
- brute force over the full subgroup lattice;
- the structural classification (nilpotent, soluble splitting with the star
  property of ad_x, perfect PSL2(2^n) / SL2(5)).

Usage:
    from src.selfnorm import build_named, cross_check

    G = build_named("D:6")
    result = cross_check(G)
    print(result.structural, result.bruteforce.witness)
"""

from .catalog import build_named, parse_semidirect_file, parse_spec
from .config import Settings, load_settings
from .errors import (
    AutomorphismError,
    BudgetRefusal,
    ConfigError,
    DeciderDisagreement,
    FieldError,
    ParseError,
    ResourceError,
    SelfnormError,
    UsageError,
    ValidationError,
)
from .galois import GaloisField, gf_make
from .group import (
    FiniteGroup,
    SubgroupHandle,
    abelian_group,
    close_group,
    direct_product,
    group_from_table,
    quotient_group,
    semidirect_product,
)
from .lattice import all_subgroups, invariant_subgroups, maximal_subgroups
from .results import Verdict
from .star import AdAction, star_check
from .structure import structure_profile
from .verdict import bruteforce_verdict, cross_check, structural_verdict

__version__ = "0.1.0"

__all__ = [
    "AdAction",
    "AutomorphismError",
    "BudgetRefusal",
    "ConfigError",
    "DeciderDisagreement",
    "FieldError",
    "FiniteGroup",
    "GaloisField",
    "ParseError",
    "ResourceError",
    "SelfnormError",
    "Settings",
    "SubgroupHandle",
    "UsageError",
    "ValidationError",
    "Verdict",
    "abelian_group",
    "all_subgroups",
    "bruteforce_verdict",
    "build_named",
    "close_group",
    "cross_check",
    "direct_product",
    "gf_make",
    "group_from_table",
    "invariant_subgroups",
    "load_settings",
    "maximal_subgroups",
    "parse_semidirect_file",
    "parse_spec",
    "quotient_group",
    "semidirect_product",
    "star_check",
    "structural_verdict",
    "structure_profile",
]
