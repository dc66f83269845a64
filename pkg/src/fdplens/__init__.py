"""Simultaneous confidence bounds for false discovery proportions.

Closed testing with Simes local tests, evaluated through an exact shortcut:
after an O(m log m) preparation per significance level, the confidence bound
for any subset of hypotheses costs time linear in the subset size, and the
analyst may revise the subset as often as desired without spending error rate.
"""

from .core import (
    BhCertificate,
    HommelContext,
    bh_fdp_certificate,
    bh_set,
    compute_h,
    concentration_set,
    concentration_z,
    discoveries,
    hommel_context,
    hommel_rejections,
    in_closure,
    min_alpha_for,
    simes_rejects,
)
from .mixture import (
    ExperimentError,
    ExperimentResult,
    MixtureConfig,
    PiBar,
    consistency_experiment,
    coverage_experiment,
    draw_study,
    draw_tagged_study,
    mixture_cdf,
    pi_bar,
    scalability_experiment,
)
from .oracle import ClosureTable, build_closure, oracle_t
from .study import BoundReport, PValueStudy, SubsetSelection, decimal_str
from .tables import ParseError, parse_table, study_from_json, study_from_text

__version__ = "0.1.0"

__all__ = [
    "BhCertificate",
    "BoundReport",
    "ClosureTable",
    "ExperimentError",
    "ExperimentResult",
    "HommelContext",
    "MixtureConfig",
    "ParseError",
    "PiBar",
    "PValueStudy",
    "SubsetSelection",
    "bh_fdp_certificate",
    "bh_set",
    "build_closure",
    "compute_h",
    "concentration_set",
    "concentration_z",
    "consistency_experiment",
    "coverage_experiment",
    "decimal_str",
    "discoveries",
    "draw_study",
    "draw_tagged_study",
    "hommel_context",
    "hommel_rejections",
    "in_closure",
    "min_alpha_for",
    "mixture_cdf",
    "oracle_t",
    "parse_table",
    "pi_bar",
    "scalability_experiment",
    "simes_rejects",
    "study_from_json",
    "study_from_text",
    "__version__",
]
