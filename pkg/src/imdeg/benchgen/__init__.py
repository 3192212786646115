"""Benchmark generation: protocols, execution with manifests, severity reports."""

from imdeg.benchgen.execute import (
    MANIFEST_NAME,
    Manifest,
    chain_stem,
    default_jobs,
    execute_plan,
    load_manifest,
)
from imdeg.benchgen.plans import (
    PROTOCOLS,
    Assignment,
    GenerationPlan,
    group_pool,
    make_plan,
    plan_cartesian,
    plan_chain_factorial,
    plan_random_chains,
    plan_round_robin,
)
from imdeg.benchgen.report import (
    SeverityReport,
    is_non_monotone,
    report_from_manifest,
    report_from_tables,
    report_severity_table,
)

__all__ = [
    "Assignment",
    "GenerationPlan",
    "MANIFEST_NAME",
    "Manifest",
    "PROTOCOLS",
    "SeverityReport",
    "chain_stem",
    "default_jobs",
    "execute_plan",
    "group_pool",
    "is_non_monotone",
    "load_manifest",
    "make_plan",
    "plan_cartesian",
    "plan_chain_factorial",
    "plan_random_chains",
    "plan_round_robin",
    "report_from_manifest",
    "report_from_tables",
    "report_severity_table",
]
