"""Pseudospectral 3-D micropolar fluid lab."""

from ._core import (
    BlowUpError,
    DomainError,
    GridSpec,
    IoError,
    ParseError,
    ValidationError,
    besov_norm,
    config_violations,
    read_snapshot,
    reduced_generator,
    reduced_green,
    run_cli,
    set_worker_count,
    verify_green_report,
    worker_count,
)

__all__ = [
    "BlowUpError",
    "DomainError",
    "GridSpec",
    "IoError",
    "ParseError",
    "ValidationError",
    "besov_norm",
    "config_violations",
    "read_snapshot",
    "reduced_generator",
    "reduced_green",
    "run_cli",
    "set_worker_count",
    "verify_green_report",
    "worker_count",
]
