"""Test helper utilities."""

from .console import assert_console_contains, capture_console_output
from .factories import (
    identity_disk,
    make_center,
    make_conjugated,
    make_perturbed,
    make_point,
    near_identity_mobius,
    noisy_disk,
    random_matrix,
    random_param,
)
from .temp_files import temp_json_file

__all__ = [
    "assert_console_contains",
    "capture_console_output",
    "identity_disk",
    "make_center",
    "make_conjugated",
    "make_perturbed",
    "make_point",
    "near_identity_mobius",
    "noisy_disk",
    "random_matrix",
    "random_param",
    "temp_json_file",
]
