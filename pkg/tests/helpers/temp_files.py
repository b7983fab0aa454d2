"""Temporary file utilities for testing."""

import json
import tempfile
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path


@contextmanager
def temp_json_file(data: object) -> Iterator[Path]:
    """Create a temporary JSON file holding `data`.

    Args:
        data: JSON-serializable value to write

    Yields:
        Path: Path to the temporary file

    Example:
        with temp_json_file({"type": "antipodal"}) as path:
            main(["weld", "--psi", str(path), ...])

    """
    with tempfile.NamedTemporaryFile(mode="w", suffix=".json", delete=False) as f:
        json.dump(data, f)
        temp_path = Path(f.name)
    try:
        yield temp_path
    finally:
        temp_path.unlink()
