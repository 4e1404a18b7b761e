import os
from pathlib import Path


def validate_output_dir(path: str | Path) -> tuple[bool, str]:
    """
    Validate that an output directory exists or can be created and is writable.

    Args:
        path: Directory path

    Returns:
        Tuple of (is_valid, error_message)
    """
    directory = Path(path)
    if directory.exists() and not directory.is_dir():
        return False, f"Output path is not a directory: {directory}"

    # nearest existing ancestor decides whether creation can succeed
    probe = directory
    while not probe.exists():
        if probe.parent == probe:
            return False, f"Output path has no existing parent: {directory}"
        probe = probe.parent
    if not probe.is_dir():
        return False, f"Output path is blocked by a file: {probe}"
    if not os.access(probe, os.W_OK):
        return False, f"Output directory is not writable: {probe}"
    return True, ""


def validate_data_dir(path: str | Path) -> tuple[bool, str]:
    """
    Validate that a dataset directory exists and holds at least one sequence.

    Args:
        path: Dataset root in MOT17 layout (``<seq>/img1/``)

    Returns:
        Tuple of (is_valid, error_message)
    """
    root = Path(path)
    if not root.is_dir():
        return False, f"Data directory not found: {root}"
    if not any((child / "img1").is_dir() for child in root.iterdir()):
        return False, f"No sequences (<seq>/img1/) in {root}"
    return True, ""


def validate_checkpoint_file(path: str | Path | None) -> tuple[bool, str]:
    """
    Validate that a checkpoint path was given and points to a non-empty file.

    Returns:
        Tuple of (is_valid, error_message)
    """
    if path is None:
        return False, "No checkpoint given"
    checkpoint = Path(path)
    if not checkpoint.is_file():
        return False, f"Checkpoint not found: {checkpoint}"
    if checkpoint.stat().st_size == 0:
        return False, f"Checkpoint is empty: {checkpoint}"
    return True, ""
