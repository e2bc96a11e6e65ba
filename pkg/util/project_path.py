from pathlib import Path

# IMPORTANT: This path MUST be updated if the file is moved
PROJECT_ROOT = Path(__file__).parent.parent

SAMPLES_DIR = 'data/samples'


def project_path(path: Path | str) -> Path:
    """
    Resolves a path relative to the repository root (used for the bundled sample inputs).
    """
    if (isinstance(path, Path) and path.anchor != '') or (isinstance(path, str) and path.startswith('/')):
        raise ValueError(f"Input path ({path}) cannot be an absolute path.")

    if isinstance(path, str):
        path = Path(path)
    return PROJECT_ROOT / path


def sample_path(name: str) -> Path:
    """
    :param name: sample file name without the .json suffix, e.g. 'mercedes'
    """
    path = project_path(f'{SAMPLES_DIR}/{name}.json')
    if not path.exists():
        raise ValueError(f"No bundled sample named '{name}'.")
    return path


def prepare_output_dir(path: Path | str) -> Path:
    """
    Creates the output directory (and parents) if needed. Existing files inside are overwritten by the writers.
    """
    path = Path(path)
    if path.exists() and not path.is_dir():
        raise NotADirectoryError(f"Output path ({path}) exists and is not a directory.")
    path.mkdir(parents=True, exist_ok=True)
    return path
