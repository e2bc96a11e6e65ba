"""
Run configuration for the command-line tools: the tolerance override from the environment and the corpus settings.
"""
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from framekit_errors import InputError
from numeric_kernel import DEFAULT_TOLERANCE, TolerancePolicy

logger = logging.getLogger(__name__)

TOLERANCE_ENV = 'FRAMEKIT_TOL'
FORMATS = ('json', 'csv-summary')


def tolerance_from_environment(base: TolerancePolicy = DEFAULT_TOLERANCE,
                               environ: dict[str, str] | None = None) -> TolerancePolicy:
    """
    :param base: policy to start from
    :param environ: mapping to read instead of os.environ
    :return: base with identity_residual_rel replaced by $FRAMEKIT_TOL when it is set
    """
    environ = os.environ if environ is None else environ
    raw = environ.get(TOLERANCE_ENV)
    if raw is None or raw.strip() == '':
        return base
    try:
        value = float(raw)
    except ValueError as e:
        raise InputError(f"{TOLERANCE_ENV} must be a number. Got '{raw}'.") from e
    logger.info("Using identity_residual_rel = %g from %s", value, TOLERANCE_ENV)
    return base.with_identity_residual(value)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 42
    trials: int = 100
    tolerance: TolerancePolicy = field(default=DEFAULT_TOLERANCE)
    output_path: Path = Path('corpus')
    format: str = 'json'
    profile: str = 'default'

    def __post_init__(self):
        if self.trials < 1:
            raise InputError(f"trials must be at least 1. Got {self.trials}.")
        if self.format not in FORMATS:
            raise InputError(f"Unknown format '{self.format}'. Expected one of {', '.join(FORMATS)}.")
        object.__setattr__(self, 'output_path', Path(self.output_path))
