import logging
import math
import sys

LOGGER = logging.getLogger("prolate_sampling.utils")


def setup_logging(level="INFO"):
    """Configure the root logger for command-line runs.

    Library modules only create loggers; the entry points call this once.
    """
    if isinstance(level, str):
        name = level
        level = getattr(logging, name.upper(), None)
        if not isinstance(level, int):
            raise ValueError(f"Unknown log level `{name}`!")
    logging.basicConfig(
        stream=sys.stdout,
        level=level,
        format="%(asctime)s %(levelname)-8s %(name)s: %(message)s",
    )


def format_float(value):
    """Render a float for CSV output with full double precision.

    `None` renders as the empty string and infinities as `inf` so the
    files stay parseable by any CSV reader.
    """
    if value is None:
        return ""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(float(value))
