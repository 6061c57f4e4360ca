"""
`verify` command: numerical self-checks with a pass/fail table on stdout.
"""

import logging

from app.commands import EXIT_ERROR, EXIT_OK
from app.errors import OcoError
from app.services.verification import format_table, run_verification

logger = logging.getLogger(__name__)


def cmd_verify(seed: int | None = None) -> int:
    try:
        results = run_verification(seed)
    except OcoError:
        logger.error("verification aborted", exc_info=True)
        return EXIT_ERROR
    print(format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_ERROR
