"""stickyflows command-line entry point."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

from stickyflows.cli.config import log_level, parse_config
from stickyflows.errors import ConfigError
from stickyflows.worker.orchestrator import EXIT_CODE_CONFIG_ERROR, RunOrchestrator

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"

logger = logging.getLogger(__name__)


def main(argv: list[str] | None = None) -> int:
    """Parse, run and return the exit status (0 success, 1 module error, 2 usage error)."""
    argv = sys.argv[1:] if argv is None else argv
    logging.basicConfig(level=log_level(argv), format=LOG_FORMAT)
    try:
        config = parse_config(argv)
    except ConfigError as e:
        record = {"error_code": type(e).__name__, "error_detail": str(e), "key": e.key}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return EXIT_CODE_CONFIG_ERROR
    except SystemExit as e:
        return int(e.code or 0)
    return RunOrchestrator(Path(config.out)).run(config)


if __name__ == "__main__":
    sys.exit(main())
