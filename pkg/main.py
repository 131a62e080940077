import io
import logging
import sys

from src.cli import logging_options, main as cli_main

# UTF-8 console output; log lines carry formula labels
stream_handler = logging.StreamHandler(
    io.TextIOWrapper(sys.stderr.buffer, encoding='utf-8', errors='replace', line_buffering=True)
)

try:
    log_level, log_file = logging_options(sys.argv[1:])
except SystemExit:
    # the full parser reports the bad option with usage
    log_level, log_file = 'INFO', None

handlers = [stream_handler]
if log_file:
    handlers.append(logging.FileHandler(log_file, mode='w', encoding='utf-8'))

logging.basicConfig(
    level=getattr(logging, log_level),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=handlers
)

logger = logging.getLogger(__name__)


def main():
    try:
        return cli_main(sys.argv[1:])
    except Exception as e:
        logger.error(f"Error in main: {str(e)}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
