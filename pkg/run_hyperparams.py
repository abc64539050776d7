# This file contains the defaults the command line and the runner use when a flag is not given

# Highest arity of the tower when --max-arity is not given
DEFAULT_MAX_ARITY = 4

# Choice of cocycle representatives ("first-pivot" or "last-pivot")
DEFAULT_SECTION_STRATEGY = "first-pivot"

# Where result sheets and reports go (relative to the repository root)
OUTPUT_FOLDER = "outputs"
TXT_SUBFOLDER = "txt"
JSON_SUBFOLDER = "json"

# Progress bars over stages and Σ_n averages
SHOW_PROGRESS = True

# Format of log records
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
