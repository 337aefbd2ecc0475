"""Configuration settings for quadperiod."""
import os
from fractions import Fraction
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Base directory
BASE_DIR = Path(__file__).parent.parent

# Run history database
DB_PATH = Path(os.getenv("QUADPERIOD_DB_PATH", BASE_DIR / "data" / "quadperiod.db"))

# Logging Configuration
LOG_PATH = BASE_DIR / "logs" / "quadperiod.log"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_LEVEL = os.getenv("QUADPERIOD_LOG_LEVEL", "WARNING").upper()

# Precision policy (bits). Interval operations never refine on their own;
# the CLI doubles the working precision from PREC_START_BITS up to PREC_CAP_BITS.
PREC_START_BITS = int(os.getenv("QUADPERIOD_PREC_START", "128"))
PREC_CAP_BITS = int(os.getenv("QUADPERIOD_PREC_CAP", "8192"))
GUARD_BITS = 16
# A divisor carrying fewer correct bits than this is rejected as precision loss
MIN_USEFUL_BITS = 8

# Summation defaults
DEFAULT_TOLERANCE = Fraction(os.getenv("QUADPERIOD_TOLERANCE", "1e-8"))
DEFAULT_DEPTH_CAP = int(os.getenv("QUADPERIOD_DEPTH_CAP", "4000"))
DEFAULT_SEED = int(os.getenv("QUADPERIOD_SEED", "20240"))
# Orbit lists: steps per list, rows each list should reach, and the hard stop
DEFAULT_LIST_DEPTH = 8
DEFAULT_LIST_ROWS = int(os.getenv("QUADPERIOD_LIST_ROWS", "5"))
LIST_DEPTH_CAP = 60

# Output
DISPLAY_DIGITS = 6
VERSION = "0.3.0"

def validate_config():
    """Validate the numeric settings and create the runtime directories."""
    problems = []
    if PREC_START_BITS < 32:
        problems.append(f"QUADPERIOD_PREC_START={PREC_START_BITS} (must be >= 32)")
    if PREC_START_BITS > PREC_CAP_BITS:
        problems.append(
            f"QUADPERIOD_PREC_START={PREC_START_BITS} exceeds QUADPERIOD_PREC_CAP={PREC_CAP_BITS}"
        )
    if DEFAULT_TOLERANCE <= 0:
        problems.append(f"QUADPERIOD_TOLERANCE={DEFAULT_TOLERANCE} (must be > 0)")
    if DEFAULT_DEPTH_CAP < 1:
        problems.append(f"QUADPERIOD_DEPTH_CAP={DEFAULT_DEPTH_CAP} (must be >= 1)")
    if DEFAULT_LIST_ROWS < 0:
        problems.append(f"QUADPERIOD_LIST_ROWS={DEFAULT_LIST_ROWS} (must be >= 0)")

    if problems:
        raise ValueError(
            f"Invalid configuration: {', '.join(problems)}\n"
            "Please check your .env file and the QUADPERIOD_* environment variables."
        )

    # Create necessary directories if they don't exist
    DB_PATH.parent.mkdir(parents=True, exist_ok=True)
    LOG_PATH.parent.mkdir(parents=True, exist_ok=True)
