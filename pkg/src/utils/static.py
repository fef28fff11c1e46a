import os
from dotenv import load_dotenv

load_dotenv()

ROOT_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), '../..'))

LOG_DIR = os.getenv("LOG_DIR", ROOT_DIR)
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

# Tolérances numériques
EPS_PT = float(os.getenv("EPS_PT", "1e-12"))
EPS_LOX = float(os.getenv("EPS_LOX", "1e-10"))
EPS_RELATOR = float(os.getenv("EPS_RELATOR", "1e-8"))
MIN_TRANSLATION = float(os.getenv("MIN_TRANSLATION", "1e-6"))
BISECT_TOL = 1e-14

# Orbites et batteries
DEFAULT_DEPTH = int(os.getenv("DEFAULT_DEPTH", "8"))
DEFAULT_MAX_WORD_LEN = int(os.getenv("DEFAULT_MAX_WORD_LEN", "8"))
MAX_ORBIT_DEPTH = int(os.getenv("MAX_ORBIT_DEPTH", "48"))

# Échantillonnage des plans plissés
DEFAULT_RAYS = int(os.getenv("DEFAULT_RAYS", "64"))
DEFAULT_STEP = float(os.getenv("DEFAULT_STEP", "0.1"))
DEFAULT_RANGE = float(os.getenv("DEFAULT_RANGE", "12"))

# Différences finies
FD_STEP = float(os.getenv("FD_STEP", "1e-3"))

REPORT_VERSION = os.getenv("REPORT_VERSION", "1.0")

VERDICT_REFUTED = "REFUTED"
VERDICT_CONSISTENT = "CONSISTENT"
VERDICT_PROPER = "PROPER-EVIDENCE"
VERDICT_INCONCLUSIVE = "INCONCLUSIVE"
SEPARATION_PASS = "PASS"
SEPARATION_FAIL = "FAIL"
SEPARATION_NA = "NOT APPLICABLE"
VERDICT_GUARANTEED = "PAPER-GUARANTEED"
UNKNOWN = "UNKNOWN"
