import os
from dotenv import load_dotenv

load_dotenv()

N_INIT = int(os.getenv("DIAR_N_INIT", "60"))
N_CKPT = int(os.getenv("DIAR_N_CKPT", "180"))
CENTROID_THRESHOLD = float(os.getenv("DIAR_CENTROID_THRESHOLD", "0.25"))
MAX_INITIAL_SPEAKERS = int(os.getenv("DIAR_MAX_INITIAL_SPEAKERS", "5"))
WINDOW_LEN = float(os.getenv("DIAR_WINDOW_LEN", "1.5"))
WINDOW_SHIFT = float(os.getenv("DIAR_WINDOW_SHIFT", "0.5"))
STATE_DB_URL = os.getenv("DIAR_STATE_DB_URL")
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

if N_INIT > N_CKPT:
    raise ValueError(f"DIAR_N_INIT ({N_INIT}) не может превышать DIAR_N_CKPT ({N_CKPT})!")
