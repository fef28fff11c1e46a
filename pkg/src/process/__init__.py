# Initialisation du paquet : la journalisation est configurée par helper_data
from src.utils import helper_data  # noqa: F401
