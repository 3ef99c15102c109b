from .candidates import generate_candidates
from .export import export_curated
from .store import Candidate, CurationRecord, CurationStore

__all__ = [
    "generate_candidates",
    "export_curated",
    "Candidate",
    "CurationRecord",
    "CurationStore",
]
