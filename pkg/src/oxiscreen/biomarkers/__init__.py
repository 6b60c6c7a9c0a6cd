from .general import StatBiomarkers, stat_biomarkers
from .complexity import (approx_entropy, central_tendency, dfa_fluctuation,
                         lempel_ziv, sample_entropy)
from .periodicity import PrsaResult, SpectralResult, prsa, spectral

__all__ = [
    "StatBiomarkers", "stat_biomarkers",
    "approx_entropy", "sample_entropy", "lempel_ziv", "central_tendency",
    "dfa_fluctuation",
    "PrsaResult", "SpectralResult", "prsa", "spectral",
]
