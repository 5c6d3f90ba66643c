"""Space-time coded interference cancellation for the two-user X network.

Submodules cover numerics, constellations, channel sampling, dispersion
codes, the LJJ/AR/JS transmission schemes, exact ML decoders, verification
instruments and the Monte-Carlo harness.
"""

from .constellation import PHI_CPD, Constellation, by_name, cpd, make_qam
from .decoders import MLEnumerator, RealLinearModel, SphereDecoder, ZeroForcingDecoder
from .harness import BerCurve, BerPoint, SimConfig, run_ber, run_verify
from .stbc import alamouti_code, proposed_3tx_code, sr_4tx_code

__version__ = "0.1.0"
