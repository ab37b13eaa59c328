"""crip-ofdm - Real-valued optical OFDM simulation toolkit (Hermitian symmetry, E-CRIP, O-CRIP)."""

__version__ = "0.3.0"
