"""Rate-energy trade-offs for multiuser SWIPT interference channels with collaborative energy beamforming."""

__version__ = "0.1.0"
