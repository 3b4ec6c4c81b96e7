"""Semi-analytic cloaking simulator for radially layered acoustic and
electromagnetic media: blow-up maps and pushforwards, per-mode transfer
matrices, resonance scans, visibility rate sweeps and frequency-to-time
pulse synthesis."""

__version__ = "0.1.0"
