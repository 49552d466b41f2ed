"""Python bindings for the dfrc simulator.

Tables come back as plain dicts of strings so that values match the CLI
output byte for byte; convert with ``float`` (or pandas) as needed.
"""

from ._dfrc import (
    KINDS,
    Config,
    GuardExceeded,
    Infeasible,
    __version__,
    fresnel,
    lfm_spectrum,
    noise_for_snr,
    render,
    resolution_report,
    run,
)

__all__ = [
    "KINDS",
    "Config",
    "GuardExceeded",
    "Infeasible",
    "__version__",
    "fresnel",
    "lfm_spectrum",
    "noise_for_snr",
    "render",
    "resolution_report",
    "run",
]
