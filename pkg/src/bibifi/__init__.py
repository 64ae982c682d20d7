"""Build-it / break-it / fix-it contest platform.

Submodules are imported lazily by the entry points that need them so the
contest problem binaries (logappend, atm, server, ...) start fast.
"""

__version__ = "0.1.0"
