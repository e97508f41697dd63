"""Numerical workbench for conformal (Yamabe-type) reformulations of gravity.

Subpackages are imported lazily by the command line; the library modules can be
used directly::

    from yamabe_lab import series, yamabe_ode
    rho = yamabe_ode.find_rho(yamabe_ode.integrate_v())
"""

from .errors import YamabeLabError

__all__ = ["YamabeLabError"]
__version__ = "0.1.0"
