"""Service protocol analysis on labelled transition systems."""

try:
    from ._svan import *  # noqa: F401,F403
    from ._svan import __doc__  # noqa: F401
except ImportError:  # development tree: extension built next to the package
    from _svan import *  # noqa: F401,F403
