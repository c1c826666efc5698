"""Two-qudit light-shift entangling gate simulator for trapped ions.

The heavy lifting lives in the compiled extension; this package re-exports
its surface. See the README for the CLI and config-file interface.
"""

try:
    from ._core import *  # noqa: F401,F403
    from ._core import __version__  # noqa: F401
except ImportError:  # build-tree layout: extension next to the package
    from _core import *  # noqa: F401,F403
    from _core import __version__  # noqa: F401
