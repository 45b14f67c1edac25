"""Multi-agent regret-minimization simulation toolkit."""

try:
    from maclab._maclab import *  # noqa: F401,F403  (installed wheel layout)
except ImportError:
    from _maclab import *  # noqa: F401,F403  (in-tree build on PYTHONPATH)
