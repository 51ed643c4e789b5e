try:
    from ._cvnc import *  # noqa: F401,F403  (installed wheel layout)
except ImportError:
    from _cvnc import *  # noqa: F401,F403  (in-tree build with PYTHONPATH)
