"""Sampled-data H-infinity cancelers for relay self-interference.

Thin wrapper over the C++ core. Configs are the same JSON documents the
``relaycancel`` command line tool reads.
"""

try:
    from ._relaycancel import *  # noqa: F401,F403
    from ._relaycancel import RelayCancelError, StateSpace
except ImportError:  # in-tree build: the extension sits next to the CMake outputs
    from _relaycancel import *  # type: ignore # noqa: F401,F403
    from _relaycancel import RelayCancelError, StateSpace  # type: ignore

__all__ = [
    "RelayCancelError",
    "StateSpace",
    "tf",
    "series",
    "c2d_zoh",
    "lift",
    "expm",
    "spectral_radius",
    "hinf_norm",
    "solve_are",
    "parse_config",
    "design",
    "simulate",
]
