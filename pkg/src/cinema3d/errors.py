"""Exception hierarchy shared across the engine.

The CLI maps these onto process exit codes: ConfigError -> 2,
AssetError -> 3, anything else raised during rendering -> 4.
"""


class CinemaError(Exception):
    """Base class for all engine errors."""


class ConfigError(CinemaError):
    """Invalid job configuration (unknown keys, missing inputs, bad values)."""


class AssetError(CinemaError):
    """Unreadable or inconsistent input data (images, depth, flow, hints)."""


class RenderError(CinemaError):
    """Failure inside the scene-construction or rendering stages."""
