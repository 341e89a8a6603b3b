try:
    from ._version import __version__  # noqa: F401
except ImportError:  # source tree without setuptools_scm metadata
    __version__ = "0+unknown"
