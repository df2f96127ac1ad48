from mfdpy.mfd import MFD
from mfdpy.classes.run_config import RunConfig
from mfdpy._version import __version__

__all__ = ["__version__"]
__all__ += ["MFD", "RunConfig"]
