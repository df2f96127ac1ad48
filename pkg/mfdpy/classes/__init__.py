from . import geometry
from . import pyramid
from . import postprocess
from . import assignment
from . import gfl_decode
from . import evaluation
from . import run_config
