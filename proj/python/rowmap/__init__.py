"""Row-crop plane estimation, stalk tracking, and semantic mapping.

Thin wrapper around the compiled extension; everything it exports is
re-exported here.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc

__doc__ = _core_doc
