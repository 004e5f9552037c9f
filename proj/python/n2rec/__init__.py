"""Next-new POI recommendation toolkit: joint triplet-loss training over
shared user/POI embeddings, base recommenders, and ranking evaluation."""

import os
import sys

_ext_dir = os.environ.get("N2REC_EXT_DIR")
if _ext_dir and _ext_dir not in sys.path:
    # test harness points at the build tree before the package is installed
    sys.path.insert(0, _ext_dir)
    from _core import *  # noqa: F401,F403
    from _core import __doc__ as _core_doc
else:
    from ._core import *  # noqa: F401,F403
    from ._core import __doc__ as _core_doc

__all__ = [
    "Dataset",
    "TrainedModel",
    "sigmoid",
    "jtll_loss",
    "jtll_grads",
    "generate_synth",
    "split",
    "load_dataset",
    "save_dataset",
    "joint_train",
]
