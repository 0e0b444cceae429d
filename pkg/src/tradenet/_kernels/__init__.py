"""Hot-loop kernels with a compiled core and a numpy fallback.

The Cython extension is optional: when it was not built (or failed to
import) the pure numpy implementation is selected transparently.
``BACKEND`` records which one is active; benchmarks and tests can reach
both implementations explicitly.
"""

from ._pure import accumulate_current_flow as accumulate_current_flow_pure

try:
    from ._cyflow import accumulate_current_flow

    BACKEND = "compiled"
except ImportError:
    accumulate_current_flow = accumulate_current_flow_pure
    BACKEND = "pure"

__all__ = ["accumulate_current_flow", "accumulate_current_flow_pure", "BACKEND"]
