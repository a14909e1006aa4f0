"""Loop and height-function toolkit for planar XY spin systems.

The package provides four layers:

* exact desk-scale machinery: planar graphs with rotation systems, the
  modified-Bessel kernel, current and loop ensembles with their switching
  identities, and the integer height function dual to the currents;
* transfer-style exact computations that scale past brute force (flow
  aggregation for partition functions, interface dynamic programs for
  loop-side expectations);
* Monte Carlo samplers (spin heat bath, reflection clusters, height heat
  bath) with reproducible named random streams;
* analysis front ends: correlation decay fits, transition bracketing, and a
  command line interface.
"""

from xyloops.planar import (
    PlanarGraph,
    PlanarGraphError,
    box_lattice,
    build_graph,
    chain_graph,
    complete_four,
    cycle_graph,
    parallel_edges,
    parallel_refine,
    path_graph,
    subdivide_edges,
    triangulated_box,
)

__version__ = "0.1.0"

__all__ = [
    "PlanarGraph",
    "PlanarGraphError",
    "box_lattice",
    "build_graph",
    "chain_graph",
    "complete_four",
    "cycle_graph",
    "parallel_edges",
    "parallel_refine",
    "path_graph",
    "subdivide_edges",
    "triangulated_box",
    "__version__",
]
