"""Distributed pseudo-localization and density control for agent swarms.

Agents that cannot sense their own positions compute surrogate coordinates
through local averaging (a pseudo-localization iteration) and then steer
toward a desired density profile expressed in those coordinates.  The
package contains the 1D and 2D agent-level algorithms, the offline target
compilation, and grid-based continuum solvers used to validate the
agent-level dynamics at desk scale.
"""

from . import core, density, targets, pseudoloc1d, control1d, swarm2d, oracle

__all__ = [
    "core",
    "density",
    "targets",
    "pseudoloc1d",
    "control1d",
    "swarm2d",
    "oracle",
]

__version__ = "0.1.0"
