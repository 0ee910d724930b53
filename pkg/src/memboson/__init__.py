"""Simulator and analysis toolkit for looped multi-layer boson sampling.

Subpackages cover the full chain: scattering-matrix construction
(:mod:`.network`), permanent-based pattern statistics (:mod:`.permanent`,
:mod:`.sampling`), timestamped detector-stream synthesis (:mod:`.eventstream`),
coincidence extraction (:mod:`.pipeline`), and reconstruction/validation
statistics (:mod:`.analysis`). The ``memboson`` CLI wires them together.
"""

__version__ = "0.1.0"
