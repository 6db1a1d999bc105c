"""planverb: decide which plan actions to verbalize, and in what order.

A robot holding an optimal plan picks the subset of its actions whose
announcement is most informative to an observer that models the robot's
own beliefs (a second-order theory of mind).  The package bundles the
STRIPS toolchain this needs (PDDL parsing, grounding, optimal and top-k
planning), the observer model, three verbalization strategies, a benchmark
harness, a warehouse scenario generator with a simulated observer study,
and an HTTP service for running the study in a browser.
"""

__version__ = "0.1.0"
