"""Goal-adjusted closest-target benchmarking on DEA efficient frontiers.

Given positive input/output data for a set of decision making units, a
variable-returns-to-scale technology, and per-unit goal levels, the package
finds frontier targets trading off similarity to the unit's actual
operating point against proximity to its goals, across a grid of trade-off
weights. Non-controllable variables and oriented (input- or output-only)
goal coverage are supported.
"""

__version__ = "0.1.0"
