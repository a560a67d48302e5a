"""
HTN Core

Generic total-order forward-decomposition HTN search.

Capabilities:
- Describe a planning domain as operators (primitive tasks with preconditions
  and delete/add effects) and methods (ground decompositions of compound tasks
  with a heuristic score)
- Pick the next goal task by a caller-supplied priority, ties by identifier
- Try method instances in descending score, ties by identifier, and
  backtrack chronologically when a branch runs out of alternatives
- Either fail hard when a goal cannot be decomposed (strict) or record the
  goal as infeasible and carry on with the others (lenient)
- Count expanded nodes and backtracks

States must offer `snapshot()`; every applied action works on a fresh
snapshot so the state a choice point started from stays intact.
"""
