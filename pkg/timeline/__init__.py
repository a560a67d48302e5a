"""
Timeline

Deterministic event arithmetic behind every timestamp of a mobilization plan.

Capabilities:
- Build a joint-finish production schedule: every engaged line stops at the
  instant the pooled output reaches the task amount
- Answer "when is the cumulative quantity q available" for a piecewise-linear
  production pool
- Lay out one vehicle round trip (load, transport, unload, back)
- Simulate the claim-queue dispatch of a vehicle pool over a production pool

Time is continuous; nothing here rounds. Rendering to one decimal happens in
plan_io only.
"""
