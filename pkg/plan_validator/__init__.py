"""
Plan Validator

Independent replay of a plan against the enterprise model.

Capabilities:
- Rebuild every round trip from its load, transport, unload and back steps and
  check the chain, the capacities and the durations (within the 0.05 h that
  one-decimal rendering allows)
- Re-derive production from the Start steps and check that no load claims
  more than has been made
- Check vehicle and line non-overlap, changeover included
- Replay the material ledger and check each reported shortage against what
  the stock actually lacks when the task starts
- Check utility budgets, worker concurrency, deadlines and delivered totals
- Collect all violations, each with its step index and rule id, into a report

Durations are recomputed from the environment; nothing here calls the
planner's timeline code.
"""
