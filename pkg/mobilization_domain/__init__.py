"""
Mobilization Domain

The enterprise model, the planning state and the HTN operator and method
library for economic-mobilization tasks.

Capabilities:
- Describe an enterprise: utilities and workers, material stock, products with
  their bill of materials, production lines, vehicles and routes
- Rank tasks, lines and vehicles by their efficiency γ
- Engage production lines for a task with a joint-finish split, checking
  utility budgets and worker concurrency
- Settle material demand, reporting and virtualizing shortages
- Grow a vehicle pool in γ order until the deliveries meet the deadline
- Cost each task (line hours at cost rate plus trip costs)
- Plan a whole problem, reporting infeasible tasks or failing in strict mode

Policies:
- Line engagement: all-capable (default) or gamma-escalation
- Changeover delay when a line switches product (default 0.5 h)
- Deadline judged on the last arrival (default) or the last unload completion
"""
