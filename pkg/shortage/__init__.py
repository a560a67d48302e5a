"""
Shortage

Per-task material shortage detection and virtualization.

Capabilities:
- Keep a material ledger with its debit history and the quantities that were
  virtualized while planning
- Compare a task's bill-of-materials demand with the stock on hand
- Report every material whose demand exceeds stock and assume the missing
  amount, so that planning can carry on and the plan runs as soon as the
  reported allocation arrives

Utilities (water, electricity, steam) are never virtualized; running out of
them makes a task infeasible instead.
"""
