"""
Plan IO

External formats of the planner.

Capabilities:
- Read the domain document (utilities, workers, materials, products, lines,
  vehicles, routes, policy) into a validated environment
- Read the problem document (goal tasks, stock overrides)
- Render and parse the plan action grammar, one decimal, round half to even
- Emit plans and validation reports as text or JSON

Schemas are documented in docs/formats.md.
"""
