"""
Mobilization CLI

Command-line entry point: `python -m mobilization_cli <command>`.

Commands:
- plan: plan a problem against a domain and print the plan (text or JSON)
- validate: check a plan against a domain and problem and print the report
- inspect: print the γ rankings of tasks, lines and vehicles

Exit codes: 0 success, 1 input error, 2 infeasible in strict mode,
3 validation failed.
"""
