"""Workflow-net soundness toolkit.

Analyzes workflow nets through integer and continuous reachability
relaxations, with exact decisions on free-choice nets, reduction rules,
synthetic net families, and explicit-state oracles for small instances.
"""

__version__ = "0.1.0"
