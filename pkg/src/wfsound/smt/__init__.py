"""SMT-LIB2 emission, a bundled exact-arithmetic solver, and a
subprocess driver for external solvers."""
