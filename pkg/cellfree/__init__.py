"""
Statistics-only simulator for wireless-powered cell-free networks with
self-energy recycling.

Nothing in this package touches Django settings or the ORM, so the
numerics can be driven from management commands, tests or a notebook.
"""
