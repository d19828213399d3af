"""CLI command modules.

Each command lives in its own module and is registered with the group in
main.py.
"""
