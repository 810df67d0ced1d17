"""
Commands module for the edgeroute CLI.

One module per command group; each exposes ``<name>_command`` functions
registered in ``edgeroute.cli``.
"""
