"""
ACE - command-line application package
Trustee, Vetter and Data Server commands over per-role state directories.
"""

__version__ = "1.0.0"
