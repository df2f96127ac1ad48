# -*- coding: utf-8 -*-
"""Provide a central version."""
__version__ = "0.1"
