#!/usr/bin/env python3
"""Release version of shearflow, recorded in every manifest."""

__version__ = '0.3.0'
