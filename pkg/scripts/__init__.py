"""
Operator scripts (configuration inspection).
"""
