"""
Core module for data-sharing contract design.
"""
