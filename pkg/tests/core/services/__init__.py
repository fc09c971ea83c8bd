"""Tests for core services."""
