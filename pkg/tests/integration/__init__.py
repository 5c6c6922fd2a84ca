"""Integration tests for deleverage."""
