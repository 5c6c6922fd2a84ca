"""Unit tests for deleverage."""
