"""deleverage test suite."""
