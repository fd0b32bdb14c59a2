"""File-based infrastructure adapters."""
