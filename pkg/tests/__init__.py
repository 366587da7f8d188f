"""Test suite for devsurf."""
