"""Tests for the geo-carbon scheduler."""
