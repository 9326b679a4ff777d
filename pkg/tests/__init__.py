"""Test suite for jclosure."""
