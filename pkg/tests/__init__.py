"""Test package for the DualAut Free Group Toolkit."""
