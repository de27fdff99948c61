"""Tests package for branchsys."""
