"""Shared pytest setup; the tests directory also hosts the oracle helpers."""
